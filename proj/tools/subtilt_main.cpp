#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "subtilt/assumption.hpp"
#include "subtilt/convex.hpp"
#include "subtilt/distributions.hpp"
#include "subtilt/errors.hpp"
#include "subtilt/estimators.hpp"
#include "subtilt/free_energy.hpp"
#include "subtilt/kernels.hpp"
#include "subtilt/tilted.hpp"

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// JSON value for a double: finite numbers plain, infinities as strings, NaN null.
std::string fmt_json(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    return fmt(v);
}

struct ModelFlags {
    std::string model;
    double p = kNaN;
    double alpha = kNaN;
    double gamma_shape = 1.0;
};

struct IoFlags {
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 1;
    int threads = 0;  // 0: use the machine's parallelism
};

struct EventFlags {
    std::int64_t n = 1;
    double x = 1.0;
    std::string shape = "tail";
    double delta = 0.0;
};

struct ResolvedModel {
    std::optional<subtilt::DistributionModel> dist;
    std::optional<subtilt::FreeEnergyModel> fe;

    const subtilt::FreeEnergyModel& free_energy() const { return *fe; }
    const subtilt::DistributionModel& distribution() const {
        if (!dist) {
            throw subtilt::DomainError("this model is a synthetic fixture with no sampling law");
        }
        return *dist;
    }
};

ResolvedModel resolve_model(const ModelFlags& mf) {
    ResolvedModel rm;
    const bool has_p = !std::isnan(mf.p);
    const bool has_alpha = !std::isnan(mf.alpha);
    if (mf.model == "exp-power") {
        const double p = has_p ? mf.p : 2.0;
        if (has_alpha && std::fabs(mf.alpha - 1.0 / p) > 1e-12) {
            throw subtilt::DomainError("exp-power ties alpha to the exponent: alpha = 1/p");
        }
        rm.dist = subtilt::DistributionModel::power_of(
            subtilt::DistributionModel::two_sided_exponential(), p);
        rm.fe = subtilt::exp_power_model(p);
    } else if (mf.model == "gauss-power") {
        const double p = has_p ? mf.p : 4.0;
        if (has_alpha && std::fabs(mf.alpha - 2.0 / p) > 1e-12) {
            throw subtilt::DomainError("gauss-power ties alpha to the exponent: alpha = 2/p");
        }
        rm.dist = subtilt::DistributionModel::power_of(
            subtilt::DistributionModel::standard_gaussian(), p);
        rm.fe = subtilt::gauss_power_model(p);
    } else if (mf.model == "sym-gamma") {
        const double p = has_p ? mf.p : 2.0;
        const double alpha = has_alpha ? mf.alpha : 1.0 / p;
        rm.dist = subtilt::DistributionModel::power_of(
            subtilt::DistributionModel::symmetrized_gamma(mf.gamma_shape), p);
        rm.fe = subtilt::numeric_model(*rm.dist, alpha);
    } else if (mf.model == "bounded-fixture") {
        rm.fe = subtilt::truncated_quadratic_model(1.0, 1.0);
    } else {
        throw subtilt::DomainError("unknown model: " + mf.model);
    }
    return rm;
}

subtilt::EventSpec resolve_event(const EventFlags& ef) {
    subtilt::EventSpec ev;
    ev.n = ef.n;
    ev.x = ef.x;
    ev.shape = ef.shape == "ball" ? subtilt::EventShape::ball
                                  : subtilt::EventShape::tail_at_least;
    ev.delta = ef.delta;
    return ev;
}

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw subtilt::DomainError("could not open output file: " + out_path);
    f << text;
}

// "lo:hi:count" -> uniformly spaced grid.
std::vector<double> parse_range(const std::string& s, const char* flag) {
    double lo = 0.0, hi = 0.0;
    int count = 0;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%d%c", &lo, &hi, &count, &extra) != 3 || count < 2 ||
        !(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw subtilt::DomainError(std::string(flag) + " expects lo:hi:count with lo < hi");
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    }
    return grid;
}

// Rows of already-formatted cells -> CSV or a JSON array of objects.
std::string render_table(const std::vector<std::string>& columns,
                         const std::vector<std::vector<std::string>>& rows,
                         const std::string& format) {
    std::string out;
    if (format == "json") {
        out += "[\n";
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out += "  {";
            for (std::size_t c = 0; c < columns.size(); ++c) {
                out += "\"" + columns[c] + "\": " + rows[r][c];
                if (c + 1 < columns.size()) out += ", ";
            }
            out += r + 1 < rows.size() ? "},\n" : "}\n";
        }
        out += "]\n";
        return out;
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out += columns[c];
        out += c + 1 < columns.size() ? ',' : '\n';
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            // JSON cells quote infinities; CSV cells carry them bare.
            std::string cell = row[c];
            if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
                cell = cell.substr(1, cell.size() - 2);
            }
            if (cell == "null") cell = "nan";
            out += cell;
            out += c + 1 < row.size() ? ',' : '\n';
        }
    }
    return out;
}

int cmd_free_energy(const ModelFlags& mf, const IoFlags& io, const std::string& eta_grid) {
    auto rm = resolve_model(mf);
    const auto& fe = rm.free_energy();
    std::vector<double> grid;
    if (!eta_grid.empty()) {
        grid = parse_range(eta_grid, "--eta-grid");
        if (!fe.xi_is_infinite() &&
            (grid.front() <= -fe.xi() || grid.back() >= fe.xi())) {
            throw subtilt::DomainError("eta grid exceeds the tilt domain (xi = " + fmt(fe.xi()) +
                                       ")");
        }
    } else {
        const double edge = fe.xi_is_infinite() ? 2.0 : 0.99 * fe.xi();
        for (int i = 0; i < 65; ++i) {
            grid.push_back(-edge + 2.0 * edge * static_cast<double>(i) / 64.0);
        }
    }

    std::vector<std::vector<std::string>> rows;
    rows.reserve(grid.size());
    for (double eta : grid) {
        const double lp = fe.lambda_prime(eta);
        const double ls = fe.lambda_second(eta);
        rows.push_back({fmt_json(eta), fmt_json(fe.lambda(eta)), fmt_json(lp), fmt_json(ls),
                        fmt_json(ls / (lp * lp))});
    }
    write_output(render_table({"eta", "lambda", "lambda_prime", "lambda_second", "V"}, rows,
                              io.format),
                 io.out);
    return 0;
}

int cmd_check(const ModelFlags& mf, const IoFlags& io) {
    auto rm = resolve_model(mf);
    auto report = subtilt::check_assumption(rm.free_energy());
    write_output(report.to_json() + "\n", io.out);
    return report.all_ok() ? 0 : 3;
}

int cmd_legendre(const ModelFlags& mf, const IoFlags& io, const std::string& m_grid) {
    auto rm = resolve_model(mf);
    const auto& fe = rm.free_energy();
    const std::vector<double> grid = parse_range(m_grid.empty() ? "0.25:8:32" : m_grid,
                                                 "--m-grid");
    std::vector<std::vector<std::string>> rows;
    rows.reserve(grid.size());
    for (double m : grid) {
        const auto pt = subtilt::legendre(fe, m);
        rows.push_back({fmt_json(m), fmt_json(pt.value), fmt_json(pt.maximizer),
                        fmt_json(subtilt::legendre_second(fe, m))});
    }
    write_output(render_table({"m", "J", "eta_star", "J_second"}, rows, io.format), io.out);
    return 0;
}

std::vector<subtilt::EstimatorResult> run_methods(const ResolvedModel& rm,
                                                  const subtilt::EventSpec& ev,
                                                  const std::string& method,
                                                  std::int64_t reps, const IoFlags& io,
                                                  double eta_override) {
    const int threads = resolve_threads(io.threads);
    const double alpha = rm.free_energy().alpha();
    std::vector<subtilt::EstimatorResult> results;
    if (method == "naive" || method == "all") {
        results.push_back(
            subtilt::naive_mc(rm.distribution(), ev, reps, io.seed, alpha, threads));
    }
    if (method == "esscher" || method == "all") {
        subtilt::EsscherOptions opts;
        opts.eta_override = eta_override;
        opts.threads = threads;
        results.push_back(
            subtilt::esscher_is(rm.distribution(), rm.free_energy(), ev, reps, io.seed, opts));
    }
    if (method == "shift" || method == "all") {
        results.push_back(
            subtilt::shift_is(rm.distribution(), ev, reps, io.seed, alpha, threads));
    }
    return results;
}

const char* method_label(subtilt::Method m) {
    switch (m) {
        case subtilt::Method::naive: return "naive";
        case subtilt::Method::esscher: return "esscher";
        case subtilt::Method::shift: return "shift";
    }
    return "?";
}

std::string estimator_table(const std::vector<subtilt::EstimatorResult>& results,
                            const std::string& format) {
    if (format == "json") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : results) {
            rows.push_back({std::string("\"") + method_label(r.method) + "\"",
                            std::to_string(r.n), fmt_json(r.x),
                            r.shape == subtilt::EventShape::ball ? "\"ball\"" : "\"tail\"",
                            fmt_json(r.delta), std::to_string(r.replications),
                            std::to_string(r.seed), fmt_json(r.estimate),
                            fmt_json(r.standard_error), fmt_json(r.effective_sample_size),
                            fmt_json(r.tilt_eta), fmt_json(r.empirical_rate())});
        }
        return render_table({"method", "n", "x", "shape", "delta", "replications", "seed",
                             "estimate", "std_error", "ess", "tilt_eta", "empirical_rate"},
                            rows, "json");
    }
    std::string out = subtilt::estimator_csv_header() + "\n";
    for (const auto& r : results) out += subtilt::estimator_csv_row(r) + "\n";
    return out;
}

int cmd_estimate(const ModelFlags& mf, const IoFlags& io, const EventFlags& ef,
                 const std::string& method, std::int64_t reps, double eta_override) {
    auto rm = resolve_model(mf);
    const auto ev = resolve_event(ef);
    auto results = run_methods(rm, ev, method, reps, io, eta_override);
    write_output(estimator_table(results, io.format), io.out);

    const auto& fe = rm.free_energy();
    const double theory = fe.xi() * std::pow(ev.x, fe.alpha());
    for (const auto& r : results) {
        std::fprintf(stderr, "%s: estimate=%.6g  se=%.3g  ess=%.6g  rate=%.4g  theory=%.4g\n",
                     method_label(r.method), r.estimate, r.standard_error,
                     r.effective_sample_size, r.empirical_rate(), theory);
    }
    return 0;
}

std::string svg_rate_plot(const std::vector<subtilt::RateSweepPoint>& pts, double theory) {
    const double width = 720, height = 440;
    const double ml = 70, mr = 24, mt = 24, mb = 56;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double ymax = theory;
    for (const auto& p : pts) ymax = std::max(ymax, p.empirical_rate);
    ymax *= 1.15;
    const double lx0 = std::log10(static_cast<double>(pts.front().n));
    const double lx1 = std::log10(static_cast<double>(pts.back().n));
    const double xspan = lx1 > lx0 ? lx1 - lx0 : 1.0;
    auto px = [&](std::int64_t n) {
        return ml + pw * (std::log10(static_cast<double>(n)) - lx0) / xspan;
    };
    auto py = [&](double v) { return mt + ph * (1.0 - v / ymax); };

    char buf[256];
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" "
         "viewBox=\"0 0 720 440\">\n";
    s += "<rect width=\"720\" height=\"440\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml,
                  mt + ph, ml + pw, mt + ph);
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml, mt,
                  ml, mt + ph);
    s += buf;

    for (const auto& p : pts) {
        const double x = px(p.n);
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", x,
                      mt + ph, x, mt + ph + 6);
        s += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-size=\"13\" text-anchor=\"middle\">%lld"
                      "</text>\n",
                      x, mt + ph + 22, static_cast<long long>(p.n));
        s += buf;
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = ymax * i / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                      ml - 6, py(v), ml, py(v));
        s += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-size=\"13\" text-anchor=\"end\">%.3g"
                      "</text>\n",
                      ml - 10, py(v) + 4, v);
        s += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" font-size=\"14\" text-anchor=\"middle\">n (log scale)"
                  "</text>\n",
                  ml + pw / 2, height - 12);
    s += buf;
    s += "<text x=\"16\" y=\"230\" font-size=\"14\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 230)\">empirical rate</text>\n";

    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#c22\" "
                  "stroke-dasharray=\"6,4\"/>\n",
                  ml, py(theory), ml + pw, py(theory));
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" font-size=\"13\" fill=\"#c22\">xi * x^alpha = %.4g"
                  "</text>\n",
                  ml + 8, py(theory) - 6, theory);
    s += buf;

    std::string poly = "<polyline fill=\"none\" stroke=\"#26c\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof(buf), "%g,%g ", px(p.n), py(p.empirical_rate));
        poly += buf;
    }
    poly += "\"/>\n";
    s += poly;
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%g\" cy=\"%g\" r=\"3.5\" fill=\"#26c\"/>\n", px(p.n),
                      py(p.empirical_rate));
        s += buf;
    }
    s += "</svg>\n";
    return s;
}

int cmd_rate_sweep(const ModelFlags& mf, const IoFlags& io, double x,
                   const std::vector<std::int64_t>& n_grid, std::int64_t reps,
                   const std::string& plot_path) {
    auto rm = resolve_model(mf);
    auto pts = subtilt::rate_sweep(rm.distribution(), rm.free_energy(), x, n_grid, reps, io.seed,
                                   resolve_threads(io.threads));
    if (io.format == "json") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& p : pts) {
            rows.push_back({std::to_string(p.n), fmt_json(p.estimate),
                            fmt_json(p.standard_error), fmt_json(p.empirical_rate),
                            fmt_json(p.theory_rate)});
        }
        write_output(render_table({"n", "estimate", "std_error", "empirical_rate", "theory_rate"},
                                  rows, "json"),
                     io.out);
    } else {
        std::string out = subtilt::rate_sweep_csv_header() + "\n";
        for (const auto& p : pts) out += subtilt::rate_sweep_csv_row(p) + "\n";
        write_output(out, io.out);
    }
    if (!plot_path.empty()) {
        std::ofstream f(plot_path, std::ios::binary);
        if (!f) throw subtilt::DomainError("could not open plot file: " + plot_path);
        f << svg_rate_plot(pts, pts.front().theory_rate);
    }
    return 0;
}

int cmd_diagnostics(const ModelFlags& mf, const IoFlags& io, const EventFlags& ef,
                    std::int64_t reps) {
    auto rm = resolve_model(mf);
    const auto ev = resolve_event(ef);
    const auto& fe = rm.free_energy();
    const auto& dist = rm.distribution();
    auto d = subtilt::big_jump_diagnostics(dist, fe, ev, reps, io.seed,
                                           resolve_threads(io.threads));
    const double nx = static_cast<double>(ev.n) * ev.x;
    const double eta_n = subtilt::optimal_tilt(fe, ev.n, ev.x);
    const double z_scaled = std::pow(nx, fe.alpha());
    // Tightest exponential-moment tail bound: inf_eta exp(-eta z^a + lambda(eta)).
    const double chernoff = std::exp(-subtilt::legendre(fe, z_scaled).value);
    const double tail_closed = dist.has_closed_tail() ? dist.tail(nx) : kNaN;

    std::string s = "{\n";
    s += "  \"n\": " + std::to_string(ev.n) + ",\n";
    s += "  \"x\": " + fmt_json(ev.x) + ",\n";
    s += "  \"tilt_eta\": " + fmt_json(eta_n) + ",\n";
    s += "  \"a1\": " + fmt_json(d.a1) + ",\n";
    s += std::string("  \"a1_closed_form\": ") + (d.a1_closed_form ? "true" : "false") + ",\n";
    s += "  \"a2\": " + fmt_json(d.a2) + ",\n";
    s += "  \"conditional_max_fraction\": " + fmt_json(d.conditional_max_fraction) + ",\n";
    s += "  \"single_tail_bound\": " + fmt_json(chernoff) + ",\n";
    s += "  \"single_tail_closed\": " + fmt_json(tail_closed) + "\n";
    s += "}\n";
    write_output(s, io.out);
    return 0;
}

int cmd_bench(const ModelFlags& mf, const IoFlags& io, const EventFlags& ef, std::int64_t reps) {
    auto rm = resolve_model(mf);
    const auto ev = resolve_event(ef);
    auto run_timed = [&](const std::string& method) {
        const auto t0 = std::chrono::steady_clock::now();
        auto rs = run_methods(rm, ev, method, reps, io, kNaN);
        const auto t1 = std::chrono::steady_clock::now();
        std::fprintf(stderr, "%s: %.3f s\n", method.c_str(),
                     std::chrono::duration<double>(t1 - t0).count());
        return rs.front();
    };
    std::vector<subtilt::EstimatorResult> results{run_timed("naive"), run_timed("esscher"),
                                                  run_timed("shift")};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results) {
        const double rel = r.estimate > 0.0 ? r.standard_error / r.estimate
                                            : std::numeric_limits<double>::infinity();
        rows.push_back({io.format == "json"
                            ? std::string("\"") + method_label(r.method) + "\""
                            : std::string(method_label(r.method)),
                        fmt_json(r.estimate), fmt_json(r.standard_error),
                        fmt_json(r.effective_sample_size), fmt_json(rel)});
    }
    write_output(render_table({"method", "estimate", "std_error", "ess", "rel_se"}, rows,
                              io.format),
                 io.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rare-event toolkit for heavy-tailed i.i.d. sums: scaled free energies,\n"
                 "smoothness checks, tilted samplers, and importance-sampling estimators."};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file");
    app.allow_config_extras(CLI::config_extras_mode::error);

    ModelFlags mf;
    IoFlags io;
    EventFlags ef;
    std::string method = "esscher";
    std::string eta_grid, m_grid, plot_path;
    std::vector<std::int64_t> n_grid;
    std::int64_t reps = 100000;
    double eta_override = kNaN;
    std::string kernel;

    auto add_model_flags = [&](CLI::App* cmd, bool sampled_only) {
        auto models = sampled_only
                          ? std::vector<std::string>{"exp-power", "gauss-power", "sym-gamma"}
                          : std::vector<std::string>{"exp-power", "gauss-power", "sym-gamma",
                                                     "bounded-fixture"};
        cmd->add_option("--model", mf.model, "Model family")
            ->required()
            ->check(CLI::IsMember(models));
        cmd->add_option("--p", mf.p, "Power exponent (default: 2 exp, 4 gauss, 2 sym-gamma)");
        cmd->add_option("--alpha", mf.alpha,
                        "Tail scale exponent; fixed to 1/p (exp) resp. 2/p (gauss)");
        cmd->add_option("--gamma-shape", mf.gamma_shape, "Shape of the symmetrized Gamma root")->capture_default_str();
    };
    auto add_io_flags = [&](CLI::App* cmd) {
        cmd->add_option("--out", io.out, "Output file (default: stdout)");
        cmd->add_option("--format", io.format, "Output format")->capture_default_str()
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--seed", io.seed, "Random seed; same seed, same bytes")->capture_default_str();
        cmd->add_option("--threads", io.threads,
                        "Worker threads (default: machine parallelism)");
        cmd->add_option("--kernel", kernel, "Force a compute backend")
            ->check(CLI::IsMember({"scalar", "avx2"}));
    };
    auto add_event_flags = [&](CLI::App* cmd) {
        cmd->add_option("--n", ef.n, "Number of summands")->capture_default_str();
        cmd->add_option("--x", ef.x, "Event threshold for the empirical mean")->capture_default_str();
        cmd->add_option("--shape", ef.shape, "Event shape")->capture_default_str()
            ->check(CLI::IsMember({"tail", "ball"}));
        cmd->add_option("--delta", ef.delta, "Ball half-width");
        cmd->add_option("--reps", reps, "Monte Carlo replications")->capture_default_str();
    };

    auto* c_fe = app.add_subcommand("free-energy",
                                    "Tabulate eta, lambda, lambda', lambda'', V over a grid")
                        ->configurable()
                        ->fallthrough();
    add_model_flags(c_fe, false);
    add_io_flags(c_fe);
    c_fe->add_option("--eta-grid", eta_grid, "Grid as lo:hi:count (default: domain sweep)");

    auto* c_check = app.add_subcommand("check",
                                       "Verify smoothness/steepness assumptions; JSON report")
                        ->configurable()
                        ->fallthrough();
    add_model_flags(c_check, false);
    add_io_flags(c_check);

    auto* c_leg = app.add_subcommand("legendre",
                                     "Tabulate the convex conjugate J and its curvature")
                        ->configurable()
                        ->fallthrough();
    add_model_flags(c_leg, false);
    add_io_flags(c_leg);
    c_leg->add_option("--m-grid", m_grid, "Slope grid as lo:hi:count")->capture_default_str();

    auto* c_est = app.add_subcommand("estimate", "Estimate a rare-event probability")
                        ->configurable()
                        ->fallthrough();
    add_model_flags(c_est, true);
    add_io_flags(c_est);
    add_event_flags(c_est);
    c_est->add_option("--method", method, "Estimator(s) to run")->capture_default_str()
        ->check(CLI::IsMember({"naive", "esscher", "shift", "all"}));
    c_est->add_option("--eta", eta_override, "Fix the Esscher tilt instead of solving for it");

    auto* c_sweep = app.add_subcommand("rate-sweep",
                                       "Empirical decay rate along an n grid vs xi * x^alpha")
                        ->configurable()
                        ->fallthrough();
    add_model_flags(c_sweep, true);
    add_io_flags(c_sweep);
    c_sweep->add_option("--x", ef.x, "Event threshold for the empirical mean")->capture_default_str();
    c_sweep->add_option("--n-grid", n_grid, "Increasing list of n values")
        ->required()
        ->delimiter(',');
    c_sweep->add_option("--reps", reps, "Replications per grid point")->capture_default_str();
    c_sweep->add_option("--plot", plot_path, "Also write a self-contained SVG chart here");

    auto* c_diag = app.add_subcommand("diagnostics",
                                      "Big-jump decomposition and tail bounds for one event")
                        ->configurable()
                        ->fallthrough();
    add_model_flags(c_diag, true);
    add_io_flags(c_diag);
    add_event_flags(c_diag);

    auto* c_bench = app.add_subcommand("bench",
                                       "Run naive, esscher, and shift on one event and compare")
                        ->configurable()
                        ->fallthrough();
    add_model_flags(c_bench, true);
    add_io_flags(c_bench);
    add_event_flags(c_bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!kernel.empty()) {
            const auto backend = kernel == "avx2" ? subtilt::kernels::Backend::avx2
                                                  : subtilt::kernels::Backend::scalar;
            if (!subtilt::kernels::set_backend(backend)) {
                throw subtilt::DomainError("kernel backend not available on this machine: " +
                                           kernel);
            }
        }
        if (c_fe->parsed()) return cmd_free_energy(mf, io, eta_grid);
        if (c_check->parsed()) return cmd_check(mf, io);
        if (c_leg->parsed()) return cmd_legendre(mf, io, m_grid);
        if (c_est->parsed()) return cmd_estimate(mf, io, ef, method, reps, eta_override);
        if (c_sweep->parsed()) return cmd_rate_sweep(mf, io, ef.x, n_grid, reps, plot_path);
        if (c_diag->parsed()) return cmd_diagnostics(mf, io, ef, reps);
        if (c_bench->parsed()) return cmd_bench(mf, io, ef, reps);
        return 2;
    } catch (const subtilt::DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const subtilt::Unsupported& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const subtilt::Error& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 4;
    }
}
