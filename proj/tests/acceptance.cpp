// Acceptance gate for the toolkit: twelve end-to-end criteria, one line each,
// with the measured numbers and the pinned tolerance printed next to the
// verdict.  Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "subtilt/assumption.hpp"
#include "subtilt/convex.hpp"
#include "subtilt/distributions.hpp"
#include "subtilt/errors.hpp"
#include "subtilt/estimators.hpp"
#include "subtilt/free_energy.hpp"
#include "subtilt/rng.hpp"
#include "subtilt/scaling.hpp"
#include "subtilt/tilted.hpp"

using namespace subtilt;

namespace {

int failures = 0;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

void run(int idx, const char* name, const std::function<bool(std::string&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
    std::printf("[%2d] %s  %s — %s (%.1f s)\n", idx, ok ? "PASS" : "FAIL", name, detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!ok) ++failures;
}

int worker_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 16u));
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    }
    return g;
}

double ks_statistic(std::vector<double>& draws, const std::function<double(double)>& cdf) {
    std::sort(draws.begin(), draws.end());
    const double inv_n = 1.0 / static_cast<double>(draws.size());
    double d = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double f = cdf(draws[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) * inv_n,
                                 static_cast<double>(i + 1) * inv_n - f));
    }
    return d;
}

std::string rate_list(const std::vector<RateSweepPoint>& pts) {
    std::string s = "{";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        s += num(pts[i].empirical_rate);
        if (i + 1 < pts.size()) s += ", ";
    }
    return s + "}";
}

// Distance to the target rate must shrink along the grid.
bool approaches(const std::vector<RateSweepPoint>& pts, double theory) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (std::fabs(pts[i + 1].empirical_rate - theory) >
            std::fabs(pts[i].empirical_rate - theory)) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main() {
    const int threads = worker_threads();
    std::printf("acceptance suite: 12 criteria, %d worker threads\n\n", threads);

    run(1, "generic free energy reproduces the exponential-power closed form", [](std::string& d) {
        const auto dist = DistributionModel::power_of(
            DistributionModel::two_sided_exponential(), 2.0);
        const auto fe = numeric_model(dist, 0.5);
        double worst = 0.0;
        for (double eta : uniform_grid(-0.99, 0.99, 64)) {
            worst = std::max(worst, std::fabs(fe.lambda(eta) - (-std::log1p(-eta * eta))));
        }
        d = "max |lambda - closed| = " + num(worst) + " on 64 points of (-0.99, 0.99), tol 1e-6";
        return worst <= 1e-6;
    });

    run(2, "generic free energy reproduces the gaussian-power closed form", [](std::string& d) {
        const auto dist = DistributionModel::power_of(DistributionModel::standard_gaussian(), 4.0);
        const auto fe = numeric_model(dist, 0.5);
        double worst = 0.0;
        for (double eta : uniform_grid(-0.49, 0.49, 64)) {
            const double closed = std::log(std::pow(1.0 + 2.0 * eta, -0.5) +
                                           std::pow(1.0 - 2.0 * eta, -0.5)) -
                                  std::log(2.0);
            worst = std::max(worst, std::fabs(fe.lambda(eta) - closed));
        }
        d = "max |lambda - closed| = " + num(worst) + " on 64 points of (-0.49, 0.49), tol 1e-6";
        return worst <= 1e-6;
    });

    run(3, "relative variance approaches its boundary limits", [](std::string& d) {
        const double ve = exp_power_model(2.0).relative_variance(0.999);
        const double vg = gauss_power_model(4.0).relative_variance(0.4999);
        d = "V_exp(0.999) = " + num(ve) + " in [1, 1.01]; V_gauss(0.4999) = " + num(vg) +
            " in [2, 2.05]";
        return ve >= 1.0 && ve <= 1.01 && vg >= 2.0 && vg <= 2.05;
    });

    run(4, "assumption checks pass the examples and flag the bounded fixture",
        [](std::string& d) {
            const auto re = check_assumption(exp_power_model(2.0));
            const auto rg = check_assumption(gauss_power_model(4.0));
            const auto rb = check_assumption(truncated_quadratic_model(1.0, 1.0));
            d = std::string("exp all_ok=") + (re.all_ok() ? "true" : "false") +
                ", gauss all_ok=" + (rg.all_ok() ? "true" : "false") +
                ", fixture steepness_ok=" + (rb.steepness_ok ? "true" : "false");
            return re.all_ok() && rg.all_ok() && !rb.steepness_ok;
        });

    run(5, "conjugate identities hold on both closed-form models", [](std::string& d) {
        struct Case {
            FreeEnergyModel fe;
            double edge;
            double xi;
            double slope_tol;
        };
        const Case cases[] = {{exp_power_model(2.0), 0.95, 1.0, 1e-3},
                              {gauss_power_model(4.0), 0.475, 0.5, 2e-3}};
        double worst_round = 0.0, worst_curv = 0.0, worst_slope = 0.0;
        for (const auto& c : cases) {
            for (double eta : uniform_grid(-c.edge, c.edge, 33)) {
                const double m = c.fe.lambda_prime(eta);
                worst_round = std::max(worst_round,
                                       std::fabs(inverse_lambda_prime(c.fe, m) - eta));
                worst_curv = std::max(
                    worst_curv,
                    std::fabs(legendre_second(c.fe, m) * c.fe.lambda_second(eta) - 1.0));
            }
            std::vector<double> m_grid;
            for (int i = 0; i <= 32; ++i) m_grid.push_back(std::pow(10.0, 4.0 * i / 32.0));
            const auto slope = asymptotic_slope(c.fe, m_grid);
            worst_slope = std::max(worst_slope,
                                   std::fabs(slope.limit_estimate - c.xi) / c.slope_tol);
        }
        d = "roundtrip " + num(worst_round) + " (tol 1e-10), J''*lambda'' off by " +
            num(worst_curv) + " (tol 1e-8), slope at 1e4 at " + num(worst_slope) +
            " of its band";
        return worst_round <= 1e-10 && worst_curv <= 1e-8 && worst_slope <= 1.0;
    });

    run(6, "exact tilted samplers match their analytic laws", [](std::string& d) {
        const std::size_t n = 1000000;

        const double eta_e = 0.6;
        const auto fe_e = exp_power_model(2.0);
        TiltedLaw law_e(fe_e, eta_e);
        if (!law_e.exact_sampler()) {
            d = "exponential tilt fell back to the generic sampler";
            return false;
        }
        RandomStream rs_e = RandomStream::derive(2026, stream_tag::sample, 0);
        std::vector<double> t(n);
        law_e.sample(rs_e, t.data(), n);
        for (double& v : t) v = signed_power_value(v, 0.5);
        const double ks_e = ks_statistic(t, [&](double y) {
            // two-piece exponential: density (1/2) exp(eta*y - |y| - lambda)
            if (y < 0.0) return 0.5 * (1.0 - eta_e) * std::exp((1.0 + eta_e) * y);
            return 0.5 * (1.0 - eta_e) +
                   0.5 * (1.0 + eta_e) * (1.0 - std::exp(-(1.0 - eta_e) * y));
        });
        double mean_e = 0.0, var_e = 0.0;
        for (double v : t) mean_e += v;
        mean_e /= static_cast<double>(n);
        for (double v : t) var_e += (v - mean_e) * (v - mean_e);
        const double se_e = std::sqrt(var_e / static_cast<double>(n)) /
                            std::sqrt(static_cast<double>(n));
        const double dev_e = std::fabs(mean_e - fe_e.lambda_prime(eta_e)) / se_e;

        const double eta_g = 0.3;
        const auto fe_g = gauss_power_model(4.0);
        TiltedLaw law_g(fe_g, eta_g);
        if (!law_g.exact_sampler()) {
            d = "gaussian tilt fell back to the generic sampler";
            return false;
        }
        RandomStream rs_g = RandomStream::derive(2026, stream_tag::sample, 1);
        std::vector<double> g(n);
        law_g.sample(rs_g, g.data(), n);
        for (double& v : g) v = signed_power_value(v, 0.5);
        const double cm = 0.5 - eta_g, cp = 0.5 + eta_g;
        const double z = std::exp(fe_g.lambda(eta_g));
        const double neg_mass = 1.0 / (2.0 * std::sqrt(2.0 * cp) * z);
        const double ks_g = ks_statistic(g, [&](double y) {
            // signed square of a gaussian reweighted by exp(eta*y)
            if (y < 0.0) return neg_mass * (1.0 - std::erf(std::sqrt(cp * -y)));
            return neg_mass + std::erf(std::sqrt(cm * y)) / (2.0 * std::sqrt(2.0 * cm) * z);
        });
        double mean_g = 0.0, var_g = 0.0;
        for (double v : g) mean_g += v;
        mean_g /= static_cast<double>(n);
        for (double v : g) var_g += (v - mean_g) * (v - mean_g);
        const double se_g = std::sqrt(var_g / static_cast<double>(n)) /
                            std::sqrt(static_cast<double>(n));
        const double dev_g = std::fabs(mean_g - fe_g.lambda_prime(eta_g)) / se_g;

        d = "KS = " + num(ks_e) + " / " + num(ks_g) + " on 1e6 draws (tol 0.002); mean off by " +
            num(dev_e) + " / " + num(dev_g) + " SEs (tol 4)";
        return ks_e <= 0.002 && ks_g <= 0.002 && dev_e <= 4.0 && dev_g <= 4.0;
    });

    run(7, "the three estimators agree on a moderate rare event", [&](std::string& d) {
        const auto dist = DistributionModel::power_of(
            DistributionModel::two_sided_exponential(), 2.0);
        const auto fe = exp_power_model(2.0);
        EventSpec ev;
        ev.n = 5;
        ev.x = 3.0;
        const auto rn = naive_mc(dist, ev, 10000000, 301, fe.alpha(), threads);
        EsscherOptions opts;
        opts.threads = threads;
        const auto re = esscher_is(dist, fe, ev, 100000, 302, opts);
        const auto rs = shift_is(dist, ev, 1000000, 303, fe.alpha(), threads);
        const EstimatorResult* r[3] = {&rn, &re, &rs};
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const double gap = std::fabs(r[i]->estimate - r[j]->estimate);
                const double se = std::sqrt(r[i]->standard_error * r[i]->standard_error +
                                            r[j]->standard_error * r[j]->standard_error);
                worst = std::max(worst, gap / se);
            }
        }
        d = "naive " + num(rn.estimate) + ", esscher " + num(re.estimate) + ", shift " +
            num(rs.estimate) + "; worst pairwise gap " + num(worst) +
            " combined SEs (tol 3)";
        return worst <= 3.0;
    });

    run(8, "empirical decay rates reach the predicted tail exponent", [&](std::string& d) {
        const std::vector<std::int64_t> grid = {10, 50, 100, 500};
        const auto de = DistributionModel::power_of(
            DistributionModel::two_sided_exponential(), 2.0);
        const auto pe = rate_sweep(de, exp_power_model(2.0), 1.0, grid, 100000, 311, threads);
        const auto dg = DistributionModel::power_of(DistributionModel::standard_gaussian(), 4.0);
        const auto pg = rate_sweep(dg, gauss_power_model(4.0), 1.0, grid, 100000, 312, threads);
        const bool exp_ok = approaches(pe, 1.0) &&
                            std::fabs(pe.back().empirical_rate - 1.0) <= 0.25;
        const bool gauss_ok = approaches(pg, 0.5) &&
                              std::fabs(pg.back().empirical_rate - 0.5) <= 0.125;
        d = "x = 1, n in {10,50,100,500}: exp rates " + rate_list(pe) +
            " vs 1, gauss rates " + rate_list(pg) +
            " vs 0.5 (monotone approach + final within 25%)";
        return exp_ok && gauss_ok;
    });

    run(9, "moment bounds dominate exact tails and simulated deviations", [](std::string& d) {
        int violations = 0, points = 0;

        const auto fe_e = exp_power_model(2.0);
        const auto dist_e = DistributionModel::power_of(
            DistributionModel::two_sided_exponential(), 2.0);
        for (double eta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            for (double z : {1.0, 2.0, 4.0, 16.0, 64.0, 256.0, 400.0}) {
                ++points;
                if (subexp_tchebychev_bound(fe_e, eta, z) < dist_e.tail(z)) ++violations;
            }
        }
        const auto fe_g = gauss_power_model(4.0);
        const auto dist_g = DistributionModel::power_of(
            DistributionModel::standard_gaussian(), 4.0);
        for (double eta : {0.05, 0.15, 0.25, 0.35, 0.45}) {
            for (double z : {1.0, 4.0, 16.0, 256.0, 4096.0}) {
                ++points;
                if (subexp_tchebychev_bound(fe_g, eta, z) < dist_g.tail(z)) ++violations;
            }
        }

        struct McCase {
            FreeEnergyModel fe;
            double eta;
            double k;
            std::size_t draws;
            std::vector<double> deviations;
        };
        McCase mc[] = {{exp_power_model(2.0), 0.5, 0.2, 1000000, {1.0, 2.0, 5.0}},
                       {gauss_power_model(4.0), 0.2, 0.15, 200000, {1.0, 3.0}}};
        int mc_index = 0;
        for (auto& c : mc) {
            TiltedLaw law(c.fe, c.eta);
            RandomStream rs = RandomStream::derive(321, stream_tag::bound_check, mc_index++);
            std::vector<double> ys(c.draws);
            law.sample(rs, ys.data(), ys.size());
            const double mean = c.fe.lambda_prime(c.eta);
            for (double a : c.deviations) {
                ++points;
                double freq = 0.0;
                for (double y : ys) {
                    if (std::fabs(signed_power_value(y, 0.5) - mean) > a) freq += 1.0;
                }
                freq /= static_cast<double>(c.draws);
                if (freq > symmetrized_tchebychev_bound(c.fe, c.eta, c.k, a)) ++violations;
            }
        }
        d = std::to_string(violations) + " violations on " + std::to_string(points) +
            " grid points (tol: zero)";
        return violations == 0;
    });

    run(10, "the tail integration-by-parts identity closes", [](std::string& d) {
        const IbpIdentity checks[] = {
            ibp_identity_check(DistributionModel::two_sided_exponential(), 0.5, -1.0, 2.0),
            ibp_identity_check(DistributionModel::standard_gaussian(), 1.0, -2.0, 2.0),
            ibp_identity_check(
                DistributionModel::power_of(DistributionModel::two_sided_exponential(), 2.0),
                0.3, -1.5, 1.5),
        };
        double worst = 0.0;
        for (const auto& c : checks) worst = std::max(worst, c.abs_diff);
        d = "max |lhs - rhs| = " + num(worst) + " over 3 fixtures, tol 1e-6";
        return worst <= 1e-6;
    });

    run(11, "one big jump carries the deep deviation", [&](std::string& d) {
        const auto dist = DistributionModel::power_of(
            DistributionModel::two_sided_exponential(), 2.0);
        const auto fe = exp_power_model(2.0);
        EventSpec ev;
        ev.n = 100;
        ev.x = 1.0;
        const auto diag = big_jump_diagnostics(dist, fe, ev, 200000, 401, threads);
        const double a1_ref = -std::expm1(100.0 * std::log1p(-std::exp(-10.0) / 2.0));
        const double a1_gap = std::fabs(diag.a1 - a1_ref);
        d = "n=100, x=1: |A1 - closed| = " + num(a1_gap) +
            " (tol 1e-5, closed: " + (diag.a1_closed_form ? "yes" : "no") +
            "), conditional max fraction = " + num(diag.conditional_max_fraction) +
            " (tol >= 0.5)";
        return diag.a1_closed_form && a1_gap <= 1e-5 && diag.conditional_max_fraction >= 0.5;
    });

    run(12, "identical seeds give bit-identical rows across thread counts", [](std::string& d) {
        const auto dist = DistributionModel::power_of(
            DistributionModel::two_sided_exponential(), 2.0);
        const auto fe = exp_power_model(2.0);
        EventSpec ev;
        ev.n = 20;
        ev.x = 2.0;
        bool same = true;
        EsscherOptions e1, e4;
        e1.threads = 1;
        e4.threads = 4;
        same &= estimator_csv_row(esscher_is(dist, fe, ev, 50000, 7, e1)) ==
                estimator_csv_row(esscher_is(dist, fe, ev, 50000, 7, e4));
        same &= estimator_csv_row(naive_mc(dist, ev, 200000, 7, 0.5, 1)) ==
                estimator_csv_row(naive_mc(dist, ev, 200000, 7, 0.5, 4));
        same &= estimator_csv_row(shift_is(dist, ev, 100000, 7, 0.5, 1)) ==
                estimator_csv_row(shift_is(dist, ev, 100000, 7, 0.5, 4));
        const auto s1 = rate_sweep(dist, fe, 2.0, {5, 10}, 50000, 9, 1);
        const auto s4 = rate_sweep(dist, fe, 2.0, {5, 10}, 50000, 9, 4);
        for (std::size_t i = 0; i < s1.size(); ++i) {
            same &= rate_sweep_csv_row(s1[i]) == rate_sweep_csv_row(s4[i]);
        }
        d = same ? std::string("esscher, naive, shift, and sweep rows identical at 1 and 4 "
                               "threads")
                 : std::string("rows differ between 1 and 4 threads");
        return same;
    });

    std::printf("\n%d of 12 criteria passed\n", 12 - failures);
    return failures;
}
