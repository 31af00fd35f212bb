#include "subtilt/assumption.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "subtilt/convex.hpp"
#include "subtilt/errors.hpp"

namespace subtilt {

namespace {

void validate_config(const CheckConfig& c) {
    if (c.grid_points < 2) {
        throw DomainError("assumption check: grid needs at least two points");
    }
    if (!(c.boundary_fraction > 0.0) || !(c.start_offset_fraction < 1.0) ||
        !(c.boundary_fraction < c.start_offset_fraction)) {
        throw DomainError(
            "assumption check: need 0 < boundary_fraction < start_offset_fraction < 1");
    }
    if (!(c.steepness_threshold > 0.0) || !(c.slack >= 0.0) || !(c.omega_safety >= 1.0)) {
        throw DomainError("assumption check: threshold must be positive, slack nonnegative, "
                          "safety factor at least 1");
    }
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void append_array(std::string& out, const char* key, const std::vector<double>& v) {
    out += "  \"";
    out += key;
    out += "\": [";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_double(v[i]);
    }
    out += "]";
}

}  // namespace

bool AssumptionReport::all_ok() const {
    return domain_nontrivial_bounded && steepness_ok && xi0_found &&
           lambda_second_nondecreasing && v_nonincreasing;
}

std::string AssumptionReport::to_json() const {
    auto flag = [](bool b) { return b ? "true" : "false"; };
    std::string out = "{\n";
    out += "  \"xi\": " + (xi_infinite ? std::string("\"inf\"") : fmt_double(xi)) + ",\n";
    out += std::string("  \"domain_nontrivial_bounded\": ") + flag(domain_nontrivial_bounded) +
           ",\n";
    out += std::string("  \"steepness_ok\": ") + flag(steepness_ok) + ",\n";
    out += "  \"xi0\": " + (xi0_found ? fmt_double(xi0) : std::string("null")) + ",\n";
    out += "  \"omega\": " + fmt_double(omega) + ",\n";
    out += std::string("  \"omega_unverified\": ") + flag(omega_unverified) + ",\n";
    out += std::string("  \"lambda_second_nondecreasing\": ") + flag(lambda_second_nondecreasing) +
           ",\n";
    out += std::string("  \"V_nonincreasing\": ") + flag(v_nonincreasing) + ",\n";
    out += "  \"verdict_label\": ";
    out += xi_infinite ? "\"tilt domain unbounded; rate degenerate at this scale\""
                       : "\"numerically supported\"";
    out += ",\n";
    append_array(out, "lambda_prime_sequence", lambda_prime_sequence);
    out += ",\n";
    append_array(out, "grid", grid);
    out += "\n}\n";
    return out;
}

AssumptionReport check_assumption(const FreeEnergyModel& fe, const CheckConfig& config) {
    validate_config(config);

    AssumptionReport report;
    report.omega = std::numeric_limits<double>::quiet_NaN();
    if (fe.xi_is_infinite()) {
        report.xi = std::numeric_limits<double>::infinity();
        report.xi_infinite = true;
        return report;
    }
    const double xi = fe.xi();
    if (!(xi > 0.0)) {
        throw DomainError("assumption check: model has a degenerate tilt domain (xi = 0)");
    }
    report.xi = xi;
    report.domain_nontrivial_bounded = true;

    const int n = config.grid_points;
    report.grid.resize(n);
    for (int j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) / (n - 1);
        const double offset = config.start_offset_fraction *
                              std::pow(config.boundary_fraction / config.start_offset_fraction, t);
        report.grid[j] = xi * (1.0 - offset);
    }

    report.lambda_prime_sequence.resize(n);
    std::vector<double> lambda_second(n), variance(n);
    for (int j = 0; j < n; ++j) {
        const double eta = report.grid[j];
        report.lambda_prime_sequence[j] = fe.lambda_prime(eta);
        lambda_second[j] = fe.lambda_second(eta);
        variance[j] = fe.relative_variance(eta);
    }

    // Slack is applied relative to the local magnitude: lambda'' spans many
    // decades on the approach grid, so an absolute tolerance cannot serve
    // both ends of it.
    const double slack = config.slack;
    auto loose = [slack](double v) { return slack * std::max(1.0, std::fabs(v)); };

    bool increasing = true;
    for (int j = 0; j + 1 < n; ++j) {
        if (!(report.lambda_prime_sequence[j + 1] >
              report.lambda_prime_sequence[j] - loose(report.lambda_prime_sequence[j]))) {
            increasing = false;
            break;
        }
    }
    report.steepness_ok =
        increasing && report.lambda_prime_sequence.back() > config.steepness_threshold;

    // Earliest grid index from which each curvature predicate holds pairwise
    // through the end of the grid.
    int from_second = 0, from_variance = 0;
    for (int j = 0; j + 1 < n; ++j) {
        if (!(lambda_second[j + 1] >= lambda_second[j] - loose(lambda_second[j]))) {
            from_second = j + 1;
        }
        if (!(variance[j + 1] <= variance[j] + loose(variance[j]))) {
            from_variance = j + 1;
        }
    }
    report.lambda_second_nondecreasing = from_second <= n - 2;
    report.v_nonincreasing = from_variance <= n - 2;

    const int from = std::max(from_second, from_variance);
    report.xi0_found = from <= n - 2;
    int omega_from = from;
    if (report.xi0_found) {
        report.xi0 = report.grid[from];
        report.omega_unverified = false;
    } else {
        omega_from = n / 2;  // no monotone window: report the sup over the upper half
        report.omega_unverified = true;
    }
    report.omega = config.omega_safety *
                   *std::max_element(variance.begin() + omega_from, variance.end());
    return report;
}

RefinedConditionResult refined_condition(const FreeEnergyModel& fe, double x,
                                         const std::vector<std::int64_t>& n_grid) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("refined condition: x must be positive and finite");
    }
    if (n_grid.empty()) {
        throw DomainError("refined condition: n grid must be nonempty");
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
            throw DomainError("refined condition: n grid must be increasing and >= 1");
        }
    }

    const double alpha = fe.alpha();
    RefinedConditionResult result;
    result.points.reserve(n_grid.size());
    for (std::int64_t n : n_grid) {
        const double slope = std::pow(static_cast<double>(n) * x, alpha);
        const double eta = inverse_lambda_prime(fe, slope);
        const double ratio = fe.relative_variance(eta) / std::pow(static_cast<double>(n), alpha);
        result.points.push_back({n, ratio});
    }
    result.decay_evidence = result.points.back().ratio < 0.5 * result.points.front().ratio;
    return result;
}

}  // namespace subtilt
