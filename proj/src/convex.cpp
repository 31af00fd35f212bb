#include "subtilt/convex.hpp"

#include <cmath>

#include "subtilt/errors.hpp"
#include "subtilt/scaling.hpp"

namespace subtilt {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kResidualRelTol = 1e-12;

// Finds eta_hi < xi with lambda'(eta_hi) >= m and a matching lower bound, by
// walking geometrically toward the domain edge (or doubling when unbounded).
struct Bracket {
    double lo;
    double hi;
};

Bracket bracket_slope(const FreeEnergyModel& fe, double m) {
    double lo = 0.0;
    if (fe.xi_is_infinite()) {
        for (double hi = 1.0; hi <= 1.2e18; hi *= 2.0) {
            if (fe.lambda_prime(hi) >= m) return {lo, hi};
            lo = hi;
        }
    } else {
        const double xi = fe.xi();
        for (int k = 1; k <= 52; ++k) {
            const double hi = xi * (1.0 - std::ldexp(1.0, -k));
            if (!(hi < xi) || hi <= lo) break;
            if (fe.lambda_prime(hi) >= m) return {lo, hi};
            lo = hi;
        }
    }
    throw ConvergenceFailure("slope target is not attained inside the domain");
}

}  // namespace

double inverse_lambda_prime(const FreeEnergyModel& fe, double m) {
    if (!std::isfinite(m)) {
        throw DomainError("slope target must be finite");
    }
    if (m == 0.0) return 0.0;
    const double mm = std::fabs(m);
    const double sign = m > 0.0 ? 1.0 : -1.0;

    Bracket br = bracket_slope(fe, mm);
    double lo = br.lo, hi = br.hi;
    for (int it = 0; it < kMaxIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return sign * mid;  // bracket is one ulp wide
        const double slope = fe.lambda_prime(mid);
        if (std::fabs(slope - mm) <= kResidualRelTol * mm) {
            return sign * mid;
        }
        if (slope < mm) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw ConvergenceFailure("slope inversion did not reach the residual tolerance");
}

LegendrePoint legendre(const FreeEnergyModel& fe, double x) {
    if (x == 0.0) return {0.0, 0.0, 0.0};
    const double eta = inverse_lambda_prime(fe, x);
    double value = eta * x - fe.lambda(eta);
    if (value < 0.0 && value > -1e-9) value = 0.0;  // shed roundoff at tiny |x|
    return {x, value, eta};
}

double legendre_second(const FreeEnergyModel& fe, double b) {
    const double eta = inverse_lambda_prime(fe, b);
    return 1.0 / fe.lambda_second(eta);
}

SlopeReport asymptotic_slope(const FreeEnergyModel& fe, const std::vector<double>& m_grid) {
    if (m_grid.empty()) {
        throw DomainError("slope grid must be nonempty");
    }
    SlopeReport rep;
    rep.m = m_grid;
    rep.ratio.reserve(m_grid.size());
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        const double m = m_grid[i];
        if (!(m > 0.0) || (i > 0 && m <= m_grid[i - 1])) {
            throw DomainError("slope grid must be positive and strictly increasing");
        }
        rep.ratio.push_back(legendre(fe, m).value / m);
    }
    rep.non_decreasing = true;
    for (std::size_t i = 1; i < rep.ratio.size(); ++i) {
        if (rep.ratio[i] < rep.ratio[i - 1] - 1e-12) {
            rep.non_decreasing = false;
            break;
        }
    }
    rep.limit_estimate = rep.ratio.back();
    return rep;
}

RateFunction::RateFunction(double xi, double alpha) : xi_(xi), alpha_(alpha) {
    if (!(xi > 0.0) || !std::isfinite(xi)) {
        throw DomainError("rate coefficient xi must be positive and finite");
    }
    (void)ScalingExponent(alpha);
}

double RateFunction::operator()(double x) const {
    return xi_ * std::pow(std::fabs(x), alpha_);
}

}  // namespace subtilt
