#pragma once

#include <vector>

#include "subtilt/free_energy.hpp"

namespace subtilt {

struct LegendrePoint {
    double x = 0.0;
    double value = 0.0;      // J(x) = sup_eta (eta x - lambda(eta)), always >= 0
    double maximizer = 0.0;  // the optimal tilt eta*(x)
};

// Solves lambda'(eta) = m for eta.  Stops at a 1e-12 relative residual, or
// once the bracket collapses to one ulp of eta — near the domain edge the
// curvature can push the slope past that residual between adjacent doubles.
// Odd in m; throws ConvergenceFailure when m is outside the closure of
// lambda's slope range (e.g. bounded-derivative fixtures).
double inverse_lambda_prime(const FreeEnergyModel& fe, double m);

LegendrePoint legendre(const FreeEnergyModel& fe, double x);

// Curvature of the convex conjugate: J''(b) = 1 / lambda''(eta*(b)).
double legendre_second(const FreeEnergyModel& fe, double b);

struct SlopeReport {
    std::vector<double> m;
    std::vector<double> ratio;  // J(m)/m along the grid
    bool non_decreasing = false;
    double limit_estimate = 0.0;  // ratio at the largest grid point
};

// Tracks J(m)/m along an increasing positive grid; the limit is the
// coefficient of the |x|^alpha rate at leading order.
SlopeReport asymptotic_slope(const FreeEnergyModel& fe, const std::vector<double>& m_grid);

// The explicit rate x -> xi * |x|^alpha.
class RateFunction {
public:
    RateFunction(double xi, double alpha);
    double operator()(double x) const;
    double xi() const { return xi_; }
    double alpha() const { return alpha_; }

private:
    double xi_;
    double alpha_;
};

}  // namespace subtilt
