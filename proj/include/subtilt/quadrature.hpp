#pragma once

#include <functional>
#include <vector>

namespace subtilt {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    int max_segments = 5000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    int segments = 0;
};

// Adaptive 7/15-point Gauss-Kronrod integration of f over the finite interval
// [a, b].  Endpoints are never evaluated, so integrable endpoint singularities
// are handled by subdivision.  Throws QuadratureFailure when the segment budget
// is exhausted before the tolerance max(abs_tol, rel_tol*|value|) is met.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

// Integrates over the union of [pts[0], pts[1]], ..., [pts[k-1], pts[k]], with
// each cell seeded as its own adaptive segment.  pts must be strictly increasing.
QuadratureResult integrate_segments(const std::function<double(double)>& f,
                                    const std::vector<double>& pts,
                                    const QuadratureOptions& opts = {});

// One non-adaptive 7/15 Gauss-Kronrod panel over [a, b]: cheap cell estimates
// for callers that manage their own grids (e.g. CDF tabulation).
QuadratureResult integrate_panel(const std::function<double(double)>& f, double a, double b);

}  // namespace subtilt
