#pragma once

#include <memory>
#include <string>

#include "subtilt/distributions.hpp"

namespace subtilt {

struct NumericFreeEnergyOptions {
    double quad_abs_tol = 1e-12;
    double quad_rel_tol = 1e-11;
    int max_segments = 5000;
    double truncation_cap = 1e8;   // scan gives up past this coordinate
    double tail_floor = 1e-16;     // relative decay declaring the integrand negligible
    double domain_rel_tol = 1e-6;  // bisection resolution for the domain edge
};

// Scaled cumulant generating function of phi_alpha(X): lambda(eta) =
// log E[exp(eta * sign(X)|X|^alpha)], finite exactly on (-xi, xi).  Exposes
// the first two derivatives (tilted mean and tilted variance of phi_alpha(X))
// and the relative variance V = lambda'' / lambda'^2.
class FreeEnergyModel {
public:
    double alpha() const;
    double xi() const;  // +infinity when every tilt is integrable
    bool xi_is_infinite() const;

    double lambda(double eta) const;        // throws DomainError outside the domain
    double lambda_prime(double eta) const;
    double lambda_second(double eta) const;
    double relative_variance(double eta) const;  // throws UndefinedAtZero at eta = 0

    // The sampled law this free energy was built from, or nullptr for
    // synthetic fixtures that only exist as formulas.
    const DistributionModel* distribution() const;
    const std::string& name() const;

    struct Impl;
    explicit FreeEnergyModel(std::shared_ptr<const Impl> impl);

private:
    std::shared_ptr<const Impl> impl_;
};

// X = sign(Y)|Y|^p for a two-sided unit exponential Y, tilted at alpha = 1/p:
// lambda(eta) = -log(1 - eta^2) on (-1, 1).  Requires p > 1.
FreeEnergyModel exp_power_model(double p);

// X = sign(G)|G|^p for a standard Gaussian G, tilted at alpha = 2/p:
// lambda(eta) = log(0.5 * ((1+2eta)^-1/2 + (1-2eta)^-1/2)) on (-1/2, 1/2).
// Requires p > 2.
FreeEnergyModel gauss_power_model(double p);

// Free energy evaluated by adaptive quadrature in the root-law coordinates,
// with the domain edge located numerically from tail-integrability scans.
FreeEnergyModel numeric_model(const DistributionModel& dist, double alpha,
                              const NumericFreeEnergyOptions& opts = {});

// Synthetic fixture with bounded derivative: lambda(eta) = c * eta^2 declared
// on (-xi, xi) only.  Violates steepness at the boundary by construction.
FreeEnergyModel truncated_quadratic_model(double xi, double c, double alpha = 0.5);

}  // namespace subtilt
