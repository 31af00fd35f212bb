#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "subtilt/rng.hpp"

namespace subtilt {

enum class DistKind {
    two_sided_exponential,
    standard_gaussian,
    symmetrized_gamma,
    power_of,
};

// Symmetric laws on the real line closed under the signed power map
// x -> sign(x)|x|^p.  A model is a root law (two-sided exponential, standard
// Gaussian, or symmetrized Gamma) together with a collapsed power exponent:
// applying power_of twice multiplies the exponents, since
// sign-preserving powers compose as |x|^(p*q).
class DistributionModel {
public:
    static DistributionModel two_sided_exponential();
    static DistributionModel standard_gaussian();
    static DistributionModel symmetrized_gamma(double shape);  // shape > 0
    static DistributionModel power_of(const DistributionModel& base, double p);  // p > 0

    DistKind kind() const;               // power_of when the collapsed exponent != 1
    DistKind root_kind() const { return root_; }
    double power() const { return p_; }  // collapsed exponent relative to the root law
    double gamma_shape() const { return shape_; }
    DistributionModel base() const;      // the root law with exponent 1

    double density(double x) const;      // may be +infinity at x = 0 for p > 1
    double log_density(double x) const;

    bool has_closed_tail() const;
    double tail(double z) const;         // P(X >= z) for z >= 0; throws Unsupported otherwise
    double log_tail(double z) const;     // log P(X >= z), stable far past tail underflow

    double abs_moment(double r) const;   // E|X|^r, r >= 0, closed form

    void sample(RandomStream& rng, double* out, std::size_t n) const;
    std::vector<double> sample(RandomStream& rng, std::size_t n) const;

    std::string name() const;

private:
    DistributionModel(DistKind root, double shape, double p) : root_(root), shape_(shape), p_(p) {}

    DistKind root_;
    double shape_;  // Gamma shape; 1.0 for the other roots
    double p_;
};

}  // namespace subtilt
