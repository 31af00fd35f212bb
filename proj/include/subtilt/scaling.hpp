#pragma once

#include <cstddef>

namespace subtilt {

// sign(x) * |x|^p with sign(0) = 0; single-value form of kernels::signed_power.
double signed_power_value(double x, double p);

// The odd scaling map phi(x) = sign(x) * |x|^alpha with alpha in (0, 1), which
// compresses stretched-exponential tails to exponential scale, plus its inverse.
class ScalingExponent {
public:
    explicit ScalingExponent(double alpha);  // throws DomainError unless 0 < alpha < 1

    double value() const { return alpha_; }
    double inverse_value() const { return inv_alpha_; }

    double phi(double x) const { return signed_power_value(x, alpha_); }
    double phi_inverse(double y) const { return signed_power_value(y, inv_alpha_); }

    void phi(const double* x, double* out, std::size_t n) const;
    void phi_inverse(const double* y, double* out, std::size_t n) const;

private:
    double alpha_;
    double inv_alpha_;
};

}  // namespace subtilt
