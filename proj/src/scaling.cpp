#include "subtilt/scaling.hpp"

#include "subtilt/errors.hpp"
#include "subtilt/kernels.hpp"

namespace subtilt {

double signed_power_value(double x, double p) {
    double out;
    kernels::signed_power(&x, p, &out, 1);
    return out;
}

ScalingExponent::ScalingExponent(double alpha) : alpha_(alpha), inv_alpha_(1.0 / alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("scaling exponent must lie strictly inside (0, 1)");
    }
}

void ScalingExponent::phi(const double* x, double* out, std::size_t n) const {
    kernels::signed_power(x, alpha_, out, n);
}

void ScalingExponent::phi_inverse(const double* y, double* out, std::size_t n) const {
    kernels::signed_power(y, inv_alpha_, out, n);
}

}  // namespace subtilt
