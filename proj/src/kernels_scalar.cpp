#include "kernels_impl.hpp"

#include <cmath>

namespace subtilt::kernels::detail {
namespace {

void fill_uniform_scalar(std::uint64_t key, std::uint64_t counter0, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = uniform_at(key, counter0 + i);
}

void vexp_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = exp_core(x[i]);
}

void vlog_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = log_core(x[i]);
}

void signed_power_scalar(const double* x, double p, double* out, std::size_t n) {
    switch (classify_power(p)) {
        case PowKind::copy:
            for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
            break;
        case PowKind::sqrt_k:
            for (std::size_t i = 0; i < n; ++i) out[i] = spow_sqrt(x[i]);
            break;
        case PowKind::fourth_root:
            for (std::size_t i = 0; i < n; ++i) out[i] = spow_fourth_root(x[i]);
            break;
        case PowKind::square:
            for (std::size_t i = 0; i < n; ++i) out[i] = spow_square(x[i]);
            break;
        case PowKind::cube:
            for (std::size_t i = 0; i < n; ++i) out[i] = spow_cube(x[i]);
            break;
        case PowKind::fourth:
            for (std::size_t i = 0; i < n; ++i) out[i] = spow_fourth(x[i]);
            break;
        case PowKind::general:
            for (std::size_t i = 0; i < n; ++i) out[i] = spow_general(x[i], p);
            break;
    }
}

void affine_scalar(const double* x, double a, double b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(a, x[i], b);
}

void accumulate_scalar(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + x[i];
}

void accumulate_max_scalar(double* acc, const double* x, std::size_t n) {
    // (acc > x) ? acc : x -- matches the AVX2 max instruction's NaN behavior.
    for (std::size_t i = 0; i < n; ++i) acc[i] = (acc[i] > x[i]) ? acc[i] : x[i];
}

void normal_quantile_scalar(const double* u, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = normal_quantile_core(u[i]);
}

void two_piece_exp_quantile_scalar(const double* u, double w_neg, double rate_neg,
                                   double rate_pos, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = two_piece_exp_quantile_core(u[i], w_neg, rate_neg, rate_pos);
}

void two_piece_gauss_quantile_scalar(const double* u, double w_neg, double sigma_neg,
                                     double sigma_pos, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = two_piece_gauss_quantile_core(u[i], w_neg, sigma_neg, sigma_pos);
}

double sum_scalar(const double* x, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        lane[0] = lane[0] + x[i];
        lane[1] = lane[1] + x[i + 1];
        lane[2] = lane[2] + x[i + 2];
        lane[3] = lane[3] + x[i + 3];
    }
    for (std::size_t j = 0; n4 + j < n; ++j) lane[j] = lane[j] + x[n4 + j];
    return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

MaskedMoments interval_weighted_moments_scalar(const double* s, const double* w, double lo,
                                               double hi, std::size_t n) {
    double sw[4] = {0.0, 0.0, 0.0, 0.0};
    double sw2[4] = {0.0, 0.0, 0.0, 0.0};
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i & 3;
        bool m = (s[i] >= lo) && (s[i] <= hi);
        double q = m ? (w ? w[i] : 1.0) : 0.0;
        sw[j] = sw[j] + q;
        sw2[j] = std::fma(q, q, sw2[j]);
        count += m ? 1u : 0u;
    }
    MaskedMoments r;
    r.sum_w = (sw[0] + sw[2]) + (sw[1] + sw[3]);
    r.sum_w2 = (sw2[0] + sw2[2]) + (sw2[1] + sw2[3]);
    r.count = count;
    return r;
}

MaskedMoments dual_interval_weighted_moments_scalar(const double* s, const double* g,
                                                    const double* w, double lo, double hi,
                                                    double g_lo, double g_hi, std::size_t n) {
    double sw[4] = {0.0, 0.0, 0.0, 0.0};
    double sw2[4] = {0.0, 0.0, 0.0, 0.0};
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i & 3;
        bool m = (s[i] >= lo) && (s[i] <= hi) && (g[i] >= g_lo) && (g[i] <= g_hi);
        double q = m ? (w ? w[i] : 1.0) : 0.0;
        sw[j] = sw[j] + q;
        sw2[j] = std::fma(q, q, sw2[j]);
        count += m ? 1u : 0u;
    }
    MaskedMoments r;
    r.sum_w = (sw[0] + sw[2]) + (sw[1] + sw[3]);
    r.sum_w2 = (sw2[0] + sw2[2]) + (sw2[1] + sw2[3]);
    r.count = count;
    return r;
}

}  // namespace

const Ops scalar_ops = {
    fill_uniform_scalar,
    vexp_scalar,
    vlog_scalar,
    signed_power_scalar,
    affine_scalar,
    accumulate_scalar,
    accumulate_max_scalar,
    normal_quantile_scalar,
    two_piece_exp_quantile_scalar,
    two_piece_gauss_quantile_scalar,
    sum_scalar,
    interval_weighted_moments_scalar,
    dual_interval_weighted_moments_scalar,
};

}  // namespace subtilt::kernels::detail
