#pragma once

#include "subtilt/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

// Internal: scalar reference cores shared by the scalar backend (loops) and the
// AVX2 backend (remainder elements). Every core is written as a fixed IEEE-754
// operation sequence with no implicit contraction (-ffp-contract=off project
// wide); the AVX2 translation unit mirrors the sequences lane-wise so both
// backends produce bit-identical results.

namespace subtilt::kernels::detail {

inline constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

inline constexpr double qnan_bits_d = std::numeric_limits<double>::quiet_NaN();
inline constexpr double pos_inf = std::numeric_limits<double>::infinity();

// --- splitmix64 ------------------------------------------------------------

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform in (0,1): top 52 bits into a [1,2) double, shifted to the open cell
// centers. Exact arithmetic throughout (Sterbenz subtraction, exact shift).
inline double uniform_at(std::uint64_t key, std::uint64_t idx) {
    std::uint64_t z = mix64(key + (idx + 1) * golden);
    double d = std::bit_cast<double>((z >> 12) | 0x3FF0000000000000ull);
    return (d - 1.0) + 0x1p-53;
}

// --- exp -------------------------------------------------------------------
// Cephes-style: k = round(x log2 e), r = x - k ln 2 (split constant), rational
// approximation of e^r, two-step scaling by 2^k. ~1 ulp on the reduced range.

inline constexpr double exp_hi = 709.782712893383996732;
inline constexpr double exp_lo = -745.133219101941108420;
inline constexpr double log2e = 1.4426950408889634073599;
inline constexpr double exp_c1 = 6.93145751953125e-1;
inline constexpr double exp_c2 = 1.42860682030941723212e-6;
inline constexpr double exp_p0 = 1.26177193074810590878e-4;
inline constexpr double exp_p1 = 3.02994407707441961300e-2;
inline constexpr double exp_p2 = 9.99999999999999999910e-1;
inline constexpr double exp_q0 = 3.00198505138664455042e-6;
inline constexpr double exp_q1 = 2.52448340349684104192e-3;
inline constexpr double exp_q2 = 2.27265548208155028766e-1;
inline constexpr double exp_q3 = 2.00000000000000000005e0;

inline double pow2i(int k) {  // 2^k for k in [-1022, 1023]
    return std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
}

inline double exp_core(double x) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x > exp_hi) return pos_inf;
    if (x < exp_lo) return 0.0;
    double k = std::nearbyint(x * log2e);
    double r = x - k * exp_c1;
    r = r - k * exp_c2;
    double rr = r * r;
    double px = ((exp_p0 * rr + exp_p1) * rr + exp_p2) * r;
    double qx = ((exp_q0 * rr + exp_q1) * rr + exp_q2) * rr + exp_q3;
    double e = 1.0 + 2.0 * (px / (qx - px));
    int ki = static_cast<int>(k);
    int ka = ki >> 1;
    int kb = ki - ka;
    e = e * pow2i(ka);
    e = e * pow2i(kb);
    return e;
}

// --- log -------------------------------------------------------------------
// fdlibm scheme: x = 2^e * m with m in [sqrt(2)/2, sqrt(2)), s = (m-1)/(m+1),
// odd polynomial in s^2, split ln 2 recombination. ~1 ulp.

inline constexpr double lg1 = 6.666666666666735130e-01;
inline constexpr double lg2 = 3.999999999940941908e-01;
inline constexpr double lg3 = 2.857142874366239149e-01;
inline constexpr double lg4 = 2.222219843214978396e-01;
inline constexpr double lg5 = 1.818357216161805012e-01;
inline constexpr double lg6 = 1.531383769920937332e-01;
inline constexpr double lg7 = 1.479819860511658591e-01;
inline constexpr double ln2_hi = 6.93147180369123816490e-01;
inline constexpr double ln2_lo = 1.90821492927058770002e-10;
inline constexpr double sqrt2 = 1.4142135623730951;
inline constexpr double dbl_min_normal = 2.2250738585072014e-308;

inline double log_core(double x) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return -pos_inf;
    if (x < 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (x == pos_inf) return pos_inf;
    int e0 = 0;
    if (x < dbl_min_normal) {
        x = x * 0x1p54;
        e0 = -54;
    }
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    int e = static_cast<int>(bits >> 52) - 1023 + e0;
    double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) | 0x3FF0000000000000ull);
    if (m > sqrt2) {
        m = m * 0.5;
        e += 1;
    }
    double f = m - 1.0;
    double s = f / (2.0 + f);
    double z = s * s;
    double w = z * z;
    double t1 = w * (lg2 + w * (lg4 + w * lg6));
    double t2 = z * (lg1 + w * (lg3 + w * (lg5 + w * lg7)));
    double r = t2 + t1;
    double hfsq = 0.5 * f * f;
    double dk = static_cast<double>(e);
    return dk * ln2_hi - ((hfsq - (s * (hfsq + r) + dk * ln2_lo)) - f);
}

// --- normal quantile (AS 241, PPND16) ---------------------------------------
// Coefficients stored highest degree first; evaluated by plain Horner
// (mul/add, no FMA) so the SIMD variant can mirror exactly.

inline constexpr double ppnd_a[8] = {
    2.5090809287301226727e+3, 3.3430575583588128105e+4, 6.7265770927008700853e+4,
    4.5921953931549871457e+4, 1.3731693765509461125e+4, 1.9715909503065514427e+3,
    1.3314166789178437745e+2, 3.3871328727963666080e+0};
inline constexpr double ppnd_b[8] = {
    5.2264952788528545610e+3, 2.8729085735721942674e+4, 3.9307895800092710610e+4,
    2.1213794301586595867e+4, 5.3941960214247511077e+3, 6.8718700749205790830e+2,
    4.2313330701600911252e+1, 1.0};
inline constexpr double ppnd_c[8] = {
    7.74545014278341407640e-4, 2.27238449892691845833e-2, 2.41780725177450611770e-1,
    1.27045825245236838258e+0, 3.64784832476320460504e+0, 5.76949722146069140550e+0,
    4.63033784615654529590e+0, 1.42343711074968357734e+0};
inline constexpr double ppnd_d[8] = {
    1.05075007164441684324e-9, 5.47593808499534494600e-4, 1.51986665636164571966e-2,
    1.48103976427480074590e-1, 6.89767334985100004550e-1, 1.67638483018380384940e+0,
    2.05319162663775882187e+0, 1.0};
inline constexpr double ppnd_e[8] = {
    2.01033439929228813265e-7, 2.71155556874348757815e-5, 1.24266094738807843860e-3,
    2.65321895265761230930e-2, 2.96560571828504891230e-1, 1.78482653991729133580e+0,
    5.46378491116411436990e+0, 6.65790464350110377720e+0};
inline constexpr double ppnd_f[8] = {
    2.04426310338993978564e-15, 1.42151175831644588870e-7, 1.84631831751005468180e-5,
    7.86869131145613259100e-4, 1.48753612908506148525e-2, 1.36929880922735805310e-1,
    5.99832206555887937690e-1, 1.0};

inline double horner8(const double (&c)[8], double r) {
    double v = c[0];
    v = v * r + c[1];
    v = v * r + c[2];
    v = v * r + c[3];
    v = v * r + c[4];
    v = v * r + c[5];
    v = v * r + c[6];
    v = v * r + c[7];
    return v;
}

inline double normal_quantile_core(double u) {
    double q = u - 0.5;
    if (std::fabs(q) <= 0.425) {
        double r = 0.180625 - q * q;
        return q * (horner8(ppnd_a, r) / horner8(ppnd_b, r));
    }
    double r0 = (q < 0.0) ? u : 1.0 - u;
    double r = std::sqrt(-log_core(r0));
    double val;
    if (r <= 5.0) {
        double t = r - 1.6;
        val = horner8(ppnd_c, t) / horner8(ppnd_d, t);
    } else {
        double t = r - 5.0;
        val = horner8(ppnd_e, t) / horner8(ppnd_f, t);
    }
    return (q < 0.0) ? -val : val;
}

// --- piecewise quantile transforms ------------------------------------------

inline double two_piece_exp_quantile_core(double u, double w_neg, double rate_neg,
                                          double rate_pos) {
    double w_pos = 1.0 - w_neg;
    if (u <= w_neg) {
        double l = log_core(u / w_neg);
        return l / rate_neg;
    }
    double l = log_core((1.0 - u) / w_pos);
    return -(l / rate_pos);
}

inline double two_piece_gauss_quantile_core(double u, double w_neg, double sigma_neg,
                                            double sigma_pos) {
    double w_pos = 1.0 - w_neg;
    bool neg = (u <= w_neg);
    double t = neg ? (u / (2.0 * w_neg)) : (0.5 + 0.5 * ((u - w_neg) / w_pos));
    double g = normal_quantile_core(t);
    return g * (neg ? sigma_neg : sigma_pos);
}

// --- signed power -----------------------------------------------------------
// Per-call dispatch on p (uniform across the batch); element cores below.

enum class PowKind { copy, sqrt_k, fourth_root, square, cube, fourth, general };

inline PowKind classify_power(double p) {
    if (p == 1.0) return PowKind::copy;
    if (p == 0.5) return PowKind::sqrt_k;
    if (p == 0.25) return PowKind::fourth_root;
    if (p == 2.0) return PowKind::square;
    if (p == 3.0) return PowKind::cube;
    if (p == 4.0) return PowKind::fourth;
    return PowKind::general;
}

inline double spow_sqrt(double x) { return std::copysign(std::sqrt(std::fabs(x)), x); }
inline double spow_fourth_root(double x) {
    return std::copysign(std::sqrt(std::sqrt(std::fabs(x))), x);
}
inline double spow_square(double x) { return std::copysign(x * x, x); }
inline double spow_cube(double x) { return (x * x) * x; }
inline double spow_fourth(double x) {
    double x2 = x * x;
    return std::copysign(x2 * x2, x);
}
inline double spow_general(double x, double p) {
    double a = std::fabs(x);
    return std::copysign(exp_core(p * log_core(a)), x);
}

// --- ops table ---------------------------------------------------------------

struct Ops {
    void (*fill_uniform)(std::uint64_t, std::uint64_t, double*, std::size_t);
    void (*vexp)(const double*, double*, std::size_t);
    void (*vlog)(const double*, double*, std::size_t);
    void (*signed_power)(const double*, double, double*, std::size_t);
    void (*affine)(const double*, double, double, double*, std::size_t);
    void (*accumulate)(double*, const double*, std::size_t);
    void (*accumulate_max)(double*, const double*, std::size_t);
    void (*normal_quantile)(const double*, double*, std::size_t);
    void (*two_piece_exp_quantile)(const double*, double, double, double, double*, std::size_t);
    void (*two_piece_gauss_quantile)(const double*, double, double, double, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    MaskedMoments (*interval_weighted_moments)(const double*, const double*, double, double,
                                               std::size_t);
    MaskedMoments (*dual_interval_weighted_moments)(const double*, const double*, const double*,
                                                    double, double, double, double, std::size_t);
};

extern const Ops scalar_ops;
#if defined(SUBTILT_HAVE_AVX2)
extern const Ops avx2_ops;
#endif

}  // namespace subtilt::kernels::detail
