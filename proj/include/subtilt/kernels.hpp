#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Batch double-precision kernels used by the samplers and estimators.
//
// Every operation exists as a scalar reference implementation and (on x86-64)
// an AVX2+FMA variant. Both implement the same IEEE-754 operation sequence:
// identical polynomial schemes, explicit FMA only, fixed 4-lane reduction
// order, remainder elements delegated to the scalar code. The contract is
// bit-identical output across backends, which the test suite asserts; it is
// what makes estimator output independent of thread count and of the machine's
// SIMD capabilities.
//
// Accuracy of the transcendental kernels (exp, log, normal quantile) is a few
// ulp; they are validated against libm and against high-precision oracles in
// the tests, but they are NOT guaranteed to round identically to libm.

namespace subtilt::kernels {

enum class Backend { scalar, avx2 };

const char* backend_name(Backend b);
bool backend_available(Backend b);
std::vector<Backend> available_backends();

// Active backend: auto-detected at startup (AVX2 when the CPU supports it),
// overridable via set_backend() or the SUBTILT_KERNELS environment variable
// ("scalar" or "avx2"). Returns false if the requested backend is unavailable.
Backend active_backend();
bool set_backend(Backend b);

// Uniforms in (0,1): splitmix64 finalizer of key + (counter0 + i + 1) * golden.
void fill_uniform(std::uint64_t key, std::uint64_t counter0, double* out, std::size_t n);

// out[i] = exp(x[i]); Cephes-style rational scheme, handles +-inf, over/underflow.
void vexp(const double* x, double* out, std::size_t n);

// out[i] = log(x[i]); fdlibm scheme; log(0) = -inf, log(x<0) = NaN.
void vlog(const double* x, double* out, std::size_t n);

// Signed power map out[i] = sign(x[i]) * |x[i]|^p with exact fast paths for
// p in {0.25, 0.5, 1, 2, 3, 4}; general p via exp(p * log|x|); 0 maps to 0.
void signed_power(const double* x, double p, double* out, std::size_t n);

// out[i] = a * x[i] + b (single fused multiply-add per element).
void affine(const double* x, double a, double b, double* out, std::size_t n);

// acc[i] += x[i]
void accumulate(double* acc, const double* x, std::size_t n);

// acc[i] = max(acc[i], x[i])   (if either is NaN the result is x[i])
void accumulate_max(double* acc, const double* x, std::size_t n);

// Standard normal quantile (inverse CDF), AS 241 PPND16 scheme (~1e-15 rel).
void normal_quantile(const double* u, double* out, std::size_t n);

// Quantile of the two-piece exponential law with P(Y < 0) = w_neg and
// conditional densities rate_neg * exp(rate_neg * y) (y < 0) resp.
// rate_pos * exp(-rate_pos * y) (y > 0). w_neg = 1/2, unit rates give the
// standard two-sided exponential.
void two_piece_exp_quantile(const double* u, double w_neg, double rate_neg, double rate_pos,
                            double* out, std::size_t n);

// Quantile of the two-piece half-normal law: with probability w_neg the value
// is -sigma_neg * |N(0,1)|, otherwise +sigma_pos * |N(0,1)|. w_neg = 1/2 and
// unit scales give the standard normal.
void two_piece_gauss_quantile(const double* u, double w_neg, double sigma_neg, double sigma_pos,
                              double* out, std::size_t n);

// Block-interleaved 4-accumulator sum; lanes combined as (l0+l2)+(l1+l3).
// The fixed order is part of the reproducibility contract.
double sum(const double* x, std::size_t n);

struct MaskedMoments {
    double sum_w = 0.0;    // sum of weights over selected elements
    double sum_w2 = 0.0;   // sum of squared weights over selected elements
    std::uint64_t count = 0;  // number of selected elements
};

// Selects elements with lo <= s[i] <= hi and accumulates their weights
// (w == nullptr means unit weights). Same 4-lane reduction contract as sum().
MaskedMoments interval_weighted_moments(const double* s, const double* w, double lo, double hi,
                                        std::size_t n);

// As above with a second gate: lo <= s[i] <= hi AND g_lo <= g[i] <= g_hi.
MaskedMoments dual_interval_weighted_moments(const double* s, const double* g, const double* w,
                                             double lo, double hi, double g_lo, double g_hi,
                                             std::size_t n);

}  // namespace subtilt::kernels
