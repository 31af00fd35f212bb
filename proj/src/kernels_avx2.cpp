#include "kernels_impl.hpp"

#include <immintrin.h>

// AVX2+FMA backend. Every routine performs, per lane, exactly the operation
// sequence of the scalar core in kernels_impl.hpp (branches become blends of
// identically-computed candidates), so outputs are bit-identical to the scalar
// backend. Remainder elements below a multiple of four are delegated to the
// scalar cores, which compute the same thing by construction.

namespace subtilt::kernels::detail {
namespace {

const __m256d v_zero = _mm256_setzero_pd();
const __m256d v_one = _mm256_set1_pd(1.0);
const __m256d v_half = _mm256_set1_pd(0.5);
const __m256d v_sign = _mm256_set1_pd(-0.0);
const __m256d v_qnan = _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN());
const __m256d v_pinf = _mm256_set1_pd(pos_inf);
const __m256d v_ninf = _mm256_set1_pd(-pos_inf);

inline __m256d vabs(__m256d x) { return _mm256_andnot_pd(v_sign, x); }
inline __m256d vneg(__m256d x) { return _mm256_xor_pd(x, v_sign); }
inline __m256d copy_sign_of(__m256d mag, __m256d s) {
    // mag must be >= 0 or +-0: OR in the sign bit of s.
    return _mm256_or_pd(mag, _mm256_and_pd(s, v_sign));
}

// 64-bit multiply by a constant via 32x32 partial products (no AVX512).
inline __m256i mul64_const(__m256i a, std::uint64_t b) {
    const __m256i blo = _mm256_set1_epi64x(static_cast<long long>(b & 0xFFFFFFFFull));
    const __m256i bhi = _mm256_set1_epi64x(static_cast<long long>(b >> 32));
    __m256i ahi = _mm256_srli_epi64(a, 32);
    __m256i ll = _mm256_mul_epu32(a, blo);
    __m256i lh = _mm256_mul_epu32(a, bhi);
    __m256i hl = _mm256_mul_epu32(ahi, blo);
    __m256i mid = _mm256_add_epi64(lh, hl);
    return _mm256_add_epi64(ll, _mm256_slli_epi64(mid, 32));
}

inline __m256i mix64v(__m256i z) {
    z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 30));
    z = mul64_const(z, 0xBF58476D1CE4E5B9ull);
    z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 27));
    z = mul64_const(z, 0x94D049BB133111EBull);
    return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

// Exact conversion of small signed 64-bit lanes (|k| < 2^51) to double.
inline __m256d i64_small_to_pd(__m256i k) {
    const __m256i magic_i = _mm256_set1_epi64x(0x4338000000000000LL);
    const __m256d magic_d = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51
    return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(k, magic_i)), magic_d);
}

void fill_uniform_avx2(std::uint64_t key, std::uint64_t counter0, double* out, std::size_t n) {
    std::size_t n4 = n & ~std::size_t(3);
    if (n4 != 0) {
        __m256i state = _mm256_set_epi64x(
            static_cast<long long>(key + (counter0 + 4) * golden),
            static_cast<long long>(key + (counter0 + 3) * golden),
            static_cast<long long>(key + (counter0 + 2) * golden),
            static_cast<long long>(key + (counter0 + 1) * golden));
        const __m256i step = _mm256_set1_epi64x(static_cast<long long>(4 * golden));
        const __m256i expo = _mm256_set1_epi64x(0x3FF0000000000000LL);
        const __m256d tiny = _mm256_set1_pd(0x1p-53);
        for (std::size_t i = 0; i < n4; i += 4) {
            __m256i z = mix64v(state);
            __m256d d = _mm256_castsi256_pd(_mm256_or_si256(_mm256_srli_epi64(z, 12), expo));
            _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_sub_pd(d, v_one), tiny));
            state = _mm256_add_epi64(state, step);
        }
    }
    for (std::size_t i = n4; i < n; ++i) out[i] = uniform_at(key, counter0 + i);
}

// --- exp ---------------------------------------------------------------------

inline __m256d pow2_from_epi32(__m128i k) {
    __m256i k64 = _mm256_cvtepi32_epi64(k);
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_castsi256_pd(bits);
}

inline __m256d exp_vec(__m256d x) {
    const __m256d hi = _mm256_set1_pd(exp_hi);
    const __m256d lo = _mm256_set1_pd(exp_lo);
    __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    __m256d big = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
    __m256d small = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

    __m256d k = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(log2e)),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_sub_pd(xc, _mm256_mul_pd(k, _mm256_set1_pd(exp_c1)));
    r = _mm256_sub_pd(r, _mm256_mul_pd(k, _mm256_set1_pd(exp_c2)));
    __m256d rr = _mm256_mul_pd(r, r);
    __m256d px = _mm256_mul_pd(rr, _mm256_set1_pd(exp_p0));
    px = _mm256_add_pd(px, _mm256_set1_pd(exp_p1));
    px = _mm256_mul_pd(px, rr);
    px = _mm256_add_pd(px, _mm256_set1_pd(exp_p2));
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_mul_pd(rr, _mm256_set1_pd(exp_q0));
    qx = _mm256_add_pd(qx, _mm256_set1_pd(exp_q1));
    qx = _mm256_mul_pd(qx, rr);
    qx = _mm256_add_pd(qx, _mm256_set1_pd(exp_q2));
    qx = _mm256_mul_pd(qx, rr);
    qx = _mm256_add_pd(qx, _mm256_set1_pd(exp_q3));
    __m256d e = _mm256_add_pd(v_one, _mm256_mul_pd(_mm256_set1_pd(2.0),
                                                   _mm256_div_pd(px, _mm256_sub_pd(qx, px))));
    __m128i ki = _mm256_cvtpd_epi32(k);
    __m128i ka = _mm_srai_epi32(ki, 1);
    __m128i kb = _mm_sub_epi32(ki, ka);
    e = _mm256_mul_pd(e, pow2_from_epi32(ka));
    e = _mm256_mul_pd(e, pow2_from_epi32(kb));
    e = _mm256_blendv_pd(e, v_pinf, big);
    e = _mm256_blendv_pd(e, v_zero, small);
    e = _mm256_blendv_pd(e, v_qnan, nan_mask);
    return e;
}

// The scalar core evaluates the polynomial as ((p0*rr + p1)*rr + p2)*r; the
// chain above is the same sequence spelled out, likewise for qx.

void vexp_avx2(const double* x, double* out, std::size_t n) {
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4)
        _mm256_storeu_pd(out + i, exp_vec(_mm256_loadu_pd(x + i)));
    for (std::size_t i = n4; i < n; ++i) out[i] = exp_core(x[i]);
}

// --- log ---------------------------------------------------------------------

inline __m256d log_vec(__m256d x) {
    __m256d nan_in = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    __m256d zero_mask = _mm256_cmp_pd(x, v_zero, _CMP_EQ_OQ);
    __m256d neg_mask = _mm256_cmp_pd(x, v_zero, _CMP_LT_OQ);
    __m256d inf_mask = _mm256_cmp_pd(x, v_pinf, _CMP_EQ_OQ);
    __m256d sub_mask = _mm256_and_pd(_mm256_cmp_pd(x, _mm256_set1_pd(dbl_min_normal), _CMP_LT_OQ),
                                     _mm256_cmp_pd(x, v_zero, _CMP_GT_OQ));
    __m256d xs = _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(0x1p54)), sub_mask);

    __m256i bits = _mm256_castpd_si256(xs);
    __m256i e_i = _mm256_sub_epi64(_mm256_and_si256(_mm256_srli_epi64(bits, 52),
                                                    _mm256_set1_epi64x(0x7FF)),
                                   _mm256_set1_epi64x(1023));
    e_i = _mm256_add_epi64(e_i, _mm256_and_si256(_mm256_castpd_si256(sub_mask),
                                                 _mm256_set1_epi64x(-54)));
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                        _mm256_set1_epi64x(0x3FF0000000000000LL)));
    __m256d gt = _mm256_cmp_pd(m, _mm256_set1_pd(sqrt2), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, v_half), gt);
    e_i = _mm256_sub_epi64(e_i, _mm256_castpd_si256(gt));  // mask lanes are -1

    __m256d f = _mm256_sub_pd(m, v_one);
    __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
    __m256d z = _mm256_mul_pd(s, s);
    __m256d w = _mm256_mul_pd(z, z);
    __m256d t1 = _mm256_mul_pd(w, _mm256_set1_pd(lg6));
    t1 = _mm256_add_pd(t1, _mm256_set1_pd(lg4));
    t1 = _mm256_mul_pd(t1, w);
    t1 = _mm256_add_pd(t1, _mm256_set1_pd(lg2));
    t1 = _mm256_mul_pd(t1, w);
    __m256d t2 = _mm256_mul_pd(w, _mm256_set1_pd(lg7));
    t2 = _mm256_add_pd(t2, _mm256_set1_pd(lg5));
    t2 = _mm256_mul_pd(t2, w);
    t2 = _mm256_add_pd(t2, _mm256_set1_pd(lg3));
    t2 = _mm256_mul_pd(t2, w);
    t2 = _mm256_add_pd(t2, _mm256_set1_pd(lg1));
    t2 = _mm256_mul_pd(t2, z);
    __m256d r = _mm256_add_pd(t2, t1);
    __m256d hfsq = _mm256_mul_pd(_mm256_mul_pd(v_half, f), f);
    __m256d dk = i64_small_to_pd(e_i);

    // dk*ln2_hi - ((hfsq - (s*(hfsq + r) + dk*ln2_lo)) - f)
    __m256d ta = _mm256_mul_pd(s, _mm256_add_pd(hfsq, r));
    __m256d tb = _mm256_mul_pd(dk, _mm256_set1_pd(ln2_lo));
    __m256d td = _mm256_sub_pd(hfsq, _mm256_add_pd(ta, tb));
    __m256d res = _mm256_sub_pd(_mm256_mul_pd(dk, _mm256_set1_pd(ln2_hi)),
                                _mm256_sub_pd(td, f));

    res = _mm256_blendv_pd(res, v_pinf, inf_mask);
    res = _mm256_blendv_pd(res, v_qnan, neg_mask);
    res = _mm256_blendv_pd(res, v_ninf, zero_mask);
    res = _mm256_blendv_pd(res, v_qnan, nan_in);
    return res;
}

// Scalar hfsq is 0.5*f*f evaluated left to right: (0.5*f)*f above matches.

void vlog_avx2(const double* x, double* out, std::size_t n) {
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4)
        _mm256_storeu_pd(out + i, log_vec(_mm256_loadu_pd(x + i)));
    for (std::size_t i = n4; i < n; ++i) out[i] = log_core(x[i]);
}

// --- normal quantile ----------------------------------------------------------

inline __m256d horner8v(const double (&c)[8], __m256d r) {
    __m256d v = _mm256_set1_pd(c[0]);
    for (int i = 1; i < 8; ++i) {
        v = _mm256_mul_pd(v, r);
        v = _mm256_add_pd(v, _mm256_set1_pd(c[i]));
    }
    return v;
}

inline __m256d normal_quantile_vec(__m256d u) {
    __m256d q = _mm256_sub_pd(u, v_half);
    __m256d central = _mm256_cmp_pd(vabs(q), _mm256_set1_pd(0.425), _CMP_LE_OQ);

    __m256d rc = _mm256_sub_pd(_mm256_set1_pd(0.180625), _mm256_mul_pd(q, q));
    __m256d vc = _mm256_mul_pd(q, _mm256_div_pd(horner8v(ppnd_a, rc), horner8v(ppnd_b, rc)));

    __m256d qneg = _mm256_cmp_pd(q, v_zero, _CMP_LT_OQ);
    __m256d r0 = _mm256_blendv_pd(_mm256_sub_pd(v_one, u), u, qneg);
    __m256d r = _mm256_sqrt_pd(vneg(log_vec(r0)));
    __m256d far_mask = _mm256_cmp_pd(r, _mm256_set1_pd(5.0), _CMP_GT_OQ);
    __m256d tn = _mm256_sub_pd(r, _mm256_set1_pd(1.6));
    __m256d vn = _mm256_div_pd(horner8v(ppnd_c, tn), horner8v(ppnd_d, tn));
    __m256d tf = _mm256_sub_pd(r, _mm256_set1_pd(5.0));
    __m256d vf = _mm256_div_pd(horner8v(ppnd_e, tf), horner8v(ppnd_f, tf));
    __m256d vt = _mm256_blendv_pd(vn, vf, far_mask);
    vt = _mm256_blendv_pd(vt, vneg(vt), qneg);

    return _mm256_blendv_pd(vt, vc, central);
}

void normal_quantile_avx2(const double* u, double* out, std::size_t n) {
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4)
        _mm256_storeu_pd(out + i, normal_quantile_vec(_mm256_loadu_pd(u + i)));
    for (std::size_t i = n4; i < n; ++i) out[i] = normal_quantile_core(u[i]);
}

// --- piecewise quantiles --------------------------------------------------------

void two_piece_exp_quantile_avx2(const double* u, double w_neg, double rate_neg, double rate_pos,
                                 double* out, std::size_t n) {
    double w_pos = 1.0 - w_neg;
    const __m256d wn = _mm256_set1_pd(w_neg);
    const __m256d wp = _mm256_set1_pd(w_pos);
    const __m256d rn = _mm256_set1_pd(rate_neg);
    const __m256d rp = _mm256_set1_pd(rate_pos);
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        __m256d uv = _mm256_loadu_pd(u + i);
        __m256d mask = _mm256_cmp_pd(uv, wn, _CMP_LE_OQ);
        __m256d arg = _mm256_blendv_pd(_mm256_div_pd(_mm256_sub_pd(v_one, uv), wp),
                                       _mm256_div_pd(uv, wn), mask);
        __m256d l = log_vec(arg);
        __m256d res = _mm256_blendv_pd(vneg(_mm256_div_pd(l, rp)), _mm256_div_pd(l, rn), mask);
        _mm256_storeu_pd(out + i, res);
    }
    for (std::size_t i = n4; i < n; ++i)
        out[i] = two_piece_exp_quantile_core(u[i], w_neg, rate_neg, rate_pos);
}

void two_piece_gauss_quantile_avx2(const double* u, double w_neg, double sigma_neg,
                                   double sigma_pos, double* out, std::size_t n) {
    double two_w_neg = 2.0 * w_neg;
    double w_pos = 1.0 - w_neg;
    const __m256d wn = _mm256_set1_pd(w_neg);
    const __m256d twn = _mm256_set1_pd(two_w_neg);
    const __m256d wp = _mm256_set1_pd(w_pos);
    const __m256d sn = _mm256_set1_pd(sigma_neg);
    const __m256d sp = _mm256_set1_pd(sigma_pos);
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        __m256d uv = _mm256_loadu_pd(u + i);
        __m256d mask = _mm256_cmp_pd(uv, wn, _CMP_LE_OQ);
        __m256d t_neg = _mm256_div_pd(uv, twn);
        __m256d t_pos = _mm256_add_pd(v_half,
                                      _mm256_mul_pd(v_half, _mm256_div_pd(_mm256_sub_pd(uv, wn), wp)));
        __m256d t = _mm256_blendv_pd(t_pos, t_neg, mask);
        __m256d g = normal_quantile_vec(t);
        __m256d res = _mm256_mul_pd(g, _mm256_blendv_pd(sp, sn, mask));
        _mm256_storeu_pd(out + i, res);
    }
    for (std::size_t i = n4; i < n; ++i)
        out[i] = two_piece_gauss_quantile_core(u[i], w_neg, sigma_neg, sigma_pos);
}

// --- signed power ----------------------------------------------------------------

void signed_power_avx2(const double* x, double p, double* out, std::size_t n) {
    std::size_t n4 = n & ~std::size_t(3);
    switch (classify_power(p)) {
        case PowKind::copy:
            for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
            return;
        case PowKind::sqrt_k:
            for (std::size_t i = 0; i < n4; i += 4) {
                __m256d xv = _mm256_loadu_pd(x + i);
                _mm256_storeu_pd(out + i, copy_sign_of(_mm256_sqrt_pd(vabs(xv)), xv));
            }
            for (std::size_t i = n4; i < n; ++i) out[i] = spow_sqrt(x[i]);
            return;
        case PowKind::fourth_root:
            for (std::size_t i = 0; i < n4; i += 4) {
                __m256d xv = _mm256_loadu_pd(x + i);
                _mm256_storeu_pd(out + i,
                                 copy_sign_of(_mm256_sqrt_pd(_mm256_sqrt_pd(vabs(xv))), xv));
            }
            for (std::size_t i = n4; i < n; ++i) out[i] = spow_fourth_root(x[i]);
            return;
        case PowKind::square:
            for (std::size_t i = 0; i < n4; i += 4) {
                __m256d xv = _mm256_loadu_pd(x + i);
                _mm256_storeu_pd(out + i, copy_sign_of(_mm256_mul_pd(xv, xv), xv));
            }
            for (std::size_t i = n4; i < n; ++i) out[i] = spow_square(x[i]);
            return;
        case PowKind::cube:
            for (std::size_t i = 0; i < n4; i += 4) {
                __m256d xv = _mm256_loadu_pd(x + i);
                _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_mul_pd(xv, xv), xv));
            }
            for (std::size_t i = n4; i < n; ++i) out[i] = spow_cube(x[i]);
            return;
        case PowKind::fourth:
            for (std::size_t i = 0; i < n4; i += 4) {
                __m256d xv = _mm256_loadu_pd(x + i);
                __m256d x2 = _mm256_mul_pd(xv, xv);
                _mm256_storeu_pd(out + i, copy_sign_of(_mm256_mul_pd(x2, x2), xv));
            }
            for (std::size_t i = n4; i < n; ++i) out[i] = spow_fourth(x[i]);
            return;
        case PowKind::general: {
            const __m256d pv = _mm256_set1_pd(p);
            for (std::size_t i = 0; i < n4; i += 4) {
                __m256d xv = _mm256_loadu_pd(x + i);
                __m256d e = exp_vec(_mm256_mul_pd(pv, log_vec(vabs(xv))));
                _mm256_storeu_pd(out + i, copy_sign_of(e, xv));
            }
            for (std::size_t i = n4; i < n; ++i) out[i] = spow_general(x[i], p);
            return;
        }
    }
}

// --- elementwise / reductions -----------------------------------------------------

void affine_avx2(const double* x, double a, double b, double* out, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    const __m256d bv = _mm256_set1_pd(b);
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4)
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), bv));
    for (std::size_t i = n4; i < n; ++i) out[i] = std::fma(a, x[i], b);
}

void accumulate_avx2(double* acc, const double* x, std::size_t n) {
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4)
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    for (std::size_t i = n4; i < n; ++i) acc[i] = acc[i] + x[i];
}

void accumulate_max_avx2(double* acc, const double* x, std::size_t n) {
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4)
        _mm256_storeu_pd(acc + i, _mm256_max_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    for (std::size_t i = n4; i < n; ++i) acc[i] = (acc[i] > x[i]) ? acc[i] : x[i];
}

// maxpd(a, b) yields a when a > b and b otherwise (ties, NaN), which is
// exactly the scalar ternary above.

double sum_avx2(const double* x, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t n4 = n & ~std::size_t(3);
    if (n4 != 0) {
        __m256d acc = v_zero;
        for (std::size_t i = 0; i < n4; i += 4)
            acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(lane, acc);
    }
    for (std::size_t j = 0; n4 + j < n; ++j) lane[j] = lane[j] + x[n4 + j];
    return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

MaskedMoments interval_weighted_moments_avx2(const double* s, const double* w, double lo,
                                             double hi, std::size_t n) {
    double lw[4] = {0.0, 0.0, 0.0, 0.0};
    double lw2[4] = {0.0, 0.0, 0.0, 0.0};
    std::uint64_t count = 0;
    const __m256d lov = _mm256_set1_pd(lo);
    const __m256d hiv = _mm256_set1_pd(hi);
    std::size_t n4 = n & ~std::size_t(3);
    if (n4 != 0) {
        __m256d accw = v_zero;
        __m256d accw2 = v_zero;
        for (std::size_t i = 0; i < n4; i += 4) {
            __m256d sv = _mm256_loadu_pd(s + i);
            __m256d mask = _mm256_and_pd(_mm256_cmp_pd(sv, lov, _CMP_GE_OQ),
                                         _mm256_cmp_pd(sv, hiv, _CMP_LE_OQ));
            __m256d wv = w ? _mm256_loadu_pd(w + i) : v_one;
            __m256d q = _mm256_and_pd(mask, wv);
            accw = _mm256_add_pd(accw, q);
            accw2 = _mm256_fmadd_pd(q, q, accw2);
            count += static_cast<unsigned>(__builtin_popcount(_mm256_movemask_pd(mask)));
        }
        _mm256_storeu_pd(lw, accw);
        _mm256_storeu_pd(lw2, accw2);
    }
    for (std::size_t j = 0; n4 + j < n; ++j) {
        std::size_t i = n4 + j;
        bool m = (s[i] >= lo) && (s[i] <= hi);
        double q = m ? (w ? w[i] : 1.0) : 0.0;
        lw[j] = lw[j] + q;
        lw2[j] = std::fma(q, q, lw2[j]);
        count += m ? 1u : 0u;
    }
    MaskedMoments r;
    r.sum_w = (lw[0] + lw[2]) + (lw[1] + lw[3]);
    r.sum_w2 = (lw2[0] + lw2[2]) + (lw2[1] + lw2[3]);
    r.count = count;
    return r;
}

MaskedMoments dual_interval_weighted_moments_avx2(const double* s, const double* g,
                                                  const double* w, double lo, double hi,
                                                  double g_lo, double g_hi, std::size_t n) {
    double lw[4] = {0.0, 0.0, 0.0, 0.0};
    double lw2[4] = {0.0, 0.0, 0.0, 0.0};
    std::uint64_t count = 0;
    const __m256d lov = _mm256_set1_pd(lo);
    const __m256d hiv = _mm256_set1_pd(hi);
    const __m256d glov = _mm256_set1_pd(g_lo);
    const __m256d ghiv = _mm256_set1_pd(g_hi);
    std::size_t n4 = n & ~std::size_t(3);
    if (n4 != 0) {
        __m256d accw = v_zero;
        __m256d accw2 = v_zero;
        for (std::size_t i = 0; i < n4; i += 4) {
            __m256d sv = _mm256_loadu_pd(s + i);
            __m256d gv = _mm256_loadu_pd(g + i);
            __m256d mask = _mm256_and_pd(_mm256_cmp_pd(sv, lov, _CMP_GE_OQ),
                                         _mm256_cmp_pd(sv, hiv, _CMP_LE_OQ));
            mask = _mm256_and_pd(mask, _mm256_cmp_pd(gv, glov, _CMP_GE_OQ));
            mask = _mm256_and_pd(mask, _mm256_cmp_pd(gv, ghiv, _CMP_LE_OQ));
            __m256d wv = w ? _mm256_loadu_pd(w + i) : v_one;
            __m256d q = _mm256_and_pd(mask, wv);
            accw = _mm256_add_pd(accw, q);
            accw2 = _mm256_fmadd_pd(q, q, accw2);
            count += static_cast<unsigned>(__builtin_popcount(_mm256_movemask_pd(mask)));
        }
        _mm256_storeu_pd(lw, accw);
        _mm256_storeu_pd(lw2, accw2);
    }
    for (std::size_t j = 0; n4 + j < n; ++j) {
        std::size_t i = n4 + j;
        bool m = (s[i] >= lo) && (s[i] <= hi) && (g[i] >= g_lo) && (g[i] <= g_hi);
        double q = m ? (w ? w[i] : 1.0) : 0.0;
        lw[j] = lw[j] + q;
        lw2[j] = std::fma(q, q, lw2[j]);
        count += m ? 1u : 0u;
    }
    MaskedMoments r;
    r.sum_w = (lw[0] + lw[2]) + (lw[1] + lw[3]);
    r.sum_w2 = (lw2[0] + lw2[2]) + (lw2[1] + lw2[3]);
    r.count = count;
    return r;
}

}  // namespace

const Ops avx2_ops = {
    fill_uniform_avx2,
    vexp_avx2,
    vlog_avx2,
    signed_power_avx2,
    affine_avx2,
    accumulate_avx2,
    accumulate_max_avx2,
    normal_quantile_avx2,
    two_piece_exp_quantile_avx2,
    two_piece_gauss_quantile_avx2,
    sum_avx2,
    interval_weighted_moments_avx2,
    dual_interval_weighted_moments_avx2,
};

}  // namespace subtilt::kernels::detail
