#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace subtilt::kernels {
namespace {

std::atomic<const detail::Ops*> g_ops{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

bool cpu_has_avx2() {
#if defined(SUBTILT_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const detail::Ops* ops_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &detail::scalar_ops;
        case Backend::avx2:
#if defined(SUBTILT_HAVE_AVX2)
            if (cpu_has_avx2()) return &detail::avx2_ops;
#endif
            return nullptr;
    }
    return nullptr;
}

void select(Backend b, const detail::Ops* table) {
    g_ops.store(table, std::memory_order_release);
    g_backend.store(b, std::memory_order_release);
}

const detail::Ops& active() {
    static const bool init = [] {
        Backend want = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
        if (const char* env = std::getenv("SUBTILT_KERNELS")) {
            if (std::strcmp(env, "scalar") == 0)
                want = Backend::scalar;
            else if (std::strcmp(env, "avx2") == 0)
                want = Backend::avx2;
        }
        const detail::Ops* table = ops_for(want);
        if (!table) {
            want = Backend::scalar;
            table = &detail::scalar_ops;
        }
        select(want, table);
        return true;
    }();
    (void)init;
    return *g_ops.load(std::memory_order_acquire);
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

bool backend_available(Backend b) { return ops_for(b) != nullptr; }

std::vector<Backend> available_backends() {
    std::vector<Backend> r{Backend::scalar};
    if (backend_available(Backend::avx2)) r.push_back(Backend::avx2);
    return r;
}

Backend active_backend() {
    active();
    return g_backend.load(std::memory_order_acquire);
}

bool set_backend(Backend b) {
    active();
    const detail::Ops* table = ops_for(b);
    if (!table) return false;
    select(b, table);
    return true;
}

void fill_uniform(std::uint64_t key, std::uint64_t counter0, double* out, std::size_t n) {
    active().fill_uniform(key, counter0, out, n);
}

void vexp(const double* x, double* out, std::size_t n) { active().vexp(x, out, n); }

void vlog(const double* x, double* out, std::size_t n) { active().vlog(x, out, n); }

void signed_power(const double* x, double p, double* out, std::size_t n) {
    active().signed_power(x, p, out, n);
}

void affine(const double* x, double a, double b, double* out, std::size_t n) {
    active().affine(x, a, b, out, n);
}

void accumulate(double* acc, const double* x, std::size_t n) { active().accumulate(acc, x, n); }

void accumulate_max(double* acc, const double* x, std::size_t n) {
    active().accumulate_max(acc, x, n);
}

void normal_quantile(const double* u, double* out, std::size_t n) {
    active().normal_quantile(u, out, n);
}

void two_piece_exp_quantile(const double* u, double w_neg, double rate_neg, double rate_pos,
                            double* out, std::size_t n) {
    active().two_piece_exp_quantile(u, w_neg, rate_neg, rate_pos, out, n);
}

void two_piece_gauss_quantile(const double* u, double w_neg, double sigma_neg, double sigma_pos,
                              double* out, std::size_t n) {
    active().two_piece_gauss_quantile(u, w_neg, sigma_neg, sigma_pos, out, n);
}

double sum(const double* x, std::size_t n) { return active().sum(x, n); }

MaskedMoments interval_weighted_moments(const double* s, const double* w, double lo, double hi,
                                        std::size_t n) {
    return active().interval_weighted_moments(s, w, lo, hi, n);
}

MaskedMoments dual_interval_weighted_moments(const double* s, const double* g, const double* w,
                                             double lo, double hi, double g_lo, double g_hi,
                                             std::size_t n) {
    return active().dual_interval_weighted_moments(s, g, w, lo, hi, g_lo, g_hi, n);
}

}  // namespace subtilt::kernels
