#include "subtilt/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>
#include <vector>

#include "subtilt/errors.hpp"
#include "subtilt/kernels.hpp"
#include "subtilt/quadrature.hpp"
#include "subtilt/rng.hpp"
#include "subtilt/tilted.hpp"

namespace subtilt {

namespace {

constexpr std::int64_t kChunk = 16384;
constexpr double kLogWeightCap = 690.0;  // exp() overflows just above 709

void validate_event(const EventSpec& event) {
    if (event.n < 1) throw DomainError("event: n must be a positive integer");
    if (!(event.x > 0.0) || !std::isfinite(event.x)) {
        throw DomainError("event: x must be positive and finite");
    }
    if (event.shape == EventShape::ball) {
        if (!(event.delta > 0.0) || !(event.delta < event.x)) {
            throw DomainError("event: a ball needs 0 < delta < x");
        }
    }
}

void validate_run(std::int64_t replications, std::int64_t min_replications, int threads) {
    if (replications < min_replications) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "estimator needs at least %lld replications",
                      static_cast<long long>(min_replications));
        throw DomainError(buf);
    }
    if (threads < 1 || threads > 1024) {
        throw DomainError("thread count must lie in [1, 1024]");
    }
}

struct EventGate {
    double lo, hi;  // event holds iff lo <= sum <= hi
    bool contains(double sum) const { return sum >= lo && sum <= hi; }
};

EventGate make_gate(const EventSpec& event) {
    const double n = static_cast<double>(event.n);
    if (event.shape == EventShape::ball) {
        return {n * (event.x - event.delta), n * (event.x + event.delta)};
    }
    return {n * event.x, std::numeric_limits<double>::infinity()};
}

struct ChunkAccum {
    double sum_c = 0.0;   // contributions w * indicator
    double sum_c2 = 0.0;
    double sum_w_hit = 0.0;   // ESS pieces, over replications that hit the event
    double sum_w2_hit = 0.0;
    std::int64_t hits = 0;
    std::int64_t discarded = 0;
    double sum_w_nomax = 0.0;   // hit and max < n x
    double sum_w_bigmax = 0.0;  // hit and max >= 0.8 n x
    double sum_w_maxev = 0.0;   // max >= n x regardless of the sum
};

// The replication range is cut into fixed chunks; each chunk owns derived
// random streams and a private accumulator slot, so totals merged in chunk
// order are bit-identical for every thread count.
template <typename Body>
std::vector<ChunkAccum> run_chunked(std::int64_t replications, int threads, const Body& body) {
    const std::int64_t chunks = (replications + kChunk - 1) / kChunk;
    std::vector<ChunkAccum> acc(static_cast<std::size_t>(chunks));
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (std::int64_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
            const std::int64_t count = std::min(kChunk, replications - c * kChunk);
            body(c, count, acc[static_cast<std::size_t>(c)]);
        }
    };
    if (threads == 1 || chunks == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int use = static_cast<int>(std::min<std::int64_t>(threads, chunks));
        pool.reserve(static_cast<std::size_t>(use));
        for (int i = 0; i < use; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return acc;
}

ChunkAccum merge(const std::vector<ChunkAccum>& parts) {
    ChunkAccum total;
    for (const ChunkAccum& a : parts) {
        total.sum_c += a.sum_c;
        total.sum_c2 += a.sum_c2;
        total.sum_w_hit += a.sum_w_hit;
        total.sum_w2_hit += a.sum_w2_hit;
        total.hits += a.hits;
        total.discarded += a.discarded;
        total.sum_w_nomax += a.sum_w_nomax;
        total.sum_w_bigmax += a.sum_w_bigmax;
        total.sum_w_maxev += a.sum_w_maxev;
    }
    return total;
}

std::uint64_t stream_index(std::int64_t n, std::int64_t chunk, std::uint64_t lane) {
    return (static_cast<std::uint64_t>(n) << 33) |
           (static_cast<std::uint64_t>(chunk) << 1) | lane;
}

void finish_mean_and_error(EstimatorResult& r, const ChunkAccum& total, std::int64_t kept) {
    if (kept <= 0) {
        r.estimate = 0.0;
        r.standard_error = 0.0;
        r.effective_sample_size = 0.0;
        return;
    }
    const double k = static_cast<double>(kept);
    r.estimate = total.sum_c / k;
    const double var = std::max(0.0, total.sum_c2 / k - r.estimate * r.estimate);
    r.standard_error = std::sqrt(var / k);
    r.effective_sample_size =
        total.sum_w2_hit > 0.0 ? total.sum_w_hit * total.sum_w_hit / total.sum_w2_hit : 0.0;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::naive: return "naive";
        case Method::esscher: return "esscher";
        case Method::shift: return "shift";
    }
    return "?";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// P(X >= z) for any real z, closed form when the law has one, otherwise by
// density quadrature over a window wide enough for the remainder to vanish.
double tail_at(const DistributionModel& dist, double z) {
    if (dist.has_closed_tail()) {
        if (z >= 0.0) return dist.tail(z);
        return 1.0 - dist.tail(-z);
    }
    const double az = std::fabs(z);
    double width = std::max(16.0, 4.0 * az);
    while (dist.density(az + width) * width > 1e-18 && width < 1e9) width *= 2.0;
    if (width >= 1e9) throw QuadratureFailure("tail quadrature window scan did not close");
    QuadratureOptions opts;
    opts.abs_tol = 1e-13;
    opts.rel_tol = 1e-11;
    const double upper_mass =
        integrate([&dist](double y) { return dist.density(y); }, az, az + width, opts).value;
    if (z >= 0.0) return upper_mass;
    // P(X >= z) = 1 - P(X > -z) for z < 0, by symmetry of the law.
    return 1.0 - upper_mass;
}

}  // namespace

double EstimatorResult::empirical_rate() const {
    if (!(estimate > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log(estimate) / std::pow(static_cast<double>(n), alpha);
}

std::string estimator_csv_header() {
    return "method,n,x,shape,delta,replications,seed,estimate,std_error,ess,tilt_eta,"
           "empirical_rate";
}

std::string estimator_csv_row(const EstimatorResult& r) {
    std::string out;
    out += method_name(r.method);
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += fmt(r.x);
    out += ',';
    out += r.shape == EventShape::ball ? "ball" : "tail";
    out += ',';
    out += fmt(r.delta);
    out += ',';
    out += std::to_string(r.replications);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += fmt(r.estimate);
    out += ',';
    out += fmt(r.standard_error);
    out += ',';
    out += fmt(r.effective_sample_size);
    out += ',';
    out += fmt(r.tilt_eta);
    out += ',';
    out += fmt(r.empirical_rate());
    return out;
}

EstimatorResult naive_mc(const DistributionModel& dist, const EventSpec& event,
                         std::int64_t replications, std::uint64_t seed, double alpha,
                         int threads) {
    validate_event(event);
    validate_run(replications, 1000, threads);
    const EventGate gate = make_gate(event);
    const std::size_t n = static_cast<std::size_t>(event.n);

    auto parts = run_chunked(replications, threads, [&](std::int64_t chunk, std::int64_t count,
                                                        ChunkAccum& acc) {
        RandomStream rs = RandomStream::derive(seed, stream_tag::naive,
                                               stream_index(event.n, chunk, 0));
        std::vector<double> buf(n);
        for (std::int64_t r = 0; r < count; ++r) {
            dist.sample(rs, buf.data(), n);
            if (gate.contains(kernels::sum(buf.data(), n))) ++acc.hits;
        }
    });

    ChunkAccum total = merge(parts);
    EstimatorResult result;
    result.method = Method::naive;
    result.n = event.n;
    result.x = event.x;
    result.shape = event.shape;
    result.delta = event.shape == EventShape::ball ? event.delta : 0.0;
    result.replications = replications;
    result.seed = seed;
    result.alpha = alpha;
    const double p = static_cast<double>(total.hits) / static_cast<double>(replications);
    result.estimate = p;
    result.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(replications));
    result.effective_sample_size = static_cast<double>(replications);
    result.tilt_eta = 0.0;
    return result;
}

EstimatorResult esscher_is(const DistributionModel& dist, const FreeEnergyModel& fe,
                           const EventSpec& event, std::int64_t replications, std::uint64_t seed,
                           const EsscherOptions& opts) {
    validate_event(event);
    validate_run(replications, 1, opts.threads);
    if (fe.distribution() == nullptr || fe.distribution()->name() != dist.name()) {
        throw DomainError("esscher estimator: free energy is not paired with this distribution");
    }
    const double eta = std::isnan(opts.eta_override) ? optimal_tilt(fe, event.n, event.x)
                                                     : opts.eta_override;
    const TiltedLaw law(fe, eta);
    const EventGate gate = make_gate(event);
    const std::size_t rest = static_cast<std::size_t>(event.n - 1);

    auto parts = run_chunked(replications, opts.threads, [&](std::int64_t chunk,
                                                             std::int64_t count,
                                                             ChunkAccum& acc) {
        RandomStream tilt_rs = RandomStream::derive(seed, stream_tag::esscher,
                                                    stream_index(event.n, chunk, 0));
        RandomStream base_rs = RandomStream::derive(seed, stream_tag::esscher,
                                                    stream_index(event.n, chunk, 1));
        std::vector<double> buf(std::max<std::size_t>(rest, 1));
        for (std::int64_t r = 0; r < count; ++r) {
            double x1;
            law.sample(tilt_rs, &x1, 1);
            double s = x1;
            if (rest > 0) {
                dist.sample(base_rs, buf.data(), rest);
                s += kernels::sum(buf.data(), rest);
            }
            if (gate.contains(s)) {
                const double w = std::exp(law.log_weight(x1));
                acc.sum_c += w;
                acc.sum_c2 += w * w;
                acc.sum_w_hit += w;
                acc.sum_w2_hit += w * w;
                ++acc.hits;
            }
        }
    });

    ChunkAccum total = merge(parts);
    EstimatorResult result;
    result.method = Method::esscher;
    result.n = event.n;
    result.x = event.x;
    result.shape = event.shape;
    result.delta = event.shape == EventShape::ball ? event.delta : 0.0;
    result.replications = replications;
    result.seed = seed;
    result.alpha = fe.alpha();
    result.tilt_eta = eta;
    finish_mean_and_error(result, total, replications);
    return result;
}

EstimatorResult shift_is(const DistributionModel& dist, const EventSpec& event,
                         std::int64_t replications, std::uint64_t seed, double alpha,
                         int threads) {
    validate_event(event);
    validate_run(replications, 1, threads);
    const EventGate gate = make_gate(event);
    const std::size_t rest = static_cast<std::size_t>(event.n - 1);
    const double shift = static_cast<double>(event.n) * event.x;

    auto parts = run_chunked(replications, threads, [&](std::int64_t chunk, std::int64_t count,
                                                        ChunkAccum& acc) {
        RandomStream first_rs = RandomStream::derive(seed, stream_tag::shift,
                                                     stream_index(event.n, chunk, 0));
        RandomStream base_rs = RandomStream::derive(seed, stream_tag::shift,
                                                    stream_index(event.n, chunk, 1));
        std::vector<double> buf(std::max<std::size_t>(rest, 1));
        for (std::int64_t r = 0; r < count; ++r) {
            double x1;
            dist.sample(first_rs, &x1, 1);
            const double shifted = x1 + shift;
            const double lw = dist.log_density(shifted) - dist.log_density(x1);
            if (lw > kLogWeightCap) {
                ++acc.discarded;
                continue;
            }
            double s = shifted;
            if (rest > 0) {
                dist.sample(base_rs, buf.data(), rest);
                s += kernels::sum(buf.data(), rest);
            }
            if (gate.contains(s)) {
                const double w = std::exp(lw);
                acc.sum_c += w;
                acc.sum_c2 += w * w;
                acc.sum_w_hit += w;
                acc.sum_w2_hit += w * w;
                ++acc.hits;
            }
        }
    });

    ChunkAccum total = merge(parts);
    EstimatorResult result;
    result.method = Method::shift;
    result.n = event.n;
    result.x = event.x;
    result.shape = event.shape;
    result.delta = event.shape == EventShape::ball ? event.delta : 0.0;
    result.replications = replications;
    result.seed = seed;
    result.alpha = alpha;
    result.tilt_eta = 0.0;
    result.discarded_replications = total.discarded;
    finish_mean_and_error(result, total, replications - total.discarded);
    return result;
}

std::vector<RateSweepPoint> rate_sweep(const DistributionModel& dist, const FreeEnergyModel& fe,
                                       double x, const std::vector<std::int64_t>& n_grid,
                                       std::int64_t replications, std::uint64_t seed,
                                       int threads) {
    if (n_grid.empty()) throw DomainError("rate sweep: n grid must be nonempty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
            throw DomainError("rate sweep: n grid must be increasing and >= 1");
        }
    }
    const double theory = fe.xi() * std::pow(x, fe.alpha());
    std::vector<RateSweepPoint> points;
    points.reserve(n_grid.size());
    EsscherOptions opts;
    opts.threads = threads;
    for (std::int64_t n : n_grid) {
        EventSpec event;
        event.n = n;
        event.x = x;
        auto r = esscher_is(dist, fe, event, replications, seed, opts);
        points.push_back({n, r.estimate, r.standard_error, r.empirical_rate(), theory});
    }
    return points;
}

std::string rate_sweep_csv_header() {
    return "n,estimate,std_error,empirical_rate,theory_rate";
}

std::string rate_sweep_csv_row(const RateSweepPoint& p) {
    std::string out = std::to_string(p.n);
    out += ',';
    out += fmt(p.estimate);
    out += ',';
    out += fmt(p.standard_error);
    out += ',';
    out += fmt(p.empirical_rate);
    out += ',';
    out += fmt(p.theory_rate);
    return out;
}

BigJumpDiagnostics big_jump_diagnostics(const DistributionModel& dist, const FreeEnergyModel& fe,
                                        const EventSpec& event, std::int64_t replications,
                                        std::uint64_t seed, int threads) {
    validate_event(event);
    validate_run(replications, 1, threads);
    if (event.shape != EventShape::tail_at_least) {
        throw DomainError("big-jump diagnostics are defined for tail events");
    }
    const double eta = optimal_tilt(fe, event.n, event.x);
    const TiltedLaw law(fe, eta);
    const EventGate gate = make_gate(event);
    const std::size_t rest = static_cast<std::size_t>(event.n - 1);
    const double nx = static_cast<double>(event.n) * event.x;
    const double big = 0.8 * nx;

    auto parts = run_chunked(replications, threads, [&](std::int64_t chunk, std::int64_t count,
                                                        ChunkAccum& acc) {
        RandomStream tilt_rs = RandomStream::derive(seed, stream_tag::diagnostics,
                                                    stream_index(event.n, chunk, 0));
        RandomStream base_rs = RandomStream::derive(seed, stream_tag::diagnostics,
                                                    stream_index(event.n, chunk, 1));
        std::vector<double> buf(std::max<std::size_t>(rest, 1));
        for (std::int64_t r = 0; r < count; ++r) {
            double x1;
            law.sample(tilt_rs, &x1, 1);
            double s = x1;
            double mx = x1;
            if (rest > 0) {
                dist.sample(base_rs, buf.data(), rest);
                s += kernels::sum(buf.data(), rest);
                for (std::size_t i = 0; i < rest; ++i) mx = std::max(mx, buf[i]);
            }
            const double w = std::exp(law.log_weight(x1));
            if (mx >= nx) acc.sum_w_maxev += w;
            if (gate.contains(s)) {
                acc.sum_w_hit += w;
                if (mx < nx) acc.sum_w_nomax += w;
                if (mx >= big) acc.sum_w_bigmax += w;
            }
        }
    });

    ChunkAccum total = merge(parts);
    const double reps = static_cast<double>(replications);
    BigJumpDiagnostics diag;
    if (dist.has_closed_tail()) {
        diag.a1_closed_form = true;
        diag.a1 = -std::expm1(static_cast<double>(event.n) * std::log1p(-dist.tail(nx)));
    } else {
        diag.a1 = total.sum_w_maxev / reps;
    }
    diag.a2 = total.sum_w_nomax / reps;
    diag.conditional_max_fraction =
        total.sum_w_hit > 0.0 ? total.sum_w_bigmax / total.sum_w_hit : 0.0;
    return diag;
}

double subexp_tchebychev_bound(const FreeEnergyModel& fe, double eta, double z) {
    if (!(eta > 0.0) || !(eta < fe.xi())) {
        throw DomainError("tchebychev bound: eta must lie in (0, xi)");
    }
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("tchebychev bound: z must be positive and finite");
    }
    return std::exp(-eta * std::pow(z, fe.alpha()) + fe.lambda(eta));
}

double symmetrized_tchebychev_bound(const FreeEnergyModel& fe, double eta, double k, double a) {
    if (!(k > 0.0)) throw DomainError("symmetrized bound: k must be positive");
    if (!(std::fabs(eta) + k < fe.xi())) {
        throw DomainError("symmetrized bound: |eta| + k must stay below xi");
    }
    if (!(a >= 0.0)) throw DomainError("symmetrized bound: a must be nonnegative");
    const double mean = fe.lambda_prime(eta);
    const double l0 = fe.lambda(eta);
    const double up = std::exp(-k * (mean + a) + fe.lambda(eta + k) - l0);
    const double down = std::exp(k * (mean - a) + fe.lambda(eta - k) - l0);
    return std::max(up, down);
}

IbpIdentity ibp_identity_check(const DistributionModel& dist, double a, double r1, double r2) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw DomainError("integration by parts: a must be positive and finite");
    }
    if (!(r1 < r2) || !std::isfinite(r1) || !std::isfinite(r2)) {
        throw DomainError("integration by parts: need finite r1 < r2");
    }
    QuadratureOptions opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-10;

    std::vector<double> pts{r1, r2};
    if (r1 < 0.0 && r2 > 0.0) pts = {r1, 0.0, r2};  // density may kink or blow up at 0

    IbpIdentity out;
    out.lhs = integrate_segments(
                  [&](double y) { return std::exp(a * y) * dist.density(y); }, pts, opts)
                  .value;
    const double integral =
        integrate_segments([&](double z) { return std::exp(a * z) * tail_at(dist, z); }, pts,
                           opts)
            .value;
    out.rhs = a * integral + std::exp(a * r1) * tail_at(dist, r1) -
              std::exp(a * r2) * tail_at(dist, r2);
    out.abs_diff = std::fabs(out.lhs - out.rhs);
    return out;
}

}  // namespace subtilt
