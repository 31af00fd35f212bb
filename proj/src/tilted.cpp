#include "subtilt/tilted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subtilt/convex.hpp"
#include "subtilt/errors.hpp"
#include "subtilt/kernels.hpp"
#include "subtilt/quadrature.hpp"
#include "subtilt/scaling.hpp"

namespace subtilt {

namespace {

enum class Scheme { exp_exact, gauss_exact, generic };

struct InverseCdf {
    std::vector<double> u;      // strictly increasing, inside (0, 1)
    std::vector<double> t;      // knots in phi_alpha coordinates
    std::vector<double> slope;  // dt/du at the knots (monotone cubic)
    double rate_lo = 0.0;       // exponential completion below u.front()
    double rate_hi = 0.0;       // exponential completion above u.back()
};

// Fritsch-Carlson derivatives for a strictly increasing (u, t) table; the
// resulting cubic never overshoots, so the quantile stays monotone.
std::vector<double> pchip_slopes(const std::vector<double>& u, const std::vector<double>& t) {
    const std::size_t n = u.size();
    std::vector<double> d(n);
    auto h = [&](std::size_t i) { return u[i + 1] - u[i]; };
    auto delta = [&](std::size_t i) { return (t[i + 1] - t[i]) / h(i); };
    d[0] = delta(0);
    d[n - 1] = delta(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d0 = delta(i - 1);
        const double d1 = delta(i);
        if (!(d0 > 0.0) || !(d1 > 0.0)) {
            d[i] = 0.0;
            continue;
        }
        const double w1 = 2.0 * h(i) + h(i - 1);
        const double w2 = h(i) + 2.0 * h(i - 1);
        d[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
    }
    return d;
}

double quantile_eval(const InverseCdf& g, double uu) {
    if (uu <= g.u.front()) {
        return g.t.front() + std::log(uu / g.u.front()) / g.rate_lo;
    }
    if (uu >= g.u.back()) {
        return g.t.back() + std::log((1.0 - g.u.back()) / (1.0 - uu)) / g.rate_hi;
    }
    const auto it = std::upper_bound(g.u.begin(), g.u.end(), uu);
    const std::size_t i = static_cast<std::size_t>(it - g.u.begin()) - 1;
    const double h = g.u[i + 1] - g.u[i];
    const double s = (uu - g.u[i]) / h;
    const double s1 = 1.0 - s;
    const double h00 = (1.0 + 2.0 * s) * s1 * s1;
    const double h10 = s * s1 * s1;
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * g.t[i] + h * h10 * g.slope[i] + h01 * g.t[i + 1] + h * h11 * g.slope[i + 1];
}

}  // namespace

struct TiltedLaw::Impl {
    FreeEnergyModel fe;
    DistributionModel dist;
    double eta = 0.0;
    double alpha = 0.5;
    double inv_alpha = 2.0;
    double lambda = 0.0;
    Scheme scheme = Scheme::generic;
    double out_power = 1.0;  // collapsed exponent of the base law
    double w_neg = 0.5;
    double par_neg = 1.0;  // exponential rate resp. half-normal scale, negative side
    double par_pos = 1.0;
    InverseCdf icdf;

    Impl(const FreeEnergyModel& f, const DistributionModel& d) : fe(f), dist(d) {}

    // log density of T = phi_alpha(X) under the tilted law, t != 0.
    double log_tilted_pushforward(double t) const {
        const double at = std::fabs(t);
        const double x = std::pow(at, inv_alpha);
        return eta * t + dist.log_density(std::copysign(x, t)) +
               (inv_alpha - 1.0) * std::log(at) - std::log(alpha) - lambda;
    }

    double scan_cut(double side) const {
        double peak = -std::numeric_limits<double>::infinity();
        for (double t0 : {1e-6, 1e-3, 0.1, 1.0}) {
            peak = std::max(peak, log_tilted_pushforward(side * t0));
        }
        const double floor_gap = std::log(1e-16);
        for (double t = 1.0; t <= 1e9; t *= 2.0) {
            const double g = log_tilted_pushforward(side * t);
            peak = std::max(peak, g);
            if (g + std::log1p(t) <= peak + floor_gap) return t;
        }
        throw GenericSamplerFailure(
            "tilted density does not decay within the quantile-grid scan range");
    }

    void build_inverse_cdf(int knots) {
        const double cut_pos = scan_cut(+1.0);
        const double cut_neg = scan_cut(-1.0);

        // Coarse graded mesh for knot placement: geometric per side to cope
        // with both origin singularities and long tails.
        const int per_side = 384;
        std::vector<double> coarse;
        coarse.reserve(2 * per_side + 3);
        for (int j = per_side; j >= 0; --j) {
            coarse.push_back(-1e-6 * std::pow(cut_neg / 1e-6, static_cast<double>(j) / per_side));
        }
        coarse.push_back(0.0);
        for (int j = 0; j <= per_side; ++j) {
            coarse.push_back(1e-6 * std::pow(cut_pos / 1e-6, static_cast<double>(j) / per_side));
        }

        auto density_t = [this](double t) { return std::exp(log_tilted_pushforward(t)); };
        std::vector<double> cum(coarse.size(), 0.0);
        for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
            const double m = integrate_panel(density_t, coarse[i], coarse[i + 1]).value;
            cum[i + 1] = cum[i] + std::max(0.0, m);
        }
        const double total = cum.back();
        if (!(total > 0.99 && total < 1.01)) {
            throw GenericSamplerFailure("tilted mass tabulation disagrees with the normalizer");
        }

        // Knot targets in cumulative mass between the 5e-13 and 1 - 5e-13
        // quantiles: equal mass across the bulk, geometric ladders through the
        // head and tail.  Reweighted integrands grow exponentially on the side
        // the tilt disfavors, so the extreme quantiles must be resolved in
        // log-mass scale, not swallowed by one equal-mass cell.
        const double ulo = 5e-13;
        const double knee = 1e-3;
        const int ladder = std::min(knots / 4, 160);
        const int bulk = knots - 2 * ladder;
        std::vector<double> targets;
        targets.reserve(static_cast<std::size_t>(knots));
        for (int j = 0; j < ladder; ++j) {
            targets.push_back(ulo * std::pow(knee / ulo, static_cast<double>(j) / ladder));
        }
        for (int k = 0; k < bulk; ++k) {
            targets.push_back(knee + (1.0 - 2.0 * knee) * static_cast<double>(k) / (bulk - 1));
        }
        for (int j = ladder - 1; j >= 0; --j) {
            targets.push_back(1.0 - ulo * std::pow(knee / ulo, static_cast<double>(j) / ladder));
        }

        std::vector<double> placed;
        placed.reserve(targets.size());
        std::size_t cell = 0;
        for (double u_target : targets) {
            const double target = u_target * total;
            while (cell + 2 < cum.size() && cum[cell + 1] < target) ++cell;
            const double span = cum[cell + 1] - cum[cell];
            double tk = coarse[cell];
            if (span > 0.0) {
                const double frac = std::clamp((target - cum[cell]) / span, 0.0, 1.0);
                tk += frac * (coarse[cell + 1] - coarse[cell]);
            }
            if (placed.empty() || tk > placed.back()) placed.push_back(tk);
        }
        if (placed.size() < 8) {
            throw GenericSamplerFailure("tilted quantile grid collapsed to too few knots");
        }

        // Re-measure the mass between the placed knots, then hang exponential
        // tails off both ends for the residual ~5e-13 of mass per side.
        const double head = ulo * total;
        const double tail = ulo * total;
        double acc = head;
        std::vector<double> fu{head}, ft{placed.front()};
        for (std::size_t i = 0; i + 1 < placed.size(); ++i) {
            const double m = integrate_panel(density_t, placed[i], placed[i + 1]).value;
            acc += std::max(0.0, m);
            if (acc > fu.back() && placed[i + 1] > ft.back()) {
                fu.push_back(acc);
                ft.push_back(placed[i + 1]);
            }
        }
        const double grand = acc + tail;
        for (double& v : fu) v /= grand;
        if (fu.size() < 8) {
            throw GenericSamplerFailure("tilted quantile grid collapsed to too few knots");
        }

        icdf.u = std::move(fu);
        icdf.t = std::move(ft);
        icdf.slope = pchip_slopes(icdf.u, icdf.t);
        icdf.rate_lo = density_t(icdf.t.front()) / (grand * icdf.u.front());
        icdf.rate_hi = density_t(icdf.t.back()) / (grand * (1.0 - icdf.u.back()));
        if (!(icdf.rate_lo > 0.0) || !std::isfinite(icdf.rate_lo) || !(icdf.rate_hi > 0.0) ||
            !std::isfinite(icdf.rate_hi)) {
            throw GenericSamplerFailure("tilted tail completion has a degenerate decay rate");
        }
    }
};

TiltedLaw::TiltedLaw(const FreeEnergyModel& fe, double eta, const TiltedOptions& opts) {
    const DistributionModel* dist = fe.distribution();
    if (dist == nullptr) {
        throw Unsupported("tilted law needs a model with an attached distribution");
    }
    if (opts.knots < 64 || opts.knots > (1 << 20)) {
        throw DomainError("tilted law: knot count must lie in [64, 1048576]");
    }
    auto impl = std::make_shared<Impl>(fe, *dist);
    impl->eta = eta;
    impl->alpha = fe.alpha();
    impl->inv_alpha = 1.0 / impl->alpha;
    impl->lambda = fe.lambda(eta);  // domain-checks eta

    const double ap = impl->alpha * dist->power();
    if (!opts.force_generic && dist->root_kind() == DistKind::two_sided_exponential &&
        std::fabs(ap - 1.0) <= 1e-12) {
        // phi_alpha(X) is the root exponential variable itself; the tilted
        // pre-image has density proportional to exp(eta*y - |y|).
        impl->scheme = Scheme::exp_exact;
        impl->out_power = dist->power();
        impl->w_neg = 0.5 * (1.0 - eta);
        impl->par_neg = 1.0 + eta;
        impl->par_pos = 1.0 - eta;
    } else if (!opts.force_generic && dist->root_kind() == DistKind::standard_gaussian &&
               std::fabs(ap - 2.0) <= 1e-12) {
        // phi_alpha(X) = sign(G) G^2; the tilted pre-image is a two-piece
        // half-normal with side masses proportional to (1 -+ 2 eta)^(-1/2).
        impl->scheme = Scheme::gauss_exact;
        impl->out_power = dist->power();
        const double s_neg = 1.0 / std::sqrt(1.0 + 2.0 * eta);
        const double s_pos = 1.0 / std::sqrt(1.0 - 2.0 * eta);
        impl->w_neg = s_neg / (s_neg + s_pos);
        impl->par_neg = s_neg;
        impl->par_pos = s_pos;
    } else {
        impl->scheme = Scheme::generic;
        impl->build_inverse_cdf(opts.knots);
    }
    impl_ = std::move(impl);
}

double TiltedLaw::eta() const { return impl_->eta; }
double TiltedLaw::alpha() const { return impl_->alpha; }
double TiltedLaw::log_normalizer() const { return impl_->lambda; }
const DistributionModel& TiltedLaw::base() const { return impl_->dist; }
const FreeEnergyModel& TiltedLaw::free_energy() const { return impl_->fe; }
bool TiltedLaw::exact_sampler() const { return impl_->scheme != Scheme::generic; }

double TiltedLaw::density(double y) const {
    const double t = signed_power_value(y, impl_->alpha);
    return std::exp(impl_->eta * t - impl_->lambda) * impl_->dist.density(y);
}

double TiltedLaw::log_weight(double y) const {
    return -impl_->eta * signed_power_value(y, impl_->alpha) + impl_->lambda;
}

void TiltedLaw::sample(RandomStream& rng, double* out, std::size_t n) const {
    const Impl& im = *impl_;
    rng.fill(out, n);
    switch (im.scheme) {
        case Scheme::exp_exact:
            kernels::two_piece_exp_quantile(out, im.w_neg, im.par_neg, im.par_pos, out, n);
            break;
        case Scheme::gauss_exact:
            kernels::two_piece_gauss_quantile(out, im.w_neg, im.par_neg, im.par_pos, out, n);
            break;
        case Scheme::generic:
            for (std::size_t i = 0; i < n; ++i) out[i] = quantile_eval(im.icdf, out[i]);
            kernels::signed_power(out, im.inv_alpha, out, n);
            return;
    }
    if (im.out_power != 1.0) {
        kernels::signed_power(out, im.out_power, out, n);
    }
}

std::vector<double> TiltedLaw::sample(RandomStream& rng, std::size_t n) const {
    std::vector<double> out(n);
    sample(rng, out.data(), n);
    return out;
}

double optimal_tilt(const FreeEnergyModel& fe, std::int64_t n, double x) {
    if (n < 1) throw DomainError("optimal tilt: n must be a positive integer");
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("optimal tilt: x must be positive and finite");
    }
    const double slope = std::pow(static_cast<double>(n) * x, fe.alpha());
    return inverse_lambda_prime(fe, slope);
}

}  // namespace subtilt
