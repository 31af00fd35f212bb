#include "subtilt/free_energy.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>

#include "subtilt/errors.hpp"
#include "subtilt/quadrature.hpp"
#include "subtilt/scaling.hpp"

namespace subtilt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_domain_message(const std::string& name, double eta, double xi) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: tilt %.9g lies outside the domain (-xi, xi) with xi = %.9g",
                  name.c_str(), eta, xi);
    return buf;
}

// Numeric free energy evaluated in root-law coordinates.  With X = sign(Y)|Y|^p
// and Y the root law, sign(X)|X|^alpha = sign(Y)|Y|^a for a = p*alpha, so
//   E[exp(eta sign(X)|X|^alpha)] = int_0^inf (e^{eta y^a} + e^{-eta y^a}) rho(y) dy
// over the root density rho, which is smooth away from 0.  Working on the half
// line keeps lambda exactly even in eta.
struct NumericCore {
    DistributionModel dist;
    DistributionModel root;
    double alpha;
    double a;  // p * alpha
    NumericFreeEnergyOptions opts;
    double xi = 0.0;
    bool xi_infinite = false;

    NumericCore(const DistributionModel& d, double alpha_in, const NumericFreeEnergyOptions& o)
        : dist(d), root(d.base()), alpha(alpha_in), a(d.power() * alpha_in), opts(o) {
        detect_domain();
    }

    double log_envelope(double eta, double y) const {
        // Majorant of every moment integrand used here (orders 0..2), in logs.
        const double s = std::fabs(eta) * std::pow(y, a);
        return s + root.log_density(y) + 2.0 * a * std::max(0.0, std::log(y));
    }

    // Doubling scan for the point where the integrand envelope has decayed to
    // tail_floor relative to its running peak.  Returns 0 when the scan passes
    // truncation_cap first (treated as non-integrable).
    double scan_truncation(double eta) const {
        const double log_floor = std::log(opts.tail_floor);
        double peak = 0.0;
        for (double y = 8.0; y <= opts.truncation_cap; y *= 2.0) {
            const double g = log_envelope(eta, y);
            peak = std::max(peak, g);
            if (g <= peak + log_floor) return y;
        }
        return 0.0;
    }

    // Integrability of the tilt via the closed-form tail of phi_alpha(X):
    // the integrand e^{eta z} P(phi_alpha(X) >= z) = e^{eta z + log_tail(y)} with
    // y = z^{1/a} must decay below tail_floor before z reaches the cap.
    bool tilt_integrable_by_tail(double eta) const {
        const double log_floor = std::log(opts.tail_floor);
        double peak = 0.0;
        for (double z = 8.0; z <= opts.truncation_cap; z *= 2.0) {
            const double y = std::pow(z, 1.0 / a);
            const double g = eta * z + root.log_tail(y);
            peak = std::max(peak, g);
            if (g <= peak + log_floor) return true;
        }
        return false;
    }

    bool tilt_integrable(double eta) const {
        if (root.has_closed_tail()) return tilt_integrable_by_tail(eta);
        return scan_truncation(eta) > 0.0;
    }

    // -log of the pushforward density of phi_alpha(X) at z, divided by z: the
    // local exponential decay rate of the tilted coordinate.
    double decay_rate_probe(double z) const {
        const double x = std::exp(std::log(z) / alpha);
        if (!std::isfinite(x)) return kInf;
        const double lz =
            dist.log_density(x) + (1.0 / alpha - 1.0) * std::log(z) - std::log(alpha);
        return -lz / z;
    }

    void detect_domain() {
        // Two-point probe of the decay rate separates the regimes where the
        // pushforward tail is super-exponential (every tilt integrable) or
        // sub-exponential (no positive tilt integrable) from the genuinely
        // exponential window where bisection can locate the edge.
        const double r_low = decay_rate_probe(1e2);
        const double r_high = decay_rate_probe(1e6);
        if (!std::isfinite(r_low) || r_low > 1e6 || r_high > 3.0 * r_low) {
            xi = kInf;
            xi_infinite = true;
            return;
        }
        if (r_high < r_low / 3.0) {
            xi = 0.0;
            return;
        }

        double lo = 0.0, hi = 0.0;
        for (double trial = 1.0; trial <= 1.1e12; trial *= 2.0) {
            if (tilt_integrable(trial)) {
                lo = trial;
            } else {
                hi = trial;
                break;
            }
        }
        if (hi == 0.0) {
            xi = kInf;
            xi_infinite = true;
            return;
        }
        for (int it = 0; it < 200 && (hi - lo) > opts.domain_rel_tol * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (tilt_integrable(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        xi = lo;
    }

    std::vector<double> breakpoints(double upper) const {
        std::vector<double> pts{0.0};
        for (double v = 1.0; v < upper; v *= 4.0) pts.push_back(v);
        pts.push_back(upper);
        return pts;
    }

    double moment_integral(double eta, int order) const {
        const double upper = scan_truncation(eta);
        if (upper <= 0.0) {
            throw QuadratureFailure("tilt integrand still significant at the truncation cap");
        }
        QuadratureOptions qo{opts.quad_abs_tol, opts.quad_rel_tol, opts.max_segments};
        auto f = [&](double y) -> double {
            const double ya = std::pow(y, a);
            const double ld = root.log_density(y);
            const double s = eta * ya;
            const double gp = std::exp(s + ld);
            const double gm = std::exp(-s + ld);
            switch (order) {
                case 0:
                    return gp + gm;
                case 1:
                    return ya * (gp - gm);
                default:
                    return ya * ya * (gp + gm);
            }
        };
        return integrate_segments(f, breakpoints(upper), qo).value;
    }

    double lambda(double eta) const { return std::log(moment_integral(eta, 0)); }

    double lambda_prime(double eta) const {
        return moment_integral(eta, 1) / moment_integral(eta, 0);
    }

    double lambda_second(double eta) const {
        const double z0 = moment_integral(eta, 0);
        const double m1 = moment_integral(eta, 1) / z0;
        return moment_integral(eta, 2) / z0 - m1 * m1;
    }
};

}  // namespace

struct FreeEnergyModel::Impl {
    double alpha = 0.5;
    double xi = 0.0;
    bool xi_infinite = false;
    std::optional<DistributionModel> dist;
    std::string name;
    std::function<double(double)> lam, lam1, lam2;
};

FreeEnergyModel::FreeEnergyModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

double FreeEnergyModel::alpha() const { return impl_->alpha; }
double FreeEnergyModel::xi() const { return impl_->xi; }
bool FreeEnergyModel::xi_is_infinite() const { return impl_->xi_infinite; }

const DistributionModel* FreeEnergyModel::distribution() const {
    return impl_->dist ? &*impl_->dist : nullptr;
}

const std::string& FreeEnergyModel::name() const { return impl_->name; }

namespace {

void require_in_domain(const FreeEnergyModel::Impl& im, double eta) {
    if (eta == 0.0) return;
    if (im.xi_infinite) {
        if (std::isfinite(eta)) return;
        throw DomainError(format_domain_message(im.name, eta, im.xi));
    }
    if (!(std::fabs(eta) < im.xi)) {
        throw DomainError(format_domain_message(im.name, eta, im.xi));
    }
}

}  // namespace

double FreeEnergyModel::lambda(double eta) const {
    require_in_domain(*impl_, eta);
    return impl_->lam(eta);
}

double FreeEnergyModel::lambda_prime(double eta) const {
    require_in_domain(*impl_, eta);
    return impl_->lam1(eta);
}

double FreeEnergyModel::lambda_second(double eta) const {
    require_in_domain(*impl_, eta);
    return impl_->lam2(eta);
}

double FreeEnergyModel::relative_variance(double eta) const {
    if (eta == 0.0) {
        throw UndefinedAtZero("relative variance is undefined at eta = 0 (lambda'(0) = 0)");
    }
    require_in_domain(*impl_, eta);
    const double d1 = impl_->lam1(eta);
    return impl_->lam2(eta) / (d1 * d1);
}

FreeEnergyModel exp_power_model(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw DomainError("exp-power free energy requires p > 1");
    }
    auto im = std::make_shared<FreeEnergyModel::Impl>();
    im->alpha = 1.0 / p;
    im->xi = 1.0;
    im->dist = DistributionModel::power_of(DistributionModel::two_sided_exponential(), p);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "exp-power(p=%g)", p);
    im->name = buf;
    im->lam = [](double e) { return -std::log1p(-e * e); };
    im->lam1 = [](double e) { return 2.0 * e / (1.0 - e * e); };
    im->lam2 = [](double e) {
        const double d = 1.0 - e * e;
        return 2.0 * (1.0 + e * e) / (d * d);
    };
    return FreeEnergyModel(std::move(im));
}

FreeEnergyModel gauss_power_model(double p) {
    if (!(p > 2.0) || !std::isfinite(p)) {
        throw DomainError("gauss-power free energy requires p > 2");
    }
    auto im = std::make_shared<FreeEnergyModel::Impl>();
    im->alpha = 2.0 / p;
    im->xi = 0.5;
    im->dist = DistributionModel::power_of(DistributionModel::standard_gaussian(), p);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "gauss-power(p=%g)", p);
    im->name = buf;
    auto f0 = [](double e) {
        return 1.0 / std::sqrt(1.0 + 2.0 * e) + 1.0 / std::sqrt(1.0 - 2.0 * e);
    };
    auto f1 = [](double e) {
        return -std::pow(1.0 + 2.0 * e, -1.5) + std::pow(1.0 - 2.0 * e, -1.5);
    };
    auto f2 = [](double e) {
        return 3.0 * (std::pow(1.0 + 2.0 * e, -2.5) + std::pow(1.0 - 2.0 * e, -2.5));
    };
    im->lam = [f0](double e) { return std::log(0.5 * f0(e)); };
    im->lam1 = [f0, f1](double e) { return f1(e) / f0(e); };
    im->lam2 = [f0, f1, f2](double e) {
        const double v0 = f0(e), v1 = f1(e);
        return (f2(e) * v0 - v1 * v1) / (v0 * v0);
    };
    return FreeEnergyModel(std::move(im));
}

FreeEnergyModel numeric_model(const DistributionModel& dist, double alpha,
                              const NumericFreeEnergyOptions& opts) {
    (void)ScalingExponent(alpha);  // validates alpha in (0, 1)
    auto core = std::make_shared<const NumericCore>(dist, alpha, opts);
    auto im = std::make_shared<FreeEnergyModel::Impl>();
    im->alpha = alpha;
    im->xi = core->xi;
    im->xi_infinite = core->xi_infinite;
    im->dist = dist;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "numeric(%s, alpha=%g)", dist.name().c_str(), alpha);
    im->name = buf;
    im->lam = [core](double e) { return core->lambda(e); };
    im->lam1 = [core](double e) { return core->lambda_prime(e); };
    im->lam2 = [core](double e) { return core->lambda_second(e); };
    return FreeEnergyModel(std::move(im));
}

FreeEnergyModel truncated_quadratic_model(double xi, double c, double alpha) {
    if (!(xi > 0.0) || !std::isfinite(xi) || !(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("truncated quadratic fixture requires xi > 0 and c > 0");
    }
    (void)ScalingExponent(alpha);
    auto im = std::make_shared<FreeEnergyModel::Impl>();
    im->alpha = alpha;
    im->xi = xi;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "truncated-quadratic(xi=%g, c=%g)", xi, c);
    im->name = buf;
    im->lam = [c](double e) { return c * e * e; };
    im->lam1 = [c](double e) { return 2.0 * c * e; };
    im->lam2 = [c](double) { return 2.0 * c; };
    return FreeEnergyModel(std::move(im));
}

}  // namespace subtilt
