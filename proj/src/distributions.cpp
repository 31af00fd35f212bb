#include "subtilt/distributions.hpp"

#include <cmath>
#include <limits>

#include "subtilt/errors.hpp"
#include "subtilt/kernels.hpp"

namespace subtilt {

namespace {

constexpr double kLog2 = 0.6931471805599453;
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))
constexpr double kInf = std::numeric_limits<double>::infinity();

double root_density(DistKind root, double shape, double y) {
    const double ay = std::fabs(y);
    switch (root) {
        case DistKind::two_sided_exponential:
            return 0.5 * std::exp(-ay);
        case DistKind::standard_gaussian:
            return std::exp(-0.5 * y * y - kLogSqrt2Pi);
        case DistKind::symmetrized_gamma:
            if (ay == 0.0) {
                if (shape > 1.0) return 0.0;
                if (shape == 1.0) return 0.5;
                return kInf;
            }
            return std::exp((shape - 1.0) * std::log(ay) - ay - kLog2 - std::lgamma(shape));
        default:
            throw Error("root law has no closed density");
    }
}

double root_log_density(DistKind root, double shape, double y) {
    const double ay = std::fabs(y);
    switch (root) {
        case DistKind::two_sided_exponential:
            return -ay - kLog2;
        case DistKind::standard_gaussian:
            return -0.5 * y * y - kLogSqrt2Pi;
        case DistKind::symmetrized_gamma:
            if (ay == 0.0) {
                if (shape > 1.0) return -kInf;
                if (shape == 1.0) return -kLog2;
                return kInf;
            }
            return (shape - 1.0) * std::log(ay) - ay - kLog2 - std::lgamma(shape);
        default:
            throw Error("root law has no closed density");
    }
}

bool gamma_shape_is_small_integer(double shape) {
    return shape == std::floor(shape) && shape >= 1.0 && shape <= 512.0;
}

double root_tail(DistKind root, double shape, double z) {
    switch (root) {
        case DistKind::two_sided_exponential:
            return 0.5 * std::exp(-z);
        case DistKind::standard_gaussian:
            return 0.5 * std::erfc(z / std::sqrt(2.0));
        case DistKind::symmetrized_gamma: {
            if (!gamma_shape_is_small_integer(shape)) {
                throw Unsupported("closed-form tail requires an integer Gamma shape");
            }
            // P(Gamma(k,1) >= z) = e^-z * sum_{j<k} z^j / j!
            const int k = static_cast<int>(shape);
            double term = 1.0, sum = 1.0;
            for (int j = 1; j < k; ++j) {
                term *= z / j;
                sum += term;
            }
            return 0.5 * std::exp(-z) * sum;
        }
        default:
            throw Unsupported("no closed-form tail for this law");
    }
}

double root_log_tail(DistKind root, double shape, double z) {
    switch (root) {
        case DistKind::two_sided_exponential:
            return -z - kLog2;
        case DistKind::standard_gaussian: {
            if (z < 25.0) return std::log(0.5 * std::erfc(z / std::sqrt(2.0)));
            // log Mills-ratio expansion of the upper tail
            const double z2 = z * z;
            return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * M_PI) +
                   std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
        }
        case DistKind::symmetrized_gamma: {
            if (!gamma_shape_is_small_integer(shape)) {
                throw Unsupported("closed-form tail requires an integer Gamma shape");
            }
            const int k = static_cast<int>(shape);
            if (z == 0.0) return -kLog2;
            // log of e^-z sum_{j<k} z^j/j!, summed in log space
            const double lz = std::log(z);
            double lmax = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) lmax = std::max(lmax, j * lz - std::lgamma(j + 1.0));
            double acc = 0.0;
            for (int j = 0; j < k; ++j) acc += std::exp(j * lz - std::lgamma(j + 1.0) - lmax);
            return -z - kLog2 + lmax + std::log(acc);
        }
        default:
            throw Unsupported("no closed-form tail for this law");
    }
}

// Marsaglia-Tsang squeeze for Gamma(shape >= 1, scale 1).
double gamma_magnitude_ge1(RandomStream& rng, double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        double un = rng.next();
        double z;
        kernels::normal_quantile(&un, &z, 1);
        const double t = 1.0 + c * z;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = rng.next();
        const double z2 = z * z;
        if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
        if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double gamma_magnitude(RandomStream& rng, double shape) {
    if (shape >= 1.0) return gamma_magnitude_ge1(rng, shape);
    const double g = gamma_magnitude_ge1(rng, shape + 1.0);
    const double u = rng.next();
    return g * std::pow(u, 1.0 / shape);
}

}  // namespace

DistributionModel DistributionModel::two_sided_exponential() {
    return {DistKind::two_sided_exponential, 1.0, 1.0};
}

DistributionModel DistributionModel::standard_gaussian() {
    return {DistKind::standard_gaussian, 1.0, 1.0};
}

DistributionModel DistributionModel::symmetrized_gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw DomainError("Gamma shape must be positive and finite");
    }
    return {DistKind::symmetrized_gamma, shape, 1.0};
}

DistributionModel DistributionModel::power_of(const DistributionModel& base, double p) {
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw DomainError("power exponent must be positive and finite");
    }
    return {base.root_, base.shape_, base.p_ * p};
}

DistKind DistributionModel::kind() const {
    return p_ == 1.0 ? root_ : DistKind::power_of;
}

DistributionModel DistributionModel::base() const {
    return {root_, shape_, 1.0};
}

double DistributionModel::density(double x) const {
    if (p_ == 1.0) return root_density(root_, shape_, x);
    const double ax = std::fabs(x);
    if (ax == 0.0) {
        // Near zero the density behaves like |x|^(kappa/p - 1) with kappa the
        // root's own power of |y| plus one.
        const double kappa = (root_ == DistKind::symmetrized_gamma) ? shape_ : 1.0;
        const double e0 = kappa / p_ - 1.0;
        if (e0 < 0.0) return kInf;
        if (e0 > 0.0) return 0.0;
        switch (root_) {
            case DistKind::two_sided_exponential:
                return 0.5 / p_;
            case DistKind::standard_gaussian:
                return std::exp(-kLogSqrt2Pi) / p_;
            default:
                return std::exp(-kLog2 - std::lgamma(shape_)) / p_;
        }
    }
    const double y = std::pow(ax, 1.0 / p_);
    return root_density(root_, shape_, y) * (y / (ax * p_));
}

double DistributionModel::log_density(double x) const {
    if (p_ == 1.0) return root_log_density(root_, shape_, x);
    const double ax = std::fabs(x);
    if (ax == 0.0) {
        const double d0 = density(0.0);
        if (d0 == 0.0) return -kInf;
        if (d0 == kInf) return kInf;
        return std::log(d0);
    }
    const double y = std::pow(ax, 1.0 / p_);
    return root_log_density(root_, shape_, y) + (1.0 / p_ - 1.0) * std::log(ax) - std::log(p_);
}

bool DistributionModel::has_closed_tail() const {
    if (root_ == DistKind::symmetrized_gamma) return gamma_shape_is_small_integer(shape_);
    return true;
}

double DistributionModel::tail(double z) const {
    if (!(z >= 0.0)) {
        throw DomainError("tail is defined for z >= 0");
    }
    if (p_ == 1.0) return root_tail(root_, shape_, z);
    return root_tail(root_, shape_, std::pow(z, 1.0 / p_));
}

double DistributionModel::log_tail(double z) const {
    if (!(z >= 0.0)) {
        throw DomainError("tail is defined for z >= 0");
    }
    if (p_ == 1.0) return root_log_tail(root_, shape_, z);
    return root_log_tail(root_, shape_, std::pow(z, 1.0 / p_));
}

double DistributionModel::abs_moment(double r) const {
    if (!(r >= 0.0)) {
        throw DomainError("absolute moment order must be nonnegative");
    }
    const double s = p_ * r;  // E|X|^r = E|Y|^(p r) for the root variable Y
    switch (root_) {
        case DistKind::two_sided_exponential:
            return std::exp(std::lgamma(s + 1.0));
        case DistKind::standard_gaussian:
            return std::exp(0.5 * s * kLog2 + std::lgamma(0.5 * (s + 1.0)) - 0.5 * std::log(M_PI));
        case DistKind::symmetrized_gamma:
            return std::exp(std::lgamma(shape_ + s) - std::lgamma(shape_));
        default:
            throw Error("unreachable root kind");
    }
}

void DistributionModel::sample(RandomStream& rng, double* out, std::size_t n) const {
    switch (root_) {
        case DistKind::two_sided_exponential:
            rng.fill(out, n);
            kernels::two_piece_exp_quantile(out, 0.5, 1.0, 1.0, out, n);
            break;
        case DistKind::standard_gaussian:
            rng.fill(out, n);
            kernels::normal_quantile(out, out, n);
            break;
        case DistKind::symmetrized_gamma:
            for (std::size_t i = 0; i < n; ++i) {
                const double s = rng.next() < 0.5 ? -1.0 : 1.0;
                out[i] = s * gamma_magnitude(rng, shape_);
            }
            break;
        default:
            throw Error("unreachable root kind");
    }
    if (p_ != 1.0) {
        kernels::signed_power(out, p_, out, n);
    }
}

std::vector<double> DistributionModel::sample(RandomStream& rng, std::size_t n) const {
    std::vector<double> out(n);
    sample(rng, out.data(), n);
    return out;
}

std::string DistributionModel::name() const {
    std::string root;
    switch (root_) {
        case DistKind::two_sided_exponential:
            root = "two-sided-exponential";
            break;
        case DistKind::standard_gaussian:
            root = "standard-gaussian";
            break;
        case DistKind::symmetrized_gamma:
            root = "symmetrized-gamma(shape=" + std::to_string(shape_) + ")";
            break;
        default:
            root = "unknown";
            break;
    }
    if (p_ == 1.0) return root;
    return "power(" + root + ", p=" + std::to_string(p_) + ")";
}

}  // namespace subtilt
