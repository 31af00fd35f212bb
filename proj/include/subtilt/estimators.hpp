#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "subtilt/distributions.hpp"
#include "subtilt/free_energy.hpp"

namespace subtilt {

enum class EventShape { tail_at_least, ball };

// The event is on the empirical mean: {S_n/n >= x} resp. {|S_n/n - x| <= delta}.
struct EventSpec {
    std::int64_t n = 1;
    double x = 1.0;
    EventShape shape = EventShape::tail_at_least;
    double delta = 0.0;  // ball half-width; a ball needs 0 < delta < x
};

enum class Method { naive, esscher, shift };

struct EstimatorResult {
    Method method = Method::naive;
    std::int64_t n = 0;
    double x = 0.0;
    EventShape shape = EventShape::tail_at_least;
    double delta = 0.0;
    std::int64_t replications = 0;
    std::uint64_t seed = 0;
    double estimate = 0.0;
    double standard_error = 0.0;
    double effective_sample_size = 0.0;
    double tilt_eta = 0.0;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    std::int64_t discarded_replications = 0;

    // -log(estimate) / n^alpha; +infinity when the estimate is zero.
    double empirical_rate() const;
};

std::string estimator_csv_header();
std::string estimator_csv_row(const EstimatorResult& r);

EstimatorResult naive_mc(const DistributionModel& dist, const EventSpec& event,
                         std::int64_t replications, std::uint64_t seed,
                         double alpha = std::numeric_limits<double>::quiet_NaN(),
                         int threads = 1);

struct EsscherOptions {
    // NaN means: solve for the tilt that centers the scaled sum on the target.
    double eta_override = std::numeric_limits<double>::quiet_NaN();
    int threads = 1;
};

// Replaces X_1 by a tilted draw and reweights; X_2..X_n stay untouched.
EstimatorResult esscher_is(const DistributionModel& dist, const FreeEnergyModel& fe,
                           const EventSpec& event, std::int64_t replications, std::uint64_t seed,
                           const EsscherOptions& opts = {});

// Replaces X_1 by X_1 + n x with the density-ratio weight.  Replications whose
// log weight exceeds 690 are discarded and counted instead of overflowing.
EstimatorResult shift_is(const DistributionModel& dist, const EventSpec& event,
                         std::int64_t replications, std::uint64_t seed,
                         double alpha = std::numeric_limits<double>::quiet_NaN(),
                         int threads = 1);

struct RateSweepPoint {
    std::int64_t n = 0;
    double estimate = 0.0;
    double standard_error = 0.0;
    double empirical_rate = 0.0;
    double theory_rate = 0.0;  // xi * x^alpha
};

std::vector<RateSweepPoint> rate_sweep(const DistributionModel& dist, const FreeEnergyModel& fe,
                                       double x, const std::vector<std::int64_t>& n_grid,
                                       std::int64_t replications, std::uint64_t seed,
                                       int threads = 1);

std::string rate_sweep_csv_header();
std::string rate_sweep_csv_row(const RateSweepPoint& p);

struct BigJumpDiagnostics {
    double a1 = 0.0;  // P(max_i X_i >= n x)
    bool a1_closed_form = false;
    double a2 = 0.0;  // P(max_i X_i < n x, S_n/n >= x)
    double conditional_max_fraction = 0.0;  // P(max_i X_i >= 0.8 n x | S_n/n >= x)
};

BigJumpDiagnostics big_jump_diagnostics(const DistributionModel& dist, const FreeEnergyModel& fe,
                                        const EventSpec& event, std::int64_t replications,
                                        std::uint64_t seed, int threads = 1);

// P(X >= z) <= exp(-eta z^alpha + lambda(eta)) for 0 < eta < xi.
double subexp_tchebychev_bound(const FreeEnergyModel& fe, double eta, double z);

// Two-sided exponential-moment bound on P(|phi_alpha(X~eta) - lambda'(eta)| > a)
// using moment shifts of size k on both sides; needs |eta| + k < xi.
double symmetrized_tchebychev_bound(const FreeEnergyModel& fe, double eta, double k, double a);

struct IbpIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
};

// E[exp(aX); r1 <= X <= r2] against its boundary-plus-integral tail form;
// both sides by quadrature, tails closed-form where available.
IbpIdentity ibp_identity_check(const DistributionModel& dist, double a, double r1, double r2);

}  // namespace subtilt
