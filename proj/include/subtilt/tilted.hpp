#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "subtilt/distributions.hpp"
#include "subtilt/free_energy.hpp"
#include "subtilt/rng.hpp"

namespace subtilt {

struct TiltedOptions {
    bool force_generic = false;  // skip the closed-form samplers (benchmarks, tests)
    int knots = 4096;            // inverse-CDF grid size for the generic sampler
};

// The law with density exp(eta * phi_alpha(y) - lambda(eta)) relative to the
// base density.  The normalizer comes from the paired free-energy model so
// that weights and samplers cannot disagree.  Immutable and cheap to copy.
class TiltedLaw {
public:
    TiltedLaw(const FreeEnergyModel& fe, double eta, const TiltedOptions& opts = {});

    double eta() const;
    double alpha() const;
    double log_normalizer() const;  // lambda(eta)
    const DistributionModel& base() const;
    const FreeEnergyModel& free_energy() const;

    double density(double y) const;

    // log of the Radon-Nikodym derivative d(base)/d(tilted) at y:
    // -eta * phi_alpha(y) + lambda(eta).
    double log_weight(double y) const;

    // True when draws come from a closed-form two-piece quantile rather than
    // the numeric inverse-CDF grid.
    bool exact_sampler() const;

    void sample(RandomStream& rng, double* out, std::size_t n) const;
    std::vector<double> sample(RandomStream& rng, std::size_t n) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// eta_n solving lambda'(eta) = (n*x)^alpha — the tilt that centers the
// scaled sum on the target level.
double optimal_tilt(const FreeEnergyModel& fe, std::int64_t n, double x);

}  // namespace subtilt
