#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subtilt/free_energy.hpp"

namespace subtilt {

struct CheckConfig {
    int grid_points = 64;
    // The approach grid runs from xi*(1 - start_offset_fraction) to
    // xi*(1 - boundary_fraction), geometric in the distance to xi.
    double start_offset_fraction = 1e-3;
    double boundary_fraction = 1e-6;
    double steepness_threshold = 1e5;
    double slack = 1e-9;
    double omega_safety = 1.05;
};

struct AssumptionReport {
    double xi = 0.0;
    bool xi_infinite = false;
    bool domain_nontrivial_bounded = false;

    bool steepness_ok = false;
    std::vector<double> grid;
    std::vector<double> lambda_prime_sequence;

    bool xi0_found = false;
    double xi0 = 0.0;
    double omega = 0.0;
    bool omega_unverified = true;
    bool lambda_second_nondecreasing = false;
    bool v_nonincreasing = false;

    bool all_ok() const;
    std::string to_json() const;
};

// Evaluates the curvature conditions on a geometric grid approaching xi:
// divergence of lambda' (steepness), monotone lambda'', and non-increasing
// relative variance V past some xi0.  Grid evidence, not a proof.  An
// unbounded domain yields a report with xi_infinite set (the rate function
// degenerates at this scale); xi = 0 is a DomainError.
AssumptionReport check_assumption(const FreeEnergyModel& fe, const CheckConfig& config = {});

struct RefinedConditionPoint {
    std::int64_t n = 0;
    double ratio = 0.0;  // V(eta_n) / n^alpha with eta_n the optimal tilt for n*x
};

struct RefinedConditionResult {
    std::vector<RefinedConditionPoint> points;
    bool decay_evidence = false;  // last ratio below half the first
};

RefinedConditionResult refined_condition(const FreeEnergyModel& fe, double x,
                                         const std::vector<std::int64_t>& n_grid);

}  // namespace subtilt
