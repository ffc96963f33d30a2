#pragma once

#include <cstdint>
#include <vector>

#include "shotbudget/decomp.hpp"
#include "shotbudget/qcore.hpp"

namespace shotbudget {

struct AllocationPlan {
    std::vector<double> ratios;    // sum to 1
    long long total_shots = 0;
    std::vector<long long> shots;  // largest-remainder rounding, sums to total
    bool degenerate = false;       // every term weight vanished
};

// Shots proportional to c_x * sqrt(1 - e_x^2). Terms whose weight vanishes
// (the state sits in a reflection eigenspace) receive a small floor
// allocation of max(1, floor_fraction * M) shots instead of zero, since a
// vanishing weight may be an artifact of the prior estimate.
AllocationPlan optimal_allocation(const std::vector<double>& coefficients,
                                  const std::vector<double>& expectations,
                                  long long total_shots,
                                  double floor_fraction = 1e-4);

struct AdaptiveResult {
    double shot_variance = 0.0;     // M * Var of the allocated estimator
    std::vector<double> ratios;
    std::vector<double> estimates;  // prior-phase expectation estimates
    bool clipped = false;           // some estimate was clamped off +-1
};

// Two-phase pipeline: a prior round allocated proportionally to the
// coefficients estimates every term expectation, the estimates fix the
// allocation ratios, and the shot-count-independent product M * Var is
// reported. Analytic terms contribute their exact variance; monte_carlo
// terms keep the sampled estimate. Prior shots are not counted in the
// reported product.
AdaptiveResult adaptive_shot_variance(const Decomposition& decomp,
                                      const QuantumState& psi,
                                      long long prior_shots,
                                      std::uint64_t seed);

// Same pipeline with exact expectations throughout; equals the square of the
// summed term shot weights.
double exact_shot_variance(const Decomposition& decomp, const QuantumState& psi);

}  // namespace shotbudget
