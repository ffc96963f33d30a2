#include "shotbudget/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shotbudget/errors.hpp"
#include "shotbudget/measure.hpp"
#include "shotbudget/rng.hpp"

namespace shotbudget {

namespace {

// Round nonnegative real targets (summing to total) to integers that sum to
// exactly total: floor everything, then hand out the remainder by largest
// fractional part, lowest index first on ties.
std::vector<long long> largest_remainder(const std::vector<double>& targets,
                                         long long total) {
    std::vector<long long> out(targets.size(), 0);
    std::vector<std::pair<double, std::size_t>> fractions;
    long long assigned = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double t = std::max(0.0, targets[i]);
        out[i] = static_cast<long long>(std::floor(t));
        assigned += out[i];
        fractions.emplace_back(t - std::floor(t), i);
    }
    std::stable_sort(fractions.begin(), fractions.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    long long leftover = total - assigned;
    for (std::size_t k = 0; leftover > 0; k = (k + 1) % fractions.size()) {
        ++out[fractions[k].second];
        --leftover;
    }
    return out;
}

// A prior round with m shots cannot pin |<Re U>| closer to one than its own
// sampling resolution, so the clamp scales with 1/m rather than sitting at a
// fixed epsilon. A fixed 1e-9 clamp starves nearly-deterministic terms of
// shots so hard that their true residual variance dominates the reported
// product.
double clip_estimate(double e, long long prior_count, bool& clipped) {
    const double bound = std::min(
        1.0 - 1e-9, 1.0 - 0.5 / static_cast<double>(std::max(1ll, prior_count)));
    if (e > bound || e < -bound) {
        clipped = true;
        return std::clamp(e, -bound, bound);
    }
    return e;
}

}  // namespace

AllocationPlan optimal_allocation(const std::vector<double>& coefficients,
                                  const std::vector<double>& expectations,
                                  long long total_shots,
                                  double floor_fraction) {
    const std::size_t n = coefficients.size();
    if (n == 0) throw ConfigError("allocation needs at least one term");
    if (expectations.size() != n) {
        throw ConfigError("one expectation per coefficient is required");
    }
    if (total_shots < 1) throw ConfigError("total shots must be positive");
    if (!(floor_fraction >= 0.0 && floor_fraction < 1.0)) {
        throw ConfigError("floor_fraction must lie in [0, 1)");
    }

    std::vector<double> weights(n, 0.0);
    double weight_sum = 0.0;
    std::size_t positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(coefficients[i] >= 0.0) || std::abs(expectations[i]) > 1.0 + 1e-12) {
            throw ConfigError("coefficients must be nonnegative and "
                              "expectations within [-1, 1]");
        }
        const double e = std::clamp(expectations[i], -1.0, 1.0);
        weights[i] = coefficients[i] * std::sqrt(std::max(0.0, 1.0 - e * e));
        weight_sum += weights[i];
        if (weights[i] > 0.0) ++positive;
    }

    AllocationPlan plan;
    plan.total_shots = total_shots;
    const double m = static_cast<double>(total_shots);

    if (positive == 0) {
        plan.degenerate = true;
        plan.ratios.assign(n, 1.0 / static_cast<double>(n));
        std::vector<double> targets(n, m / static_cast<double>(n));
        plan.shots = largest_remainder(targets, total_shots);
        return plan;
    }

    const long long floor_shots = std::max<long long>(
        1, static_cast<long long>(std::floor(m * floor_fraction)));
    const long long reserved =
        static_cast<long long>(n - positive) * floor_shots;
    if (total_shots - reserved < static_cast<long long>(positive)) {
        throw ConfigError("total shots cannot cover every weighted term");
    }

    std::vector<double> targets(n, 0.0);
    const double spendable = m - static_cast<double>(reserved);
    for (std::size_t i = 0; i < n; ++i) {
        targets[i] = weights[i] > 0.0
                         ? spendable * weights[i] / weight_sum
                         : static_cast<double>(floor_shots);
    }
    plan.ratios.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.ratios[i] = targets[i] / m;
    plan.shots = largest_remainder(targets, total_shots);

    // Rounding may starve a term with a tiny positive weight; feed it from
    // the largest bucket.
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] > 0.0 && plan.shots[i] == 0) {
            const std::size_t donor = static_cast<std::size_t>(std::distance(
                plan.shots.begin(),
                std::max_element(plan.shots.begin(), plan.shots.end())));
            --plan.shots[donor];
            ++plan.shots[i];
        }
    }
    return plan;
}

AdaptiveResult adaptive_shot_variance(const Decomposition& decomp,
                                      const QuantumState& psi,
                                      long long prior_shots,
                                      std::uint64_t seed) {
    const std::size_t n = decomp.terms.size();
    AdaptiveResult result;
    if (n == 0) return result;

    double coeff_sum = 0.0;
    for (const DecompositionTerm& term : decomp.terms) {
        if (term.coefficient < 0.0) {
            throw ConfigError("term coefficients must be nonnegative");
        }
        coeff_sum += term.coefficient;
    }
    if (coeff_sum <= 0.0) return result;

    std::vector<double> prior_targets(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        prior_targets[x] = static_cast<double>(prior_shots) *
                           decomp.terms[x].coefficient / coeff_sum;
    }
    const std::vector<long long> prior = largest_remainder(prior_targets, prior_shots);
    for (std::size_t x = 0; x < n; ++x) {
        if (decomp.terms[x].coefficient > 0.0 && prior[x] < 10) {
            throw ConfigError("prior round needs at least 10 shots per term");
        }
    }

    result.estimates.resize(n, 0.0);
    std::vector<double> weights(n, 0.0);
    double weight_sum = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        if (decomp.terms[x].coefficient == 0.0) continue;
        const SampleRecord rec =
            ht_sample(decomp.terms[x].op, psi, prior[x],
                      derive_seed(seed, static_cast<std::uint64_t>(x)));
        const double estimate =
            clip_estimate(sample_mean(rec), prior[x], result.clipped);
        result.estimates[x] = estimate;
        weights[x] = decomp.terms[x].coefficient *
                     std::sqrt(std::max(0.0, 1.0 - estimate * estimate));
        weight_sum += weights[x];
    }

    result.ratios.resize(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        result.ratios[x] = weights[x] / weight_sum;
    }

    for (std::size_t x = 0; x < n; ++x) {
        const DecompositionTerm& term = decomp.terms[x];
        if (term.coefficient == 0.0) continue;
        double variance;
        if (term.mode == SamplingMode::analytic) {
            const double e = expectation(term.op, psi);
            variance = term.coefficient * term.coefficient * (1.0 - e * e);
        } else {
            const double e = result.estimates[x];
            variance = term.coefficient * term.coefficient * (1.0 - e * e);
        }
        if (variance > 0.0) {
            result.shot_variance += variance / result.ratios[x];
        }
    }
    return result;
}

double exact_shot_variance(const Decomposition& decomp, const QuantumState& psi) {
    double weight = 0.0;
    for (const DecompositionTerm& term : decomp.terms) {
        weight += term_shot_weight(term, psi);
    }
    return weight * weight;
}

}  // namespace shotbudget
