#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shotbudget/qcore.hpp"

namespace shotbudget {

// Binary measurement {Pi_plus, Pi_minus} with Pi_plus + Pi_minus = identity.
struct BinaryPovm {
    HermitianOperator pi_plus;
    HermitianOperator pi_minus;
};

// Pi_pm = (identity +- re_u)/2. Requires all eigenvalues of re_u in [-1, 1].
BinaryPovm povm_from_re_u(const HermitianOperator& re_u);
// re_u = Pi_plus - Pi_minus; validates PSD and completeness first.
HermitianOperator re_u_from_povm(const BinaryPovm& povm);

// Outcome probabilities p_pm = (1 +- <re_u>)/2 of the one-ancilla test.
std::pair<double, double> ht_probabilities(const HermitianOperator& re_u,
                                           const QuantumState& psi);
// Estimator variance (1 - <re_u>^2)/m after m repetitions.
double ht_variance(const HermitianOperator& re_u, const QuantumState& psi,
                   std::uint64_t m);

struct SampleRecord {
    std::uint64_t plus = 0;
    std::uint64_t minus = 0;
    std::uint64_t zero = 0;
    std::uint64_t total = 0;
};

SampleRecord ht_sample(const HermitianOperator& re_u, const QuantumState& psi,
                       std::uint64_t m, std::uint64_t seed);
double sample_mean(const SampleRecord& record);

// Echo-verified statistics. The verified outcomes carry values +-1 and the
// rejected outcome 0; every preparation counts as one shot.
struct EvStatistics {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double p_zero = 0.0;
    double variance = 0.0;
};

EvStatistics ev_statistics(const HermitianOperator& re_u,
                           const QuantumState& psi, std::uint64_t m);
SampleRecord ev_sample(const HermitianOperator& re_u, const QuantumState& psi,
                       std::uint64_t m, std::uint64_t seed);

// Reference-state echo without an ancilla. psi_ref must be an eigenstate of
// the canonical unitary with phase phi_ref and orthogonal to psi. Returns
// <psi| Re(U exp(-i phi_ref)) |psi>.
double cfev_expectation(const HermitianOperator& re_u, const QuantumState& psi,
                        const QuantumState& psi_ref, double phi_ref);

// Joint echo over K commuting reflections. Entry sigma of the table is the
// probability of verifying sign string sigma, where bit k of the index is 0
// for sigma_k = +1 and 1 for sigma_k = -1. The table may sum to less than
// one; the remainder is the verification failure probability.
std::vector<double> parallel_ev_probabilities(
    const std::vector<HermitianOperator>& reflections, const QuantumState& psi);

struct ParallelEvResult {
    double estimate = 0.0;
    double variance_propagated = 0.0;
    double variance_marginal_form = 0.0;
    bool clipped = false;
};

// Estimate of <re_u_j> from the sign-string table, with its variance after m
// shots computed two ways: first-order multinomial propagation through the
// square-root estimator (authoritative) and the closed form in the marginal
// probabilities, (2^{K-1}(p_{j+} + p_{j-}) - estimate)/m, for comparison.
ParallelEvResult parallel_ev_estimate_and_variance(
    const std::vector<double>& table, int j, std::uint64_t m);

}  // namespace shotbudget
