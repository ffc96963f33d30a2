#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "shotbudget/qcore.hpp"
#include "shotbudget/qsp.hpp"

namespace shotbudget {

// How a term's expectation is obtained when estimating variances: analytic
// terms use the exact statevector value, monte_carlo terms are estimated
// from simulated single-shot outcomes.
enum class SamplingMode { analytic, monte_carlo };

struct DecompositionTerm {
    double coefficient = 0.0;  // nonnegative; signs live in the operator
    HermitianOperator op;      // spectral norm at most 1
    SamplingMode mode = SamplingMode::analytic;
    std::string label;
};

// O = identity_shift * I + sum_x coefficient_x * op_x
struct Decomposition {
    HermitianOperator target;
    double identity_shift = 0.0;
    std::vector<DecompositionTerm> terms;
    // Largest entrywise deviation between the target and the reconstructed
    // operator. Exact schemes enforce a tight bound; approximate ones only
    // record it.
    double reconstruction_residual = 0.0;
};

// Term-by-term split of sum_j w_j Z_j into single-qubit reflections.
Decomposition pauli_decomposition(const std::vector<double>& weights);

// Threshold reflections sgn(O - mu_x) with mu_x between consecutive
// eigenvalues; reconstructs any Hermitian operator exactly.
Decomposition xi_decomposition(const HermitianOperator& op);

// Trigonometric interpolation sum_l c_l sin(O t_l) at t_l = 2 pi l / (2R+1);
// exact on operators with integer spectrum bounded by R.
Decomposition gpsk_decomposition(const HermitianOperator& op, int order);

// Interpolation coefficients solved from sum_l c_l sin(j t_l) = j.
std::vector<double> gpsk_solved_coefficients(int order);
// Alternating closed form 1 / (2R sin^2(t_l/2)) with sign (-1)^(l-1).
std::vector<double> gpsk_closed_form_coefficients(int order);
// Coefficients read off the derivative of the smoothed Dirichlet kernel.
std::vector<double> gpsk_kernel_derivative_coefficients(int order);

// Variance of the optimally allocated estimator for a decomposition,
// m shots in total.
double gpsk_variance(const Decomposition& decomp, const QuantumState& psi,
                     long long shots);
// Same quantity with the closed-form coefficient magnitudes substituted.
double gpsk_closed_form_variance(const HermitianOperator& op, int order,
                                 const QuantumState& psi, long long shots);

// Xi-style split with each threshold reflection replaced by an odd
// polynomial sign approximant evaluated at (O - mu_x) * t_x, where t_x
// scales the shifted spectrum into (-pi, pi) with a safety margin. The
// approximant has forced nodes at 0 and pi, so both the nearest and the
// farthest mapped eigenvalue sit next to a transition region; at the
// default margin the far end stays clear of the pi node without pushing
// the near end into the zero node.
Decomposition sgn_decomposition(const HermitianOperator& op,
                                const SignApproximation& approx,
                                double t_margin = 0.15);
// Oracle hook: same construction with an arbitrary odd profile function.
Decomposition sgn_decomposition_with(const HermitianOperator& op,
                                     const std::function<double(double)>& profile,
                                     double t_margin = 0.15);

// Affinely rescale a term's operator onto spectral range [-1, 1]. Returns
// the identity shift released by the recentering and the rescaled term.
std::pair<double, DecompositionTerm> center_term(const DecompositionTerm& term);

// True when every eigenvalue squares to 1 within tolerance.
bool is_reflection(const HermitianOperator& op, double tolerance = 1e-9);

struct SplitReport {
    bool reconstructs = false;      // sum c_i A_i matches c A entrywise
    bool norm_preserving = false;   // sum c_i == c
    bool norm_increasing = false;   // sum c_i >  c
    double coefficient_gap = 0.0;   // sum c_i - c
};

SplitReport validate_split(const DecompositionTerm& parent,
                           const std::vector<DecompositionTerm>& children);

// c * sqrt(1 - <A>^2), the shot weight a term contributes to the cost.
double term_shot_weight(const DecompositionTerm& term, const QuantumState& psi);

// epsilon^-2 * (sum_x term_shot_weight)^2, the total shots needed to reach
// additive error epsilon under optimal allocation.
double decomposition_cost(const Decomposition& decomp, const QuantumState& psi,
                          double epsilon);

// identity_shift + sum_x c_x <op_x>, evaluated exactly.
double reconstruct_expectation(const Decomposition& decomp,
                               const QuantumState& psi);

// Estimator variance sum_x c_x^2 (1 - e_x^2) / m_x with exact term
// expectations; shots must list one positive count per term (zero only for
// zero-coefficient terms).
double decomposition_variance(const Decomposition& decomp,
                              const QuantumState& psi,
                              const std::vector<long long>& shots);

// Same, but monte_carlo terms replace e_x with a simulated estimate drawn
// from m_x single-shot outcomes.
double sampled_decomposition_variance(const Decomposition& decomp,
                                      const QuantumState& psi,
                                      const std::vector<long long>& shots,
                                      std::uint64_t seed);

// Probe states used when hunting for a witness against a norm-increasing
// split: extremal eigenvectors of the parent operator and their balanced
// superposition.
std::vector<QuantumState> extremal_probe_states(const HermitianOperator& op);

}  // namespace shotbudget
