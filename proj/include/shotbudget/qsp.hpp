#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "shotbudget/qcore.hpp"

namespace shotbudget {

// Antisymmetric phase vector phi_0..phi_R driving the single-qubit signal
// circuit; delta is the resolution the phases were tuned for.
struct QspPhases {
    int degree = 0;
    std::vector<double> phases;
    double delta = 0.0;
};

void validate_phases(const QspPhases& p);

struct SignApproximation {
    QspPhases phases;
    double loss = 0.0;
    double max_pointwise_error = 0.0;
    bool converged = false;
};

// Top-left block element of the signal circuit
// A * B(phi_R) * prod_r [C(omega) * B(phi_{R-r})]
// with B(phi) = exp(-i X phi/2), C(omega) = diag(exp(-i omega/2),
// exp(+i omega/2)) and A = -iY. With antisymmetric phases the value is real
// and odd in omega.
cplx s_phi(const std::vector<double>& phases, double omega);

// The real odd component used to approximate sgn(omega).
double sign_approximant(const std::vector<double>& phases, double omega);

// Expands the free half of an antisymmetric phase vector to the full list;
// the middle phase of an even-degree vector is pinned to zero.
std::vector<double> assemble_phases(const std::vector<double>& free_half,
                                    int degree);

// Mean |sgn(omega) - f(omega)| over a uniform grid on [delta, pi - delta].
// grid_points = 0 selects the default 50 R + 64.
double qsp_loss(const std::vector<double>& phases, double delta,
                int grid_points = 0);
// Mean squared deviation variant on the same grid.
double qsp_loss_squared(const std::vector<double>& phases, double delta,
                        int grid_points = 0);

// Simplex descent over the free half-phases: five seeded random restarts
// plus a warm start grown from the optimized degree R-2 phases.
SignApproximation optimize_phases(int degree, double delta,
                                  std::uint64_t seed);

// Optimizes every degree in [degree_min, degree_max], sharing the
// warm-start chains of both parities across the sweep.
std::vector<SignApproximation> optimize_range(int degree_min, int degree_max,
                                              double delta,
                                              std::uint64_t seed);

}  // namespace shotbudget
