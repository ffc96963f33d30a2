#pragma once

#include <cstdint>
#include <vector>

#include "shotbudget/qcore.hpp"

namespace shotbudget {

struct AnsatzConfig {
    int n_qubits = 0;
    int n_layers = 5;
    std::uint64_t seed = 0;
};

// Hardware-efficient layered state: each layer applies R_Y(theta) followed by
// R_Z(theta') on every qubit, angles i.i.d. uniform over [0, 2 pi), then a
// linear chain of controlled-Z gates (qubit i with qubit i+1). Identical
// configs produce bit-identical amplitudes.
QuantumState random_he_state(const AnsatzConfig& config);

// Same circuit with every rotation angle forced to zero; the chain of
// controlled-Z gates then acts trivially and the result is |0...0>.
QuantumState zero_angle_he_state(int n_qubits, int n_layers);

// Ensemble of states with one derived RNG substream per state index, so any
// prefix of the ensemble is stable under changes to n_states.
std::vector<QuantumState> he_ensemble(int n_qubits, int n_layers,
                                      std::uint64_t seed, int n_states);

}  // namespace shotbudget
