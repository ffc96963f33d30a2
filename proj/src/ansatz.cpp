#include "shotbudget/ansatz.hpp"

#include <cmath>
#include <numbers>

#include "shotbudget/errors.hpp"
#include "shotbudget/rng.hpp"

namespace shotbudget {

namespace {

void check_config(int n_qubits, int n_layers) {
    if (n_qubits < 1 || n_qubits > 26) {
        throw ConfigError("qubit count must be between 1 and 26");
    }
    if (n_layers < 1) {
        throw ConfigError("layer count must be at least 1");
    }
}

void rotate_y(std::vector<cplx>& amp, int qubit, double theta) {
    const std::size_t bit = std::size_t{1} << qubit;
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    for (std::size_t i = 0; i < amp.size(); ++i) {
        if (i & bit) continue;
        const cplx a0 = amp[i];
        const cplx a1 = amp[i | bit];
        amp[i] = c * a0 - s * a1;
        amp[i | bit] = s * a0 + c * a1;
    }
}

void rotate_z(std::vector<cplx>& amp, int qubit, double theta) {
    const std::size_t bit = std::size_t{1} << qubit;
    const cplx lower(std::cos(0.5 * theta), -std::sin(0.5 * theta));
    const cplx upper = std::conj(lower);
    for (std::size_t i = 0; i < amp.size(); ++i) {
        amp[i] *= (i & bit) ? upper : lower;
    }
}

void cz_chain(std::vector<cplx>& amp, int n_qubits) {
    for (int q = 0; q + 1 < n_qubits; ++q) {
        const std::size_t mask =
            (std::size_t{1} << q) | (std::size_t{1} << (q + 1));
        for (std::size_t i = 0; i < amp.size(); ++i) {
            if ((i & mask) == mask) amp[i] = -amp[i];
        }
    }
}

QuantumState he_state(int n_qubits, int n_layers,
                      const std::function<double()>& next_angle) {
    check_config(n_qubits, n_layers);
    std::vector<cplx> amp(std::size_t{1} << n_qubits, cplx(0.0, 0.0));
    amp[0] = 1.0;
    for (int layer = 0; layer < n_layers; ++layer) {
        for (int q = 0; q < n_qubits; ++q) {
            rotate_y(amp, q, next_angle());
            rotate_z(amp, q, next_angle());
        }
        cz_chain(amp, n_qubits);
    }
    return make_state(n_qubits, std::move(amp));
}

}  // namespace

QuantumState random_he_state(const AnsatzConfig& config) {
    Rng rng(config.seed);
    return he_state(config.n_qubits, config.n_layers, [&rng]() {
        return rng.uniform(0.0, 2.0 * std::numbers::pi);
    });
}

QuantumState zero_angle_he_state(int n_qubits, int n_layers) {
    return he_state(n_qubits, n_layers, []() { return 0.0; });
}

std::vector<QuantumState> he_ensemble(int n_qubits, int n_layers,
                                      std::uint64_t seed, int n_states) {
    if (n_states < 1) throw ConfigError("ensemble needs at least one state");
    std::vector<QuantumState> states;
    states.reserve(static_cast<std::size_t>(n_states));
    for (int k = 0; k < n_states; ++k) {
        states.push_back(random_he_state(
            {n_qubits, n_layers, derive_seed(seed, static_cast<std::uint64_t>(k))}));
    }
    return states;
}

}  // namespace shotbudget
