#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "shotbudget/ansatz.hpp"
#include "shotbudget/errors.hpp"
#include "shotbudget/qcore.hpp"
#include "shotbudget/rng.hpp"

using namespace shotbudget;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("zero rotation angles leave the register in the ground state") {
    for (int n : {1, 2, 4}) {
        const QuantumState psi = zero_angle_he_state(n, 5);
        CHECK(psi.amplitudes[0] == cplx(1.0, 0.0));
        for (std::size_t i = 1; i < psi.amplitudes.size(); ++i) {
            CHECK(psi.amplitudes[i] == cplx(0.0, 0.0));
        }
    }
}

TEST_CASE("identical seeds reproduce identical amplitudes") {
    const AnsatzConfig config{4, 5, 2024};
    const QuantumState a = random_he_state(config);
    const QuantumState b = random_he_state(config);
    REQUIRE(a.amplitudes.size() == b.amplitudes.size());
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
        CHECK(a.amplitudes[i].real() == b.amplitudes[i].real());
        CHECK(a.amplitudes[i].imag() == b.amplitudes[i].imag());
    }
}

TEST_CASE("single-qubit layer replays the angle stream in circuit order") {
    const std::uint64_t seed = 31337;
    const QuantumState psi = random_he_state({1, 1, seed});
    Rng rng(seed);
    const double ty = rng.uniform(0.0, kTwoPi);
    const double tz = rng.uniform(0.0, kTwoPi);
    const cplx e_minus(std::cos(0.5 * tz), -std::sin(0.5 * tz));
    const cplx want0 = std::cos(0.5 * ty) * e_minus;
    const cplx want1 = std::sin(0.5 * ty) * std::conj(e_minus);
    CHECK(std::abs(psi.amplitudes[0] - want0) < 1e-14);
    CHECK(std::abs(psi.amplitudes[1] - want1) < 1e-14);
}

TEST_CASE("two-qubit layer applies rotations qubit-by-qubit then the CZ chain") {
    const std::uint64_t seed = 90210;
    const QuantumState psi = random_he_state({2, 1, seed});
    Rng rng(seed);
    auto one_qubit = [&rng]() {
        const double ty = rng.uniform(0.0, kTwoPi);
        const double tz = rng.uniform(0.0, kTwoPi);
        const cplx e_minus(std::cos(0.5 * tz), -std::sin(0.5 * tz));
        return std::pair<cplx, cplx>(std::cos(0.5 * ty) * e_minus,
                                     std::sin(0.5 * ty) * std::conj(e_minus));
    };
    const auto [a0, a1] = one_qubit();
    const auto [b0, b1] = one_qubit();
    const cplx want[4] = {a0 * b0, a1 * b0, a0 * b1, -a1 * b1};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(psi.amplitudes[i] - want[i]) < 1e-14);
    }
}

TEST_CASE("generated states are normalized") {
    for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
        const QuantumState psi = random_he_state({5, 5, seed});
        double norm = 0.0;
        for (const cplx& a : psi.amplitudes) norm += std::norm(a);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("ensemble Z magnetization averages to zero within noise") {
    const int n_states = 100;
    const HermitianOperator sum_z = weighted_z({1.0, 1.0, 1.0, 1.0});
    const std::vector<QuantumState> ensemble = he_ensemble(4, 5, 808, n_states);
    std::vector<double> values;
    for (const QuantumState& psi : ensemble) {
        values.push_back(expectation(sum_z, psi));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n_states;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (n_states - 1);
    const double se = std::sqrt(var / n_states);
    CHECK(std::abs(mean) <= 4.0 * se);
}

TEST_CASE("ensemble states are mutually distinct") {
    for (int n : {3, 4}) {
        const std::vector<QuantumState> ensemble = he_ensemble(n, 5, 515, 100);
        for (std::size_t i = 0; i < ensemble.size(); ++i) {
            for (std::size_t j = i + 1; j < ensemble.size(); ++j) {
                const double fidelity = std::norm(overlap(ensemble[i], ensemble[j]));
                CHECK(fidelity <= 0.999);
            }
        }
    }
}

TEST_CASE("ensemble prefixes are stable and configs are validated") {
    const std::vector<QuantumState> short_run = he_ensemble(3, 5, 616, 5);
    const std::vector<QuantumState> long_run = he_ensemble(3, 5, 616, 20);
    for (std::size_t k = 0; k < short_run.size(); ++k) {
        for (std::size_t i = 0; i < short_run[k].amplitudes.size(); ++i) {
            CHECK(short_run[k].amplitudes[i] == long_run[k].amplitudes[i]);
        }
    }
    CHECK_THROWS_AS(random_he_state({3, 0, 1}), ConfigError);
    CHECK_THROWS_AS(random_he_state({0, 5, 1}), ConfigError);
    CHECK_THROWS_AS(he_ensemble(3, 5, 1, 0), ConfigError);
}
