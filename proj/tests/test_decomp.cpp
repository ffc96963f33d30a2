#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "shotbudget/decomp.hpp"
#include "shotbudget/errors.hpp"
#include "shotbudget/measure.hpp"
#include "shotbudget/qcore.hpp"
#include "shotbudget/rng.hpp"
#include "test_support.hpp"

using namespace shotbudget;
using test_support::random_state;

namespace {

HermitianOperator half_xx_yy() { return shifted(xx_plus_yy(), 0.5, 0.0); }

HermitianOperator pauli_mix(const std::vector<std::pair<double, std::string>>& t) {
    return pauli_sum(2, t);
}

QuantumState uniform_plus(int n) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<cplx> amp(dim, cplx(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
    return make_state(n, std::move(amp));
}

// State supported on one basis index from each of two eigenvalue groups.
QuantumState two_group_state(const HermitianOperator& op, int g_low, int g_high,
                             double p_low, Rng& rng) {
    const Spectrum& spec = op.spectrum();
    std::size_t i_low = 0, i_high = 0;
    bool found_low = false, found_high = false;
    for (std::size_t i = 0; i < spec.group_of_index.size(); ++i) {
        if (!found_low && spec.group_of_index[i] == g_low) {
            i_low = i;
            found_low = true;
        }
        if (spec.group_of_index[i] == g_high) {
            i_high = i;
            found_high = true;
        }
    }
    REQUIRE(found_low);
    REQUIRE(found_high);
    std::vector<cplx> amp(spec.group_of_index.size(), cplx(0.0, 0.0));
    const double phase = rng.uniform(0.0, 6.28);
    amp[i_low] = std::sqrt(p_low);
    amp[i_high] = std::sqrt(1.0 - p_low) * cplx(std::cos(phase), std::sin(phase));
    return make_state(op.n_qubits(), std::move(amp));
}

}  // namespace

TEST_CASE("pauli split of a weighted Z sum") {
    const Decomposition d = pauli_decomposition({1.0, -2.0});
    CHECK(d.identity_shift == 0.0);
    REQUIRE(d.terms.size() == 2);
    CHECK(d.terms[0].coefficient == doctest::Approx(1.0));
    CHECK(d.terms[1].coefficient == doctest::Approx(2.0));
    // Second term carries the weight's sign: -Z on qubit 1.
    const std::vector<double>& neg_z1 = d.terms[1].op.diag();
    CHECK(neg_z1[0] == doctest::Approx(-1.0));
    CHECK(neg_z1[2] == doctest::Approx(1.0));
    CHECK(d.reconstruction_residual < 1e-12);

    const Decomposition triple = pauli_decomposition({1.0, 2.0, 4.0});
    REQUIRE(triple.terms.size() == 3);
    Rng rng(901);
    for (int trial = 0; trial < 10; ++trial) {
        const QuantumState psi = random_state(3, rng);
        CHECK(reconstruct_expectation(triple, psi) ==
              doctest::Approx(expectation(triple.target, psi)).epsilon(1e-10));
    }
    // All term expectations vanish on the uniform superposition, so the
    // cost is the squared coefficient sum.
    CHECK(decomposition_cost(triple, uniform_plus(3), 1.0) ==
          doctest::Approx(49.0).epsilon(1e-10));

    const Decomposition skip = pauli_decomposition({1.0, 0.0, 3.0});
    CHECK(skip.terms.size() == 2);
}

TEST_CASE("threshold reflections of small diagonal operators") {
    const Decomposition dz = xi_decomposition(weighted_z({1.0}));
    CHECK(dz.identity_shift == doctest::Approx(0.0));
    REQUIRE(dz.terms.size() == 1);
    CHECK(dz.terms[0].coefficient == doctest::Approx(1.0));
    CHECK(dz.terms[0].op.diag()[0] == doctest::Approx(1.0));
    CHECK(dz.terms[0].op.diag()[1] == doctest::Approx(-1.0));

    const Decomposition dzz = xi_decomposition(weighted_z({1.0, 1.0}));
    CHECK(dzz.identity_shift == doctest::Approx(0.0));
    REQUIRE(dzz.terms.size() == 2);
    CHECK(dzz.terms[0].coefficient == doctest::Approx(1.0));
    CHECK(dzz.terms[1].coefficient == doctest::Approx(1.0));
    const std::vector<double> xi1 = dzz.terms[0].op.diag();
    const std::vector<double> xi2 = dzz.terms[1].op.diag();
    const std::vector<double> want1{1.0, 1.0, 1.0, -1.0};
    const std::vector<double> want2{1.0, -1.0, -1.0, -1.0};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(xi1[i] == doctest::Approx(want1[i]));
        CHECK(xi2[i] == doctest::Approx(want2[i]));
    }

    const Decomposition flat = xi_decomposition(identity_operator(1, 3.0));
    CHECK(flat.identity_shift == doctest::Approx(3.0));
    CHECK(flat.terms.empty());
    CHECK(flat.reconstruction_residual < 1e-12);
}

TEST_CASE("threshold reflections of a dense hopping operator") {
    const Decomposition d = xi_decomposition(xx_plus_yy());
    CHECK(d.identity_shift == doctest::Approx(0.0));
    REQUIRE(d.terms.size() == 2);
    CHECK(d.terms[0].coefficient == doctest::Approx(1.0));
    CHECK(d.terms[1].coefficient == doctest::Approx(1.0));
    for (const DecompositionTerm& term : d.terms) {
        CHECK(is_reflection(term.op));
    }
    Rng rng(907);
    for (int trial = 0; trial < 10; ++trial) {
        const QuantumState psi = random_state(2, rng);
        CHECK(reconstruct_expectation(d, psi) ==
              doctest::Approx(expectation(d.target, psi)).epsilon(1e-9));
    }
}

TEST_CASE("every threshold term is a reflection and reconstruction is exact") {
    Rng rng(911);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(trial % 3);
        const std::size_t dim = std::size_t{1} << n;
        std::vector<double> entries(dim);
        for (double& v : entries) v = rng.uniform(-3.0, 3.0);
        const HermitianOperator op = diagonal_operator(n, entries);
        const Decomposition d = xi_decomposition(op);
        CHECK(d.reconstruction_residual < 1e-10);
        for (const DecompositionTerm& term : d.terms) {
            CHECK(is_reflection(term.op));
            CHECK(term.coefficient > 0.0);
        }
    }
}

TEST_CASE("threshold cost saturates the intrinsic variance on two-group states") {
    Rng rng(919);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(trial % 4);
        const std::size_t dim = std::size_t{1} << n;
        std::vector<double> entries(dim);
        for (double& v : entries) v = rng.uniform(-2.0, 2.0);
        const HermitianOperator op = diagonal_operator(n, entries);
        const int groups = static_cast<int>(op.spectrum().size());
        if (groups < 2) continue;
        const int g_low = static_cast<int>(rng.engine()() % static_cast<unsigned>(groups - 1));
        const int g_high = g_low + 1 +
            static_cast<int>(rng.engine()() % static_cast<unsigned>(groups - g_low - 1));
        const QuantumState psi =
            two_group_state(op, g_low, g_high, rng.uniform(0.05, 0.95), rng);
        const double cost = decomposition_cost(xi_decomposition(op), psi, 1.0);
        const double vn = von_neumann_variance(op, psi);
        CHECK(cost == doctest::Approx(vn).epsilon(1e-9));
    }
}

TEST_CASE("three-group states cost strictly more than the intrinsic variance") {
    const HermitianOperator op = weighted_z({1.0, 1.0});
    Rng rng(929);
    for (int trial = 0; trial < 20; ++trial) {
        // Occupations on all three eigenvalues -2, 0, 2.
        double a = rng.uniform(0.1, 0.4);
        double b = rng.uniform(0.1, 0.4);
        std::vector<cplx> amp(4, cplx(0.0, 0.0));
        amp[0] = std::sqrt(a);                  // +2
        amp[1] = std::sqrt(1.0 - a - b);        // 0
        amp[3] = std::sqrt(b);                  // -2
        const QuantumState psi = make_state(2, std::move(amp));
        const double cost = decomposition_cost(xi_decomposition(op), psi, 1.0);
        const double vn = von_neumann_variance(op, psi);
        CHECK(cost > vn + 1e-9);
    }
    // Bell-type support on the extreme eigenvalues only: exact saturation.
    std::vector<cplx> bell(4, cplx(0.0, 0.0));
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    const QuantumState psi = make_state(2, std::move(bell));
    CHECK(decomposition_cost(xi_decomposition(op), psi, 1.0) ==
          doctest::Approx(4.0).epsilon(1e-12));
    CHECK(von_neumann_variance(op, psi) == doctest::Approx(4.0).epsilon(1e-12));
    // Eigenstates are free.
    CHECK(decomposition_cost(xi_decomposition(op), basis_state(2, 0), 1.0) ==
          doctest::Approx(0.0));
}

TEST_CASE("threshold cost dominates the intrinsic variance everywhere") {
    Rng rng(937);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(trial % 3);
        const std::size_t dim = std::size_t{1} << n;
        std::vector<double> entries(dim);
        for (double& v : entries) v = rng.uniform(-2.0, 2.0);
        const HermitianOperator op = diagonal_operator(n, entries);
        const QuantumState psi = random_state(n, rng);
        CHECK(decomposition_cost(xi_decomposition(op), psi, 1.0) >=
              von_neumann_variance(op, psi) - 1e-9);
    }
}

TEST_CASE("sine interpolation coefficients: solved versus closed forms") {
    const std::vector<double> solved = gpsk_solved_coefficients(1);
    REQUIRE(solved.size() == 1);
    CHECK(solved[0] == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));

    const std::vector<double> closed = gpsk_closed_form_coefficients(1);
    CHECK(closed[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // The alternating closed form is not the interpolation solution.
    CHECK(std::abs(solved[0] - closed[0]) > 0.4);

    const std::vector<double> kernel = gpsk_kernel_derivative_coefficients(1);
    CHECK(kernel[0] == doctest::Approx(-0.25).epsilon(1e-12));

    // The solved coefficients do interpolate the ramp exactly.
    for (int order : {2, 3, 5}) {
        const std::vector<double> c = gpsk_solved_coefficients(order);
        for (int j = 1; j <= order; ++j) {
            double s = 0.0;
            for (int l = 1; l <= order; ++l) {
                s += c[static_cast<std::size_t>(l - 1)] *
                     std::sin(static_cast<double>(j) * 2.0 * 3.14159265358979323846 *
                              static_cast<double>(l) / static_cast<double>(2 * order + 1));
            }
            CHECK(s == doctest::Approx(static_cast<double>(j)).epsilon(1e-11));
        }
    }
}

TEST_CASE("sine interpolation reproduces integer-ladder expectations") {
    Rng rng(941);
    for (int n : {2, 3}) {
        std::vector<double> weights(static_cast<std::size_t>(n), 1.0);
        const HermitianOperator op = weighted_z(weights);
        const Decomposition d = gpsk_decomposition(op, n);
        CHECK(d.identity_shift == 0.0);
        CHECK(d.reconstruction_residual < 1e-9);
        for (const DecompositionTerm& term : d.terms) {
            CHECK(term.coefficient > 0.0);
            CHECK(spectral_norm(term.op) <= 1.0 + 1e-12);
        }
        for (int trial = 0; trial < 20; ++trial) {
            const QuantumState psi = random_state(n, rng);
            CHECK(reconstruct_expectation(d, psi) ==
                  doctest::Approx(expectation(op, psi)).epsilon(1e-8));
        }
    }
}

TEST_CASE("sine interpolation rejects non-ladder spectra") {
    CHECK_THROWS_AS(gpsk_decomposition(weighted_z({0.5}), 2), ConfigError);
    CHECK_THROWS_AS(gpsk_decomposition(weighted_z({3.0}), 2), ConfigError);
    CHECK_THROWS_AS(gpsk_solved_coefficients(0), ConfigError);
}

TEST_CASE("sine interpolation variance on symmetric and sampled states") {
    const HermitianOperator op = weighted_z({1.0, 1.0});
    const Decomposition d = gpsk_decomposition(op, 2);
    // <sin(O t)> = 0 on the uniform superposition, so the variance is the
    // squared coefficient-magnitude sum over m.
    double c_sum = 0.0;
    for (const DecompositionTerm& term : d.terms) c_sum += term.coefficient;
    const QuantumState plus = uniform_plus(2);
    CHECK(gpsk_variance(d, plus, 1000) ==
          doctest::Approx(c_sum * c_sum / 1000.0).epsilon(1e-10));
    CHECK(gpsk_closed_form_variance(op, 2, plus, 1000) > 0.0);
    CHECK_THROWS_AS(gpsk_variance(d, plus, 0), ConfigError);

    // Aggregate estimator built from simulated term measurements stays
    // within 3 sigma of the exact value.
    Rng rng(947);
    const QuantumState psi = random_state(2, rng);
    const long long m_per_term = 40000;
    double estimate = d.identity_shift;
    std::vector<long long> shots;
    for (std::size_t x = 0; x < d.terms.size(); ++x) {
        const SampleRecord rec =
            ht_sample(d.terms[x].op, psi, m_per_term, derive_seed(953, x));
        estimate += d.terms[x].coefficient * sample_mean(rec);
        shots.push_back(m_per_term);
    }
    const double sigma = std::sqrt(decomposition_variance(d, psi, shots));
    CHECK(std::abs(estimate - expectation(op, psi)) < 3.0 * sigma);
}

TEST_CASE("sign-profile split with the exact sign matches the threshold split") {
    const HermitianOperator op = weighted_z({1.0, 1.0});
    const Decomposition xi = xi_decomposition(op);
    const Decomposition sg = sgn_decomposition_with(
        op, [](double w) { return w > 0.0 ? 1.0 : -1.0; });
    CHECK(sg.identity_shift == doctest::Approx(xi.identity_shift));
    REQUIRE(sg.terms.size() == xi.terms.size());
    for (std::size_t x = 0; x < sg.terms.size(); ++x) {
        CHECK(sg.terms[x].coefficient ==
              doctest::Approx(xi.terms[x].coefficient).epsilon(1e-12));
        CHECK(sg.terms[x].mode == SamplingMode::monte_carlo);
        const std::vector<double>& a = sg.terms[x].op.diag();
        const std::vector<double>& b = xi.terms[x].op.diag();
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
        }
    }
    CHECK(sg.reconstruction_residual < 1e-12);

    CHECK_THROWS_AS(sgn_decomposition_with(op, [](double) { return 2.0; }),
                    ConfigError);
    CHECK_THROWS_AS(
        sgn_decomposition_with(op, [](double w) { return w > 0.0 ? 1.0 : -1.0; }, 1.0),
        ConfigError);
}

TEST_CASE("smoother sign profiles shrink the reconstruction residual") {
    const HermitianOperator op = weighted_z({1.0, 1.0});
    auto tanh_profile = [](double k) {
        return [k](double w) { return std::tanh(k * w); };
    };
    const double r3 = sgn_decomposition_with(op, tanh_profile(3.0)).reconstruction_residual;
    const double r6 = sgn_decomposition_with(op, tanh_profile(6.0)).reconstruction_residual;
    CHECK(r3 > 1e-3);
    CHECK(r3 < 1e-2);
    CHECK(r6 > 1e-7);
    CHECK(r6 < 1e-4);
    CHECK(r6 < r3);

    // Reconstruction bias on any state is bounded by the recorded residual.
    Rng rng(953);
    const Decomposition d = sgn_decomposition_with(op, tanh_profile(3.0));
    for (int trial = 0; trial < 5; ++trial) {
        const QuantumState psi = random_state(2, rng);
        CHECK(std::abs(reconstruct_expectation(d, psi) - expectation(op, psi)) <=
              d.reconstruction_residual + 1e-12);
    }
}

TEST_CASE("optimized sign polynomial split of a Z ladder") {
    const SignApproximation approx = optimize_phases(5, 0.0, 20240814);
    const HermitianOperator op = weighted_z({1.0, 1.0, 1.0, 1.0});
    const Decomposition d = sgn_decomposition(op, approx);
    REQUIRE(d.terms.size() == 4);
    for (const DecompositionTerm& term : d.terms) {
        CHECK(term.mode == SamplingMode::monte_carlo);
        CHECK(spectral_norm(term.op) <= 1.0 + 1e-10);
    }
    // Degree-5 profile: the residual is visible but bounded.
    CHECK(d.reconstruction_residual > 1e-4);
    CHECK(d.reconstruction_residual < 1.5);
    Rng rng(967);
    for (int trial = 0; trial < 5; ++trial) {
        const QuantumState psi = random_state(4, rng);
        CHECK(std::abs(reconstruct_expectation(d, psi) - expectation(op, psi)) <=
              d.reconstruction_residual + 1e-12);
    }
}

TEST_CASE("recentering a term onto spectral range [-1, 1]") {
    // (1, (I+Z)/2) releases shift 1/2 and leaves (1/2, Z).
    DecompositionTerm t{1.0, diagonal_operator(1, {1.0, 0.0}),
                        SamplingMode::analytic, "projector"};
    const auto [shift, centered] = center_term(t);
    CHECK(shift == doctest::Approx(0.5));
    CHECK(centered.coefficient == doctest::Approx(0.5));
    CHECK(centered.op.diag()[0] == doctest::Approx(1.0));
    CHECK(centered.op.diag()[1] == doctest::Approx(-1.0));

    DecompositionTerm skew{1.0, diagonal_operator(1, {-1.0, -0.5}),
                           SamplingMode::analytic, "skew"};
    const auto [shift2, centered2] = center_term(skew);
    CHECK(shift2 == doctest::Approx(-0.75));
    CHECK(centered2.coefficient == doctest::Approx(0.25));
    CHECK(centered2.op.diag()[0] == doctest::Approx(-1.0));
    CHECK(centered2.op.diag()[1] == doctest::Approx(1.0));

    DecompositionTerm flat{2.0, identity_operator(1, 0.7),
                           SamplingMode::analytic, "flat"};
    const auto [shift3, centered3] = center_term(flat);
    CHECK(shift3 == doctest::Approx(1.4));
    CHECK(centered3.coefficient == 0.0);
}

TEST_CASE("reflection predicate") {
    CHECK(is_reflection(weighted_z({1.0})));
    CHECK(is_reflection(heisenberg_triple()));
    CHECK_FALSE(is_reflection(weighted_z({1.0, 1.0})));
    CHECK_FALSE(is_reflection(diagonal_operator(1, {1.0, 0.0})));
    const HermitianOperator mixed = pauli_mix(
        {{0.5, "XX"}, {0.5, "YY"}, {0.5, "ZZ"}, {0.5, "II"}});
    CHECK(is_reflection(mixed));
}

TEST_CASE("norm-preserving splits of the hopping term") {
    const DecompositionTerm parent{2.0, half_xx_yy(), SamplingMode::analytic,
                                   "hop"};
    const std::vector<std::vector<DecompositionTerm>> variants{
        {{1.0, pauli_mix({{1.0, "XX"}}), SamplingMode::analytic, "xx"},
         {1.0, pauli_mix({{1.0, "YY"}}), SamplingMode::analytic, "yy"}},
        {{1.0, pauli_mix({{0.5, "XX"}, {0.5, "YY"}, {0.5, "ZI"}, {0.5, "IZ"}}),
          SamplingMode::analytic, "plus_field"},
         {1.0, pauli_mix({{0.5, "XX"}, {0.5, "YY"}, {-0.5, "ZI"}, {-0.5, "IZ"}}),
          SamplingMode::analytic, "minus_field"}},
        {{1.0, pauli_mix({{0.5, "XX"}, {0.5, "YY"}, {0.5, "ZZ"}, {0.5, "II"}}),
          SamplingMode::analytic, "plus_swap"},
         {1.0, pauli_mix({{0.5, "XX"}, {0.5, "YY"}, {-0.5, "ZZ"}, {-0.5, "II"}}),
          SamplingMode::analytic, "minus_swap"}}};
    for (const auto& children : variants) {
        const SplitReport report = validate_split(parent, children);
        CHECK(report.reconstructs);
        CHECK(report.norm_preserving);
        CHECK_FALSE(report.norm_increasing);
    }
    // The swap-like child is itself a reflection with a 3/1 eigenspace split.
    CHECK(is_reflection(variants[2][0].op));

    const DecompositionTerm z_parent{1.0, weighted_z({1.0}),
                                     SamplingMode::analytic, "z"};
    const SplitReport halves = validate_split(
        z_parent, {{0.5, weighted_z({1.0}), SamplingMode::analytic, "a"},
                   {0.5, weighted_z({1.0}), SamplingMode::analytic, "b"}});
    CHECK(halves.reconstructs);
    CHECK(halves.norm_preserving);
}

TEST_CASE("norm-increasing split detection and input validation") {
    const DecompositionTerm parent{1.0, weighted_z({1.0}),
                                   SamplingMode::analytic, "z"};
    const SplitReport report = validate_split(
        parent, {{2.0, weighted_z({1.0}), SamplingMode::analytic, "a"},
                 {1.0, weighted_z({-1.0}), SamplingMode::analytic, "b"}});
    CHECK(report.reconstructs);
    CHECK(report.norm_increasing);
    CHECK(report.coefficient_gap == doctest::Approx(2.0));

    CHECK_THROWS_AS(validate_split(parent, {}), ConfigError);
    CHECK_THROWS_AS(
        validate_split(parent, {{1.0, weighted_z({2.0}), SamplingMode::analytic, "big"}}),
        ConfigError);
    CHECK_THROWS_AS(
        validate_split(parent, {{-1.0, weighted_z({1.0}), SamplingMode::analytic, "neg"}}),
        ConfigError);
    CHECK_THROWS_AS(
        validate_split(parent, {{1.0, weighted_z({1.0, 1.0}) , SamplingMode::analytic, "wide"}}),
        ConfigError);
}

TEST_CASE("norm-preserving splits never increase the shot weight") {
    Rng rng(971);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 4;
        std::vector<cplx> base = test_support::random_hermitian(dim, rng);
        HermitianOperator a = dense_operator(2, base);
        a = shifted(a, 0.7 / std::max(1.0, spectral_norm(a)), 0.0);
        std::vector<cplx> noise = test_support::random_hermitian(dim, rng);
        HermitianOperator c = dense_operator(2, noise);
        c = shifted(c, 1.0 / std::max(1.0, spectral_norm(c)), 0.0);

        const double beta = rng.uniform(0.1, 0.9);
        const double eta =
            rng.uniform(0.0, 0.3) * std::min(1.0, (1.0 - beta) / beta);
        const double coeff = rng.uniform(0.5, 2.0);
        const DecompositionTerm parent{coeff, a, SamplingMode::analytic, "p"};
        const std::vector<DecompositionTerm> children{
            {beta * coeff, linear_combination(1.0, a, eta, c),
             SamplingMode::analytic, "c1"},
            {(1.0 - beta) * coeff,
             linear_combination(1.0, a, -beta / (1.0 - beta) * eta, c),
             SamplingMode::analytic, "c2"}};
        const SplitReport report = validate_split(parent, children);
        CHECK(report.reconstructs);
        CHECK(report.norm_preserving);
        for (int s = 0; s < 5; ++s) {
            const QuantumState psi = random_state(2, rng);
            const double parent_weight = term_shot_weight(parent, psi);
            const double child_weight = term_shot_weight(children[0], psi) +
                                        term_shot_weight(children[1], psi);
            CHECK(child_weight <= parent_weight + 1e-12);
        }
    }
}

TEST_CASE("norm-increasing splits admit a probe-state witness") {
    // Concrete case: splitting (1, Z) into (2, Z) and (1, -Z).
    const DecompositionTerm parent{1.0, weighted_z({1.0}),
                                   SamplingMode::analytic, "z"};
    const std::vector<DecompositionTerm> children{
        {2.0, weighted_z({1.0}), SamplingMode::analytic, "a"},
        {1.0, weighted_z({-1.0}), SamplingMode::analytic, "b"}};
    CHECK(validate_split(parent, children).norm_increasing);
    double best_excess = -1.0;
    for (const QuantumState& psi : extremal_probe_states(parent.op)) {
        double split_weight = 0.0;
        for (const DecompositionTerm& child : children) {
            split_weight += term_shot_weight(child, psi);
        }
        best_excess =
            std::max(best_excess, split_weight - term_shot_weight(parent, psi));
    }
    CHECK(best_excess > 1e-6);

    // Padding any split with (t, B) and (t, -B) raises the coefficient sum
    // but reconstructs; the balanced probe of B exposes the extra cost.
    Rng rng(977);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> entries{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        if (std::abs(entries[0] - entries[1]) < 0.2) entries[1] += 0.5;
        entries[0] = std::clamp(entries[0], -1.0, 1.0);
        entries[1] = std::clamp(entries[1], -1.0, 1.0);
        const HermitianOperator b = diagonal_operator(1, entries);
        const double t = rng.uniform(0.1, 1.0);
        const DecompositionTerm p{1.0, weighted_z({1.0}), SamplingMode::analytic, "p"};
        const std::vector<DecompositionTerm> padded{
            {1.0, weighted_z({1.0}), SamplingMode::analytic, "same"},
            {t, b, SamplingMode::analytic, "pad+"},
            {t, shifted(b, -1.0, 0.0), SamplingMode::analytic, "pad-"}};
        const SplitReport report = validate_split(p, padded);
        CHECK(report.reconstructs);
        CHECK(report.norm_increasing);
        double witness = -1.0;
        for (const QuantumState& psi : extremal_probe_states(b)) {
            double split_weight = 0.0;
            for (const DecompositionTerm& child : padded) {
                split_weight += term_shot_weight(child, psi);
            }
            witness = std::max(witness, split_weight - term_shot_weight(p, psi));
        }
        CHECK(witness > 1e-9);
    }
}

TEST_CASE("scalar concavity behind the split inequality") {
    auto g = [](double x) { return std::sqrt(std::max(0.0, 1.0 - x * x)); };
    for (int i = -10; i <= 10; ++i) {
        for (int j = -10; j <= 10; ++j) {
            for (int k = 1; k <= 9; ++k) {
                const double e1 = 0.1 * i;
                const double e2 = 0.1 * j;
                const double beta = 0.1 * k;
                const double lhs = beta * g(e1) + (1.0 - beta) * g(e2);
                const double rhs = g(beta * e1 + (1.0 - beta) * e2);
                CHECK(lhs <= rhs + 1e-12);
            }
        }
    }
}

TEST_CASE("variance bookkeeping for a fixed shot plan") {
    const Decomposition d = xi_decomposition(weighted_z({1.0, 1.0}));
    const QuantumState plus = uniform_plus(2);
    // Term expectations are +-1/2, so each term contributes 3/4 / m_x.
    CHECK(decomposition_variance(d, plus, {100, 300}) ==
          doctest::Approx(0.0075 + 0.0025).epsilon(1e-12));
    CHECK_THROWS_AS(decomposition_variance(d, plus, {100}), ConfigError);
    CHECK_THROWS_AS(decomposition_variance(d, plus, {100, 0}), ConfigError);
}

TEST_CASE("sampled variance agrees with the analytic value on average") {
    const HermitianOperator op = weighted_z({1.0, 1.0});
    const Decomposition d = sgn_decomposition_with(
        op, [](double w) { return w > 0.0 ? 1.0 : -1.0; });
    const QuantumState plus = uniform_plus(2);
    const std::vector<long long> shots{200, 200};
    const double analytic = decomposition_variance(d, plus, shots);
    double mean = 0.0;
    const int reps = 300;
    for (int r = 0; r < reps; ++r) {
        mean += sampled_decomposition_variance(d, plus, shots,
                                               derive_seed(983, static_cast<std::uint64_t>(r)));
    }
    mean /= reps;
    CHECK(mean == doctest::Approx(analytic).epsilon(0.1));
}

TEST_CASE("extremal probe states of diagonal and dense operators") {
    const std::vector<QuantumState> z_probes =
        extremal_probe_states(weighted_z({1.0}));
    REQUIRE(z_probes.size() == 3);
    CHECK(expectation(weighted_z({1.0}), z_probes[0]) == doctest::Approx(-1.0));
    CHECK(expectation(weighted_z({1.0}), z_probes[1]) == doctest::Approx(1.0));
    CHECK(expectation(weighted_z({1.0}), z_probes[2]) == doctest::Approx(0.0));

    const std::vector<QuantumState> hop_probes =
        extremal_probe_states(xx_plus_yy());
    REQUIRE(hop_probes.size() == 3);
    CHECK(expectation(xx_plus_yy(), hop_probes[0]) ==
          doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(expectation(xx_plus_yy(), hop_probes[1]) ==
          doctest::Approx(2.0).epsilon(1e-9));
    CHECK(expectation(xx_plus_yy(), hop_probes[2]) ==
          doctest::Approx(0.0).epsilon(1e-9));

    CHECK(extremal_probe_states(identity_operator(2, 1.0)).size() == 1);
}
