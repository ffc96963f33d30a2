// Command-line front end: scaling studies, sign-approximation loss sweeps,
// split/saturation property checks, and joint-echo variance sweeps.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shotbudget/alloc.hpp"
#include "shotbudget/ansatz.hpp"
#include "shotbudget/bench.hpp"
#include "shotbudget/decomp.hpp"
#include "shotbudget/errors.hpp"
#include "shotbudget/measure.hpp"
#include "shotbudget/qcore.hpp"
#include "shotbudget/qsp.hpp"
#include "shotbudget/rng.hpp"

namespace {

using namespace shotbudget;

HermitianOperator random_dense(int n, Rng& rng) {
    const std::size_t dim = 1ull << n;
    std::vector<std::complex<double>> m(dim * dim);
    for (std::size_t r = 0; r < dim; ++r) {
        m[r * dim + r] = rng.uniform(-1.0, 1.0);
        for (std::size_t c = r + 1; c < dim; ++c) {
            const std::complex<double> v(rng.uniform(-1.0, 1.0),
                                         rng.uniform(-1.0, 1.0));
            m[r * dim + c] = v;
            m[c * dim + r] = std::conj(v);
        }
    }
    HermitianOperator op = dense_operator(n, m);
    const double norm = spectral_norm(op);
    return shifted(op, 0.7 / std::max(norm, 1e-12), 0.0);
}

QuantumState random_probe(int n, Rng& rng) {
    const std::size_t dim = 1ull << n;
    std::vector<std::complex<double>> amp(dim);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        amp[i] = std::complex<double>(rng.uniform(-1.0, 1.0),
                                      rng.uniform(-1.0, 1.0));
        norm += std::norm(amp[i]);
    }
    norm = std::sqrt(norm);
    for (auto& a : amp) a /= norm;
    return make_state(n, amp);
}

int run_scaling_command(const std::string& config_path,
                        const std::string& out_path) {
    const ScalingConfig config = load_scaling_config(config_path);
    const std::vector<ExperimentRecord> records = run_scaling(config);
    if (!out_path.empty()) emit_csv(records, out_path);

    std::printf("%4s  %-8s  %14s\n", "N", "method", "mean shot-var");
    for (int n : config.qubits) {
        std::printf("%4d  %-8s  %14.6g\n", n, "vn",
                    mean_value(records, "scaling", n, "vn"));
        for (const std::string& label : config.decompositions) {
            std::printf("%4d  %-8s  %14.6g\n", n, label.c_str(),
                        mean_value(records, "scaling", n, label));
        }
    }
    if (!out_path.empty())
        std::printf("wrote %zu records to %s\n", records.size(),
                    out_path.c_str());
    return 0;
}

int run_qsp_loss_command(int r_min, int r_max, double delta,
                         std::uint64_t seed, const std::string& out_path) {
    const std::vector<SignApproximation> sweep =
        optimize_range(r_min, r_max, delta, seed);
    std::vector<ExperimentRecord> records;
    std::printf("%4s  %12s  %12s  %s\n", "R", "loss", "max err", "converged");
    for (const SignApproximation& approx : sweep) {
        std::printf("%4d  %12.6g  %12.6g  %s\n", approx.phases.degree,
                    approx.loss, approx.max_pointwise_error,
                    approx.converged ? "yes" : "no");
        records.push_back({"qsp-loss", approx.phases.degree, "qsp",
                           seed, approx.loss, 0.0});
    }
    if (!out_path.empty()) {
        emit_csv(records, out_path);
        std::printf("wrote %zu records to %s\n", records.size(),
                    out_path.c_str());
    }
    return 0;
}

bool report(const char* name, bool ok, double worst) {
    std::printf("%-34s %s  (worst %.3g)\n", name, ok ? "PASS" : "FAIL", worst);
    return ok;
}

// Spot checks of the allocation-cost facts the library is built around:
// threshold costs saturate the variance bound exactly on states supported on
// two eigenvalues and exceed it on three, and splitting a term into pieces
// with the same total weight never increases the shot cost on any state.
int run_lemma_checks(std::uint64_t seed, int n_trials) {
    Rng rng(seed);
    bool all_ok = true;

    double worst = 0.0;
    for (int trial = 0; trial < n_trials; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 4.0);
        const HermitianOperator op = weighted_z(std::vector<double>(n, 1.0));
        const double theta = rng.uniform(0.1, 1.4);
        std::vector<std::complex<double>> amp(1ull << n);
        amp[0] = std::cos(theta);
        amp[(1ull << n) - 1] = std::sin(theta);
        const QuantumState psi = make_state(n, amp);
        const Decomposition xi = xi_decomposition(op);
        const double cost = decomposition_cost(xi, psi, 1.0);
        const double vn = von_neumann_variance(op, psi);
        worst = std::max(worst, std::abs(cost - vn) / std::max(1.0, vn));
    }
    all_ok &= report("two-eigenvalue saturation", worst < 1e-9, worst);

    worst = 1e300;
    for (int trial = 0; trial < n_trials; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 4.0);
        const HermitianOperator op = weighted_z(std::vector<double>(n, 1.0));
        std::vector<std::complex<double>> amp(1ull << n);
        const double t1 = rng.uniform(0.2, 1.2), t2 = rng.uniform(0.2, 1.2);
        amp[0] = std::cos(t1);
        amp[1] = std::sin(t1) * std::cos(t2);
        amp[(1ull << n) - 1] = std::sin(t1) * std::sin(t2);
        const QuantumState psi = make_state(n, amp);
        const Decomposition xi = xi_decomposition(op);
        const double gap = decomposition_cost(xi, psi, 1.0) -
                           von_neumann_variance(op, psi);
        worst = std::min(worst, gap);
    }
    all_ok &= report("three-eigenvalue strict excess", worst > 1e-9, worst);

    worst = -1e300;
    for (int trial = 0; trial < n_trials; ++trial) {
        const HermitianOperator a = random_dense(3, rng);
        HermitianOperator c = random_dense(3, rng);
        c = shifted(c, 1.0 / 0.7, 0.0);  // back to spectral norm <= 1
        const double beta = rng.uniform(0.1, 0.9);
        const double eta =
            rng.uniform(0.0, 0.3) * std::min(1.0, (1.0 - beta) / beta);
        const DecompositionTerm parent{1.0, a, SamplingMode::analytic, "p"};
        const DecompositionTerm left{beta, linear_combination(1.0, a, eta, c),
                                     SamplingMode::analytic, "l"};
        const DecompositionTerm right{
            1.0 - beta,
            linear_combination(1.0, a, -beta / (1.0 - beta) * eta, c),
            SamplingMode::analytic, "r"};
        const SplitReport split = validate_split(parent, {left, right});
        if (!split.norm_preserving || !split.reconstructs) worst = 1.0;
        for (int s = 0; s < 5; ++s) {
            const QuantumState probe = random_probe(3, rng);
            const double before = term_shot_weight(parent, probe);
            const double after = term_shot_weight(left, probe) +
                                 term_shot_weight(right, probe);
            worst = std::max(worst, after - before);
        }
    }
    all_ok &= report("weight-preserving split monotone", worst <= 1e-12, worst);

    if (!all_ok) throw InvariantError("property check failed");
    return 0;
}

int run_parallel_ev(int k_max, int n_states, std::uint64_t seed,
                    const std::string& out_path) {
    std::vector<ExperimentRecord> records;
    std::printf("%4s  %14s  %14s  %10s\n", "K", "mean var*m", "marginal form",
                "vs 2^(K-1)");
    double base = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        std::vector<HermitianOperator> reflections;
        for (int j = 0; j < k; ++j) {
            std::vector<double> weights(k_max, 0.0);
            weights[j] = 1.0;
            reflections.push_back(weighted_z(weights));
        }
        double mean = 0.0, mean_marginal = 0.0;
        const std::vector<QuantumState> states =
            he_ensemble(k_max, 5, derive_seed(seed, k), n_states);
        for (int i = 0; i < n_states; ++i) {
            const std::vector<double> table =
                parallel_ev_probabilities(reflections, states[i]);
            const ParallelEvResult result =
                parallel_ev_estimate_and_variance(table, 0, 1);
            mean += result.variance_propagated / n_states;
            mean_marginal += result.variance_marginal_form / n_states;
            records.push_back({"parallel-ev", k, "ev",
                               static_cast<std::uint64_t>(i),
                               result.variance_propagated, 0.0});
        }
        if (k == 1) base = mean;
        const double predicted = base * static_cast<double>(1ull << (k - 1));
        std::printf("%4d  %14.6g  %14.6g  %10.3f\n", k, mean, mean_marginal,
                    predicted > 0.0 ? mean / predicted : 0.0);
    }
    if (!out_path.empty()) {
        emit_csv(records, out_path);
        std::printf("wrote %zu records to %s\n", records.size(),
                    out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shot-budget toolkit for one-bit expectation estimation"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    CLI::App* scaling = app.add_subcommand(
        "scaling", "Run a variance scaling study from a JSON config");
    scaling->add_option("--config", config_path, "JSON config file")
        ->required();
    scaling->add_option("--out", out_path, "CSV output path");

    int r_min = 1, r_max = 13;
    double delta = 0.0;
    std::uint64_t seed = 20240814;
    std::string qsp_out;
    CLI::App* qsp = app.add_subcommand(
        "qsp-loss", "Optimize sign-approximation phases over a degree range");
    qsp->add_option("--r-min", r_min, "Smallest degree");
    qsp->add_option("--r-max", r_max, "Largest degree");
    qsp->add_option("--delta", delta, "Excluded half-width around the origin");
    qsp->add_option("--seed", seed, "Restart seed");
    qsp->add_option("--out", qsp_out, "CSV output path");

    std::uint64_t lemma_seed = 7;
    int lemma_trials = 50;
    CLI::App* lemma = app.add_subcommand(
        "lemma-checks", "Randomized checks of the cost-bound properties");
    lemma->add_option("--seed", lemma_seed, "RNG seed");
    lemma->add_option("--trials", lemma_trials, "Trials per property");

    int k_max = 3, ev_states = 50;
    std::uint64_t ev_seed = 11;
    std::string ev_out;
    CLI::App* ev = app.add_subcommand(
        "parallel-ev", "Joint-echo variance growth over batched reflections");
    ev->add_option("--k-max", k_max, "Largest batch size");
    ev->add_option("--states", ev_states, "States per batch size");
    ev->add_option("--seed", ev_seed, "State ensemble seed");
    ev->add_option("--out", ev_out, "CSV output path");

    try {
        app.parse(argc, argv);
        if (scaling->parsed())
            return run_scaling_command(config_path, out_path);
        if (qsp->parsed())
            return run_qsp_loss_command(r_min, r_max, delta, seed, qsp_out);
        if (lemma->parsed()) return run_lemma_checks(lemma_seed, lemma_trials);
        if (ev->parsed())
            return run_parallel_ev(k_max, ev_states, ev_seed, ev_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const shotbudget::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const shotbudget::InvariantError& e) {
        std::fprintf(stderr, "invariant violated: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
