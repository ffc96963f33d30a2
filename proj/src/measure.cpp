#include "shotbudget/measure.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "shotbudget/errors.hpp"
#include "shotbudget/rng.hpp"

namespace shotbudget {

namespace {

void check_unitary_part(const HermitianOperator& re_u, const char* what) {
    if (spectral_norm(re_u) > 1.0 + 1e-10) {
        std::ostringstream msg;
        msg << what << ": spectral norm " << spectral_norm(re_u)
            << " exceeds 1";
        throw ConfigError(msg.str());
    }
}

void check_dims(const HermitianOperator& op, const QuantumState& psi,
                const char* what) {
    if (op.n_qubits() != psi.n_qubits) {
        throw ConfigError(std::string(what) + ": operator and state differ");
    }
}

double min_eigenvalue(const HermitianOperator& op) {
    if (op.is_diagonal()) {
        return *std::min_element(op.diag().begin(), op.diag().end());
    }
    return op.spectrum().eigenvalues.front();
}

}  // namespace

BinaryPovm povm_from_re_u(const HermitianOperator& re_u) {
    check_unitary_part(re_u, "povm_from_re_u");
    return BinaryPovm{shifted(re_u, 0.5, 0.5), shifted(re_u, -0.5, 0.5)};
}

HermitianOperator re_u_from_povm(const BinaryPovm& povm) {
    const HermitianOperator sum =
        linear_combination(1.0, povm.pi_plus, 1.0, povm.pi_minus);
    if (sum.is_diagonal()) {
        for (double d : sum.diag()) {
            if (std::abs(d - 1.0) > 1e-10) {
                throw ConfigError("re_u_from_povm: POVM is not complete");
            }
        }
    } else {
        const std::size_t dim = sum.dim();
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                const cplx want = (r == c) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
                if (std::abs(sum.dense()[r * dim + c] - want) > 1e-10) {
                    throw ConfigError("re_u_from_povm: POVM is not complete");
                }
            }
        }
    }
    if (min_eigenvalue(povm.pi_plus) < -1e-10 ||
        min_eigenvalue(povm.pi_minus) < -1e-10) {
        throw ConfigError("re_u_from_povm: POVM element not positive");
    }
    HermitianOperator re_u =
        linear_combination(1.0, povm.pi_plus, -1.0, povm.pi_minus);
    check_unitary_part(re_u, "re_u_from_povm");
    return re_u;
}

std::pair<double, double> ht_probabilities(const HermitianOperator& re_u,
                                           const QuantumState& psi) {
    check_unitary_part(re_u, "ht_probabilities");
    check_dims(re_u, psi, "ht_probabilities");
    const double e = expectation(re_u, psi);
    const double p_plus = std::clamp(0.5 * (1.0 + e), 0.0, 1.0);
    return {p_plus, 1.0 - p_plus};
}

double ht_variance(const HermitianOperator& re_u, const QuantumState& psi,
                   std::uint64_t m) {
    if (m == 0) throw ConfigError("ht_variance: shot count must be positive");
    check_unitary_part(re_u, "ht_variance");
    check_dims(re_u, psi, "ht_variance");
    const double e = expectation(re_u, psi);
    return std::max(0.0, 1.0 - e * e) / static_cast<double>(m);
}

SampleRecord ht_sample(const HermitianOperator& re_u, const QuantumState& psi,
                       std::uint64_t m, std::uint64_t seed) {
    if (m == 0) throw ConfigError("ht_sample: shot count must be positive");
    const auto [p_plus, p_minus] = ht_probabilities(re_u, psi);
    (void)p_minus;
    Rng rng(seed);
    SampleRecord record;
    record.plus = rng.binomial(m, p_plus);
    record.minus = m - record.plus;
    record.total = m;
    return record;
}

double sample_mean(const SampleRecord& record) {
    if (record.total == 0) throw ConfigError("sample_mean: empty record");
    return (static_cast<double>(record.plus) -
            static_cast<double>(record.minus)) /
           static_cast<double>(record.total);
}

EvStatistics ev_statistics(const HermitianOperator& re_u,
                           const QuantumState& psi, std::uint64_t m) {
    if (m == 0) throw ConfigError("ev_statistics: shot count must be positive");
    check_unitary_part(re_u, "ev_statistics");
    check_dims(re_u, psi, "ev_statistics");
    const cplx u = u_expectation(re_u, psi);
    EvStatistics stats;
    stats.p_plus = 0.25 * std::norm(cplx{1.0, 0.0} + u);
    stats.p_minus = 0.25 * std::norm(cplx{1.0, 0.0} - u);
    stats.p_zero = std::max(0.0, 1.0 - stats.p_plus - stats.p_minus);
    const double e = u.real();
    stats.variance = std::max(0.0, stats.p_plus + stats.p_minus - e * e) /
                     static_cast<double>(m);
    return stats;
}

SampleRecord ev_sample(const HermitianOperator& re_u, const QuantumState& psi,
                       std::uint64_t m, std::uint64_t seed) {
    const EvStatistics stats = ev_statistics(re_u, psi, m);
    Rng rng(seed);
    const std::vector<std::uint64_t> counts =
        rng.multinomial(m, {stats.p_plus, stats.p_minus, stats.p_zero});
    SampleRecord record;
    record.plus = counts[0];
    record.minus = counts[1];
    record.zero = counts[2];
    record.total = m;
    return record;
}

double cfev_expectation(const HermitianOperator& re_u, const QuantumState& psi,
                        const QuantumState& psi_ref, double phi_ref) {
    check_unitary_part(re_u, "cfev_expectation");
    check_dims(re_u, psi, "cfev_expectation");
    check_dims(re_u, psi_ref, "cfev_expectation");
    if (std::abs(overlap(psi_ref, psi)) > 1e-8) {
        throw ConfigError(
            "cfev_expectation: reference state is not orthogonal to psi");
    }
    const std::vector<cplx> u_ref =
        apply_canonical_unitary(re_u, psi_ref.amplitudes);
    const cplx phase{std::cos(phi_ref), std::sin(phi_ref)};
    double residual = 0.0;
    for (std::size_t i = 0; i < u_ref.size(); ++i) {
        residual += std::norm(u_ref[i] - phase * psi_ref.amplitudes[i]);
    }
    if (std::sqrt(residual) > 1e-8) {
        std::ostringstream msg;
        msg << "cfev_expectation: reference state is not an eigenstate with "
               "the given phase, residual "
            << std::sqrt(residual);
        throw ConfigError(msg.str());
    }
    const cplx u = u_expectation(re_u, psi);
    return (u * std::conj(phase)).real();
}

std::vector<double> parallel_ev_probabilities(
    const std::vector<HermitianOperator>& reflections,
    const QuantumState& psi) {
    const int k_count = static_cast<int>(reflections.size());
    if (k_count < 1 || k_count > 10) {
        throw ConfigError("parallel_ev_probabilities: need 1..10 operators");
    }
    for (const HermitianOperator& u : reflections) {
        check_dims(u, psi, "parallel_ev_probabilities");
        for (double lambda : u.spectrum().eigenvalues) {
            if (std::abs(lambda * lambda - 1.0) > 1e-9) {
                throw ConfigError(
                    "parallel_ev_probabilities: operator is not a reflection");
            }
        }
    }
    for (int a = 0; a < k_count; ++a) {
        for (int b = a + 1; b < k_count; ++b) {
            if (reflections[a].is_diagonal() && reflections[b].is_diagonal()) {
                continue;
            }
            const std::vector<cplx> ma = dense_matrix_of(reflections[a]);
            const std::vector<cplx> mb = dense_matrix_of(reflections[b]);
            const std::size_t dim = reflections[a].dim();
            double worst = 0.0;
            for (std::size_t r = 0; r < dim; ++r) {
                for (std::size_t c = 0; c < dim; ++c) {
                    cplx ab{0.0, 0.0};
                    cplx ba{0.0, 0.0};
                    for (std::size_t t = 0; t < dim; ++t) {
                        ab += ma[r * dim + t] * mb[t * dim + c];
                        ba += mb[r * dim + t] * ma[t * dim + c];
                    }
                    worst = std::max(worst, std::abs(ab - ba));
                }
            }
            if (worst > 1e-9) {
                throw ConfigError(
                    "parallel_ev_probabilities: operators do not commute");
            }
        }
    }
    const std::size_t table_size = std::size_t{1} << k_count;
    std::vector<double> table(table_size, 0.0);
    double total = 0.0;
    for (std::size_t sigma = 0; sigma < table_size; ++sigma) {
        std::vector<cplx> v = psi.amplitudes;
        for (int k = 0; k < k_count; ++k) {
            const double sign = (sigma >> k) & 1 ? -1.0 : 1.0;
            const std::vector<cplx> uv = apply_operator(reflections[k], v);
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] = 0.5 * (v[i] + sign * uv[i]);
            }
        }
        cplx amp{0.0, 0.0};
        for (std::size_t i = 0; i < v.size(); ++i) {
            amp += std::conj(psi.amplitudes[i]) * v[i];
        }
        const double projected = std::max(0.0, amp.real());
        table[sigma] = projected * projected;
        total += table[sigma];
    }
    if (total > 1.0 + 1e-9) {
        throw InvariantError(
            "parallel_ev_probabilities: probabilities exceed 1");
    }
    return table;
}

ParallelEvResult parallel_ev_estimate_and_variance(
    const std::vector<double>& table, int j, std::uint64_t m) {
    if (m == 0) {
        throw ConfigError(
            "parallel_ev_estimate_and_variance: shot count must be positive");
    }
    const std::size_t table_size = table.size();
    int k_count = 0;
    while ((std::size_t{1} << k_count) < table_size) ++k_count;
    if ((std::size_t{1} << k_count) != table_size || k_count < 1 ||
        k_count > 10) {
        throw ConfigError(
            "parallel_ev_estimate_and_variance: table size is not 2^K");
    }
    if (j < 0 || j >= k_count) {
        throw ConfigError("parallel_ev_estimate_and_variance: bad term index");
    }

    ParallelEvResult result;
    std::vector<double> p(table_size);
    for (std::size_t sigma = 0; sigma < table_size; ++sigma) {
        if (table[sigma] < 0.0) {
            result.clipped = true;
            p[sigma] = 0.0;
        } else {
            p[sigma] = table[sigma];
        }
    }

    double s_plus = 0.0;
    double s_minus = 0.0;
    for (std::size_t sigma = 0; sigma < table_size; ++sigma) {
        if ((sigma >> j) & 1) {
            s_minus += std::sqrt(p[sigma]);
        } else {
            s_plus += std::sqrt(p[sigma]);
        }
    }
    const double p_j_plus = s_plus * s_plus;
    const double p_j_minus = s_minus * s_minus;
    result.estimate = p_j_plus - p_j_minus;

    // First-order propagation: Var = g^T (diag(p) - p p^T) g / m with
    // gradient g_sigma = +-sqrt(p_{j,s})/sqrt(p_sigma).
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t sigma = 0; sigma < table_size; ++sigma) {
        if (p[sigma] <= 1e-300) continue;
        const bool minus = (sigma >> j) & 1;
        const double g =
            (minus ? -s_minus : s_plus) / std::sqrt(p[sigma]);
        quad += g * g * p[sigma];
        lin += g * p[sigma];
    }
    result.variance_propagated =
        std::max(0.0, quad - lin * lin) / static_cast<double>(m);

    const double scale = std::pow(2.0, k_count - 1);
    result.variance_marginal_form =
        (scale * (p_j_plus + p_j_minus) - result.estimate) /
        static_cast<double>(m);
    return result;
}

}  // namespace shotbudget
