#include "shotbudget/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shotbudget/errors.hpp"
#include "shotbudget/measure.hpp"
#include "shotbudget/rng.hpp"

namespace shotbudget {

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_entry(const HermitianOperator& op) {
    double peak = 0.0;
    if (op.is_diagonal()) {
        for (double v : op.diag()) peak = std::max(peak, std::abs(v));
    } else {
        for (const cplx& v : op.dense()) peak = std::max(peak, std::abs(v));
    }
    return peak;
}

void check_term(const DecompositionTerm& term, bool positive_coefficient) {
    if (!std::isfinite(term.coefficient) || term.coefficient < 0.0) {
        throw ConfigError("term coefficient must be finite and nonnegative");
    }
    if (positive_coefficient && term.coefficient == 0.0) {
        throw ConfigError("term coefficient must be positive");
    }
    if (spectral_norm(term.op) > 1.0 + 1e-10) {
        throw ConfigError("term operator must have spectral norm at most 1");
    }
}

HermitianOperator reconstructed_operator(const HermitianOperator& target,
                                         double shift,
                                         const std::vector<DecompositionTerm>& terms) {
    HermitianOperator acc = shifted(target, 0.0, shift);
    for (const DecompositionTerm& term : terms) {
        acc = linear_combination(1.0, acc, term.coefficient, term.op);
    }
    return acc;
}

Decomposition finalize(HermitianOperator target, double shift,
                       std::vector<DecompositionTerm> terms, bool enforce) {
    const HermitianOperator acc = reconstructed_operator(target, shift, terms);
    const double residual =
        max_abs_entry(linear_combination(1.0, acc, -1.0, target));
    if (enforce &&
        residual > 1e-8 * std::max(1.0, spectral_norm(target))) {
        throw InvariantError("decomposition does not reconstruct its target");
    }
    return Decomposition{std::move(target), shift, std::move(terms), residual};
}

std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (std::abs(a[pivot][col]) < 1e-14) {
            throw InvariantError("singular interpolation system");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double s = b[row];
        for (std::size_t k = row + 1; k < n; ++k) s -= a[row][k] * x[k];
        x[row] = s / a[row][row];
    }
    return x;
}

double gpsk_angle(int order, int l) {
    return 2.0 * kPi * static_cast<double>(l) /
           static_cast<double>(2 * order + 1);
}

void check_order(int order) {
    if (order < 1 || order > 64) {
        throw ConfigError("interpolation order must be between 1 and 64");
    }
}

struct ThresholdLayout {
    double shift = 0.0;
    std::vector<double> midpoints;     // mu_x between consecutive eigenvalues
    std::vector<double> coefficients;  // (lambda_x - lambda_{x-1}) / 2
};

ThresholdLayout threshold_layout(const Spectrum& spec) {
    ThresholdLayout layout;
    const std::vector<double>& ev = spec.eigenvalues;
    layout.shift = 0.5 * (ev.front() + ev.back());
    for (std::size_t x = 1; x < ev.size(); ++x) {
        layout.midpoints.push_back(0.5 * (ev[x - 1] + ev[x]));
        layout.coefficients.push_back(0.5 * (ev[x] - ev[x - 1]));
    }
    return layout;
}

}  // namespace

Decomposition pauli_decomposition(const std::vector<double>& weights) {
    const int n = static_cast<int>(weights.size());
    HermitianOperator target = weighted_z(weights);
    std::vector<DecompositionTerm> terms;
    for (int j = 0; j < n; ++j) {
        if (weights[static_cast<std::size_t>(j)] == 0.0) continue;
        std::string s(static_cast<std::size_t>(n), 'I');
        s[static_cast<std::size_t>(j)] = 'Z';
        const double w = weights[static_cast<std::size_t>(j)];
        terms.push_back(DecompositionTerm{
            std::abs(w), pauli_sum(n, {{w < 0.0 ? -1.0 : 1.0, s}}),
            SamplingMode::analytic, "z[" + std::to_string(j) + "]"});
    }
    return finalize(std::move(target), 0.0, std::move(terms), true);
}

Decomposition xi_decomposition(const HermitianOperator& op) {
    const ThresholdLayout layout = threshold_layout(op.spectrum());
    std::vector<DecompositionTerm> terms;
    for (std::size_t x = 0; x < layout.midpoints.size(); ++x) {
        const double mu = layout.midpoints[x];
        terms.push_back(DecompositionTerm{
            layout.coefficients[x],
            spectral_map(op, [mu](double v) { return v > mu ? 1.0 : -1.0; }),
            SamplingMode::analytic, "xi[" + std::to_string(x + 1) + "]"});
    }
    return finalize(op, layout.shift, std::move(terms), true);
}

std::vector<double> gpsk_solved_coefficients(int order) {
    check_order(order);
    const std::size_t r = static_cast<std::size_t>(order);
    std::vector<std::vector<double>> a(r, std::vector<double>(r, 0.0));
    std::vector<double> b(r, 0.0);
    for (std::size_t j = 0; j < r; ++j) {
        b[j] = static_cast<double>(j + 1);
        for (std::size_t l = 0; l < r; ++l) {
            a[j][l] = std::sin(static_cast<double>(j + 1) *
                               gpsk_angle(order, static_cast<int>(l + 1)));
        }
    }
    return solve_linear(std::move(a), std::move(b));
}

std::vector<double> gpsk_closed_form_coefficients(int order) {
    check_order(order);
    std::vector<double> c(static_cast<std::size_t>(order), 0.0);
    for (int l = 1; l <= order; ++l) {
        const double s = std::sin(0.5 * gpsk_angle(order, l));
        const double sign = (l % 2 == 1) ? 1.0 : -1.0;
        c[static_cast<std::size_t>(l - 1)] =
            sign / (2.0 * static_cast<double>(order) * s * s);
    }
    return c;
}

std::vector<double> gpsk_kernel_derivative_coefficients(int order) {
    check_order(order);
    std::vector<double> c(static_cast<std::size_t>(order), 0.0);
    for (int l = 1; l <= order; ++l) {
        c[static_cast<std::size_t>(l - 1)] =
            0.5 * static_cast<double>(order) * std::cos(gpsk_angle(order, l));
    }
    return c;
}

Decomposition gpsk_decomposition(const HermitianOperator& op, int order) {
    check_order(order);
    const Spectrum& spec = op.spectrum();
    for (double v : spec.eigenvalues) {
        const double r = std::round(v);
        if (std::abs(v - r) > 1e-9) {
            throw ConfigError("operator spectrum is not integer valued");
        }
        if (std::abs(r) > static_cast<double>(order) + 0.5) {
            throw ConfigError("operator spectrum exceeds interpolation order");
        }
    }
    const std::vector<double> coeff = gpsk_solved_coefficients(order);
    std::vector<DecompositionTerm> terms;
    for (int l = 1; l <= order; ++l) {
        const double c = coeff[static_cast<std::size_t>(l - 1)];
        if (std::abs(c) < 1e-14) continue;
        const double t = gpsk_angle(order, l);
        const double sign = c < 0.0 ? -1.0 : 1.0;
        terms.push_back(DecompositionTerm{
            std::abs(c),
            spectral_map(op,
                         [t, sign](double v) { return sign * std::sin(v * t); }),
            SamplingMode::analytic, "gpsk[" + std::to_string(l) + "]"});
    }
    return finalize(op, 0.0, std::move(terms), true);
}

double gpsk_variance(const Decomposition& decomp, const QuantumState& psi,
                     long long shots) {
    if (shots < 1) throw ConfigError("shot count must be positive");
    return decomposition_cost(decomp, psi, 1.0) / static_cast<double>(shots);
}

double gpsk_closed_form_variance(const HermitianOperator& op, int order,
                                 const QuantumState& psi, long long shots) {
    if (shots < 1) throw ConfigError("shot count must be positive");
    const std::vector<double> coeff = gpsk_closed_form_coefficients(order);
    double weight = 0.0;
    for (int l = 1; l <= order; ++l) {
        const double t = gpsk_angle(order, l);
        const double e = expectation(
            spectral_map(op, [t](double v) { return std::sin(v * t); }), psi);
        weight += std::abs(coeff[static_cast<std::size_t>(l - 1)]) *
                  std::sqrt(std::max(0.0, 1.0 - e * e));
    }
    return weight * weight / static_cast<double>(shots);
}

Decomposition sgn_decomposition_with(const HermitianOperator& op,
                                     const std::function<double(double)>& profile,
                                     double t_margin) {
    if (!(t_margin >= 0.0 && t_margin < 1.0)) {
        throw ConfigError("t_margin must lie in [0, 1)");
    }
    const Spectrum& spec = op.spectrum();
    const ThresholdLayout layout = threshold_layout(spec);
    std::vector<DecompositionTerm> terms;
    for (std::size_t x = 0; x < layout.midpoints.size(); ++x) {
        const double mu = layout.midpoints[x];
        double span = 0.0;
        for (double v : spec.eigenvalues) {
            span = std::max(span, std::abs(v - mu));
        }
        const double t = (1.0 - t_margin) * kPi / span;
        for (double v : spec.eigenvalues) {
            if (std::abs(profile((v - mu) * t)) > 1.0 + 1e-9) {
                throw ConfigError("sign profile exceeds the unit interval");
            }
        }
        terms.push_back(DecompositionTerm{
            layout.coefficients[x],
            spectral_map(op, [&profile, mu, t](double v) {
                return std::clamp(profile((v - mu) * t), -1.0, 1.0);
            }),
            SamplingMode::monte_carlo, "sgn[" + std::to_string(x + 1) + "]"});
    }
    return finalize(op, layout.shift, std::move(terms), false);
}

Decomposition sgn_decomposition(const HermitianOperator& op,
                                const SignApproximation& approx,
                                double t_margin) {
    validate_phases(approx.phases);
    const std::vector<double> phases = approx.phases.phases;
    return sgn_decomposition_with(
        op, [phases](double w) { return sign_approximant(phases, w); },
        t_margin);
}

std::pair<double, DecompositionTerm> center_term(const DecompositionTerm& term) {
    const Spectrum& spec = term.op.spectrum();
    const double lo = spec.eigenvalues.front();
    const double hi = spec.eigenvalues.back();
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    if (half <= 1e-12 * std::max(1.0, std::abs(mid))) {
        return {term.coefficient * mid,
                DecompositionTerm{0.0, term.op, term.mode, term.label}};
    }
    return {term.coefficient * mid,
            DecompositionTerm{term.coefficient * half,
                              shifted(term.op, 1.0 / half, -mid / half),
                              term.mode, term.label}};
}

bool is_reflection(const HermitianOperator& op, double tolerance) {
    for (double v : op.spectrum().eigenvalues) {
        if (std::abs(v * v - 1.0) > tolerance) return false;
    }
    return true;
}

SplitReport validate_split(const DecompositionTerm& parent,
                           const std::vector<DecompositionTerm>& children) {
    check_term(parent, true);
    if (children.empty()) throw ConfigError("split has no children");
    double sum = 0.0;
    HermitianOperator acc = shifted(parent.op, -parent.coefficient, 0.0);
    for (const DecompositionTerm& child : children) {
        check_term(child, true);
        if (child.op.n_qubits() != parent.op.n_qubits()) {
            throw ConfigError("split children act on a different register");
        }
        sum += child.coefficient;
        acc = linear_combination(1.0, acc, child.coefficient, child.op);
    }
    SplitReport report;
    report.coefficient_gap = sum - parent.coefficient;
    const double scale = std::max(1.0, parent.coefficient);
    report.norm_preserving = std::abs(report.coefficient_gap) <= 1e-9 * scale;
    report.norm_increasing = report.coefficient_gap > 1e-9 * scale;
    const double residual = max_abs_entry(acc);
    report.reconstructs =
        residual <=
        1e-8 * std::max(1.0, parent.coefficient * spectral_norm(parent.op));
    return report;
}

double term_shot_weight(const DecompositionTerm& term, const QuantumState& psi) {
    const double e = expectation(term.op, psi);
    return term.coefficient * std::sqrt(std::max(0.0, 1.0 - e * e));
}

double decomposition_cost(const Decomposition& decomp, const QuantumState& psi,
                          double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    double weight = 0.0;
    for (const DecompositionTerm& term : decomp.terms) {
        weight += term_shot_weight(term, psi);
    }
    return weight * weight / (epsilon * epsilon);
}

double reconstruct_expectation(const Decomposition& decomp,
                               const QuantumState& psi) {
    double value = decomp.identity_shift;
    for (const DecompositionTerm& term : decomp.terms) {
        value += term.coefficient * expectation(term.op, psi);
    }
    return value;
}

namespace {

double variance_impl(const Decomposition& decomp, const QuantumState& psi,
                     const std::vector<long long>& shots, bool sampled,
                     std::uint64_t seed) {
    if (shots.size() != decomp.terms.size()) {
        throw ConfigError("one shot count per term is required");
    }
    double variance = 0.0;
    for (std::size_t x = 0; x < decomp.terms.size(); ++x) {
        const DecompositionTerm& term = decomp.terms[x];
        const long long m = shots[x];
        if (term.coefficient == 0.0) continue;
        if (m < 1) throw ConfigError("every weighted term needs shots");
        double e;
        if (sampled && term.mode == SamplingMode::monte_carlo) {
            const SampleRecord rec = ht_sample(
                term.op, psi, m, derive_seed(seed, static_cast<std::uint64_t>(x)));
            e = std::clamp(sample_mean(rec), -1.0, 1.0);
        } else {
            e = expectation(term.op, psi);
        }
        variance += term.coefficient * term.coefficient * (1.0 - e * e) /
                    static_cast<double>(m);
    }
    return variance;
}

}  // namespace

double decomposition_variance(const Decomposition& decomp,
                              const QuantumState& psi,
                              const std::vector<long long>& shots) {
    return variance_impl(decomp, psi, shots, false, 0);
}

double sampled_decomposition_variance(const Decomposition& decomp,
                                      const QuantumState& psi,
                                      const std::vector<long long>& shots,
                                      std::uint64_t seed) {
    return variance_impl(decomp, psi, shots, true, seed);
}

std::vector<QuantumState> extremal_probe_states(const HermitianOperator& op) {
    const Spectrum& spec = op.spectrum();
    const int n = op.n_qubits();
    auto eigenvector_of_group = [&](std::size_t g) {
        if (spec.diagonal) {
            for (std::size_t i = 0; i < spec.group_of_index.size(); ++i) {
                if (spec.group_of_index[i] == static_cast<int>(g)) {
                    return basis_state(n, i);
                }
            }
            throw InvariantError("eigenvalue group has no basis index");
        }
        const std::vector<cplx>& p = spec.projectors[g];
        const std::size_t dim = spec.dim;
        std::size_t best_col = 0;
        double best_norm = -1.0;
        for (std::size_t c = 0; c < dim; ++c) {
            double nrm = 0.0;
            for (std::size_t r = 0; r < dim; ++r) nrm += std::norm(p[r * dim + c]);
            if (nrm > best_norm) {
                best_norm = nrm;
                best_col = c;
            }
        }
        std::vector<cplx> v(dim);
        double nrm = 0.0;
        for (std::size_t r = 0; r < dim; ++r) {
            v[r] = p[r * dim + best_col];
            nrm += std::norm(v[r]);
        }
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw InvariantError("projector column is null");
        for (cplx& a : v) a /= nrm;
        return make_state(n, std::move(v));
    };

    const QuantumState bottom = eigenvector_of_group(0);
    if (spec.size() == 1) return {bottom};
    const QuantumState top = eigenvector_of_group(spec.size() - 1);
    std::vector<cplx> mix(bottom.amplitudes.size());
    const double inv = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < mix.size(); ++i) {
        mix[i] = inv * (bottom.amplitudes[i] + top.amplitudes[i]);
    }
    return {bottom, top, make_state(n, std::move(mix))};
}

}  // namespace shotbudget
