#include "shotbudget/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "shotbudget/errors.hpp"

namespace shotbudget {

namespace {

std::size_t checked_dim(int n_qubits, std::size_t size, const char* what) {
    if (n_qubits < 1 || n_qubits > 26) {
        throw ConfigError(std::string(what) + ": qubit count out of range");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (size != dim) {
        std::ostringstream msg;
        msg << what << ": expected " << dim << " entries, got " << size;
        throw ConfigError(msg.str());
    }
    return dim;
}

double norm_squared(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const cplx& a : v) s += std::norm(a);
    return s;
}

// Groups sorted values whose neighbours lie within tol of each other.
// Returns one representative (mean) per group plus each value's group id.
void chain_merge(const std::vector<double>& sorted_values, double tol,
                 std::vector<double>& representatives,
                 std::vector<int>& group_of_sorted) {
    representatives.clear();
    group_of_sorted.assign(sorted_values.size(), 0);
    std::size_t start = 0;
    while (start < sorted_values.size()) {
        std::size_t stop = start + 1;
        while (stop < sorted_values.size() &&
               sorted_values[stop] - sorted_values[stop - 1] <= tol) {
            ++stop;
        }
        double mean = 0.0;
        for (std::size_t k = start; k < stop; ++k) mean += sorted_values[k];
        mean /= static_cast<double>(stop - start);
        const int id = static_cast<int>(representatives.size());
        representatives.push_back(mean);
        for (std::size_t k = start; k < stop; ++k) group_of_sorted[k] = id;
        start = stop;
    }
}

double grouping_tolerance(const std::vector<double>& values) {
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));
    return 1e-9 * std::max(1.0, peak);
}

Spectrum build_diagonal_spectrum(const std::vector<double>& diag) {
    const std::size_t dim = diag.size();
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return diag[a] < diag[b]; });
    std::vector<double> sorted(dim);
    for (std::size_t k = 0; k < dim; ++k) sorted[k] = diag[order[k]];

    Spectrum spec;
    spec.degeneracy_tolerance = grouping_tolerance(diag);
    spec.dim = dim;
    spec.diagonal = true;
    std::vector<int> group_of_sorted;
    chain_merge(sorted, spec.degeneracy_tolerance, spec.eigenvalues,
                group_of_sorted);
    spec.group_of_index.assign(dim, 0);
    spec.ranks.assign(spec.eigenvalues.size(), 0);
    for (std::size_t k = 0; k < dim; ++k) {
        spec.group_of_index[order[k]] = group_of_sorted[k];
        ++spec.ranks[group_of_sorted[k]];
    }
    return spec;
}

Spectrum build_dense_spectrum(std::size_t dim, const std::vector<cplx>& matrix) {
    auto [values, vectors] = eigen_hermitian(dim, matrix);
    Spectrum spec;
    spec.degeneracy_tolerance = grouping_tolerance(values);
    spec.dim = dim;
    spec.diagonal = false;
    std::vector<int> group_of_sorted;
    chain_merge(values, spec.degeneracy_tolerance, spec.eigenvalues,
                group_of_sorted);
    spec.ranks.assign(spec.eigenvalues.size(), 0);
    spec.projectors.assign(spec.eigenvalues.size(),
                           std::vector<cplx>(dim * dim, cplx{0.0, 0.0}));
    for (std::size_t k = 0; k < dim; ++k) {
        const int g = group_of_sorted[k];
        ++spec.ranks[g];
        std::vector<cplx>& proj = spec.projectors[g];
        for (std::size_t r = 0; r < dim; ++r) {
            const cplx vr = vectors[r * dim + k];
            if (vr == cplx{0.0, 0.0}) continue;
            for (std::size_t c = 0; c < dim; ++c) {
                proj[r * dim + c] += vr * std::conj(vectors[c * dim + k]);
            }
        }
    }
    return spec;
}

std::vector<cplx> apply_dense(std::size_t dim, const std::vector<cplx>& matrix,
                              const std::vector<cplx>& v) {
    std::vector<cplx> out(dim, cplx{0.0, 0.0});
    for (std::size_t r = 0; r < dim; ++r) {
        cplx acc{0.0, 0.0};
        const cplx* row = matrix.data() + r * dim;
        for (std::size_t c = 0; c < dim; ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
    return out;
}

double phase_angle(double eigenvalue) {
    return std::acos(std::clamp(eigenvalue, -1.0, 1.0));
}

}  // namespace

QuantumState make_state(int n_qubits, std::vector<cplx> amplitudes) {
    const std::size_t dim =
        checked_dim(n_qubits, amplitudes.size(), "make_state");
    (void)dim;
    const double norm = std::sqrt(norm_squared(amplitudes));
    if (std::abs(norm - 1.0) > 1e-10) {
        std::ostringstream msg;
        msg << "make_state: amplitude norm " << norm << " is not 1";
        throw ConfigError(msg.str());
    }
    for (cplx& a : amplitudes) a /= norm;
    return QuantumState{n_qubits, std::move(amplitudes)};
}

QuantumState basis_state(int n_qubits, std::uint64_t index) {
    if (n_qubits < 1 || n_qubits > 26) {
        throw ConfigError("basis_state: qubit count out of range");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (index >= dim) {
        throw ConfigError("basis_state: index out of range");
    }
    std::vector<cplx> amp(dim, cplx{0.0, 0.0});
    amp[index] = cplx{1.0, 0.0};
    return QuantumState{n_qubits, std::move(amp)};
}

cplx overlap(const QuantumState& a, const QuantumState& b) {
    if (a.n_qubits != b.n_qubits) {
        throw ConfigError("overlap: qubit counts differ");
    }
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
        acc += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    }
    return acc;
}

const Spectrum& HermitianOperator::spectrum() const {
    std::call_once(data_->spectrum_once, [this] {
        if (data_->diagonal) {
            data_->spectrum = std::make_unique<Spectrum>(
                build_diagonal_spectrum(data_->diag));
        } else {
            data_->spectrum = std::make_unique<Spectrum>(
                build_dense_spectrum(data_->dim, data_->dense));
        }
    });
    return *data_->spectrum;
}

HermitianOperator diagonal_operator(int n_qubits, std::vector<double> entries) {
    checked_dim(n_qubits, entries.size(), "diagonal_operator");
    HermitianOperator op;
    op.data_ = std::make_shared<HermitianOperator::Data>();
    op.data_->n_qubits = n_qubits;
    op.data_->diagonal = true;
    op.data_->dim = entries.size();
    op.data_->diag = std::move(entries);
    return op;
}

HermitianOperator dense_operator(int n_qubits, std::vector<cplx> matrix) {
    if (n_qubits < 1 || n_qubits > 13) {
        throw ConfigError("dense_operator: qubit count out of range");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (matrix.size() != dim * dim) {
        throw ConfigError("dense_operator: matrix size does not match qubits");
    }
    double residual = 0.0;
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = r; c < dim; ++c) {
            residual = std::max(
                residual,
                std::abs(matrix[r * dim + c] - std::conj(matrix[c * dim + r])));
        }
    }
    double peak = 0.0;
    for (const cplx& m : matrix) peak = std::max(peak, std::abs(m));
    if (residual > 1e-12 * std::max(1.0, peak)) {
        std::ostringstream msg;
        msg << "dense_operator: matrix is not Hermitian, residual " << residual;
        throw ConfigError(msg.str());
    }
    for (std::size_t r = 0; r < dim; ++r) {
        matrix[r * dim + r] = cplx{matrix[r * dim + r].real(), 0.0};
        for (std::size_t c = r + 1; c < dim; ++c) {
            const cplx mean =
                0.5 * (matrix[r * dim + c] + std::conj(matrix[c * dim + r]));
            matrix[r * dim + c] = mean;
            matrix[c * dim + r] = std::conj(mean);
        }
    }
    HermitianOperator op;
    op.data_ = std::make_shared<HermitianOperator::Data>();
    op.data_->n_qubits = n_qubits;
    op.data_->diagonal = false;
    op.data_->dim = dim;
    op.data_->dense = std::move(matrix);
    return op;
}

HermitianOperator identity_operator(int n_qubits, double value) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    return diagonal_operator(n_qubits, std::vector<double>(dim, value));
}

HermitianOperator weighted_z(const std::vector<double>& weights) {
    const int n = static_cast<int>(weights.size());
    if (n < 1) throw ConfigError("weighted_z: need at least one weight");
    const std::size_t dim = std::size_t{1} << n;
    std::vector<double> entries(dim, 0.0);
    for (std::size_t index = 0; index < dim; ++index) {
        double value = 0.0;
        for (int q = 0; q < n; ++q) {
            value += weights[q] * ((index >> q) & 1 ? -1.0 : 1.0);
        }
        entries[index] = value;
    }
    return diagonal_operator(n, std::move(entries));
}

HermitianOperator pauli_sum(
    int n_qubits, const std::vector<std::pair<double, std::string>>& terms) {
    if (n_qubits < 1 || n_qubits > 13) {
        throw ConfigError("pauli_sum: qubit count out of range");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    bool diagonal = true;
    for (const auto& [coeff, label] : terms) {
        (void)coeff;
        if (static_cast<int>(label.size()) != n_qubits) {
            throw ConfigError("pauli_sum: label length does not match qubits");
        }
        for (char c : label) {
            if (c == 'X' || c == 'Y') diagonal = false;
            else if (c != 'I' && c != 'Z') {
                throw ConfigError("pauli_sum: unknown Pauli letter");
            }
        }
    }
    if (diagonal) {
        std::vector<double> entries(dim, 0.0);
        for (const auto& [coeff, label] : terms) {
            for (std::size_t index = 0; index < dim; ++index) {
                double sign = 1.0;
                for (int q = 0; q < n_qubits; ++q) {
                    if (label[q] == 'Z' && ((index >> q) & 1)) sign = -sign;
                }
                entries[index] += coeff * sign;
            }
        }
        return diagonal_operator(n_qubits, std::move(entries));
    }
    std::vector<cplx> matrix(dim * dim, cplx{0.0, 0.0});
    for (const auto& [coeff, label] : terms) {
        for (std::size_t col = 0; col < dim; ++col) {
            std::size_t row = col;
            cplx phase{1.0, 0.0};
            for (int q = 0; q < n_qubits; ++q) {
                const bool bit = (col >> q) & 1;
                switch (label[q]) {
                    case 'X':
                        row ^= std::size_t{1} << q;
                        break;
                    case 'Y':
                        row ^= std::size_t{1} << q;
                        phase *= bit ? cplx{0.0, -1.0} : cplx{0.0, 1.0};
                        break;
                    case 'Z':
                        if (bit) phase = -phase;
                        break;
                    default:
                        break;
                }
            }
            matrix[row * dim + col] += coeff * phase;
        }
    }
    return dense_operator(n_qubits, std::move(matrix));
}

HermitianOperator xx_plus_yy() {
    return pauli_sum(2, {{1.0, "XX"}, {1.0, "YY"}});
}

HermitianOperator heisenberg_triple() {
    std::vector<std::pair<double, std::string>> terms;
    const char axes[3] = {'X', 'Y', 'Z'};
    const std::pair<int, int> bonds[3] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& [m, l] : bonds) {
        for (char axis : axes) {
            std::string label = "III";
            label[m] = axis;
            label[l] = axis;
            terms.emplace_back(1.0 / 3.0, label);
        }
    }
    return pauli_sum(3, terms);
}

HermitianOperator linear_combination(double alpha, const HermitianOperator& a,
                                     double beta, const HermitianOperator& b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw ConfigError("linear_combination: operator sizes differ");
    }
    if (a.is_diagonal() && b.is_diagonal()) {
        std::vector<double> entries(a.dim());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            entries[i] = alpha * a.diag()[i] + beta * b.diag()[i];
        }
        return diagonal_operator(a.n_qubits(), std::move(entries));
    }
    const std::vector<cplx> ma = dense_matrix_of(a);
    const std::vector<cplx> mb = dense_matrix_of(b);
    std::vector<cplx> m(ma.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
        m[k] = alpha * ma[k] + beta * mb[k];
    }
    return dense_operator(a.n_qubits(), std::move(m));
}

HermitianOperator shifted(const HermitianOperator& op, double scale,
                          double shift) {
    if (op.is_diagonal()) {
        std::vector<double> entries(op.dim());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            entries[i] = scale * op.diag()[i] + shift;
        }
        return diagonal_operator(op.n_qubits(), std::move(entries));
    }
    const std::size_t dim = op.dim();
    std::vector<cplx> m = op.dense();
    for (std::size_t k = 0; k < m.size(); ++k) m[k] *= scale;
    for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] += shift;
    return dense_operator(op.n_qubits(), std::move(m));
}

double expectation(const HermitianOperator& op, const QuantumState& psi) {
    if (op.n_qubits() != psi.n_qubits) {
        throw ConfigError("expectation: operator and state sizes differ");
    }
    if (op.is_diagonal()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < op.diag().size(); ++i) {
            acc += op.diag()[i] * std::norm(psi.amplitudes[i]);
        }
        return acc;
    }
    const std::vector<cplx> w = apply_operator(op, psi.amplitudes);
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += std::conj(psi.amplitudes[i]) * w[i];
    }
    if (std::abs(acc.imag()) > 1e-10 * std::max(1.0, std::abs(acc.real()))) {
        throw InvariantError("expectation: imaginary residual too large");
    }
    return acc.real();
}

double von_neumann_variance(const HermitianOperator& op,
                            const QuantumState& psi) {
    if (op.n_qubits() != psi.n_qubits) {
        throw ConfigError("von_neumann_variance: sizes differ");
    }
    double second = 0.0;
    double first = 0.0;
    if (op.is_diagonal()) {
        for (std::size_t i = 0; i < op.diag().size(); ++i) {
            const double p = std::norm(psi.amplitudes[i]);
            first += op.diag()[i] * p;
            second += op.diag()[i] * op.diag()[i] * p;
        }
    } else {
        const std::vector<cplx> w = apply_operator(op, psi.amplitudes);
        second = norm_squared(w);
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i < w.size(); ++i) {
            acc += std::conj(psi.amplitudes[i]) * w[i];
        }
        first = acc.real();
    }
    return std::max(0.0, second - first * first);
}

double spectral_norm(const HermitianOperator& op) {
    if (op.is_diagonal()) {
        double peak = 0.0;
        for (double d : op.diag()) peak = std::max(peak, std::abs(d));
        return peak;
    }
    double peak = 0.0;
    for (double v : op.spectrum().eigenvalues) peak = std::max(peak, std::abs(v));
    return peak;
}

std::vector<cplx> apply_operator(const HermitianOperator& op,
                        const std::vector<cplx>& v) {
    if (v.size() != op.dim()) {
        throw ConfigError("apply: vector size does not match operator");
    }
    if (op.is_diagonal()) {
        std::vector<cplx> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = op.diag()[i] * v[i];
        return out;
    }
    return apply_dense(op.dim(), op.dense(), v);
}

std::vector<cplx> dense_matrix_of(const HermitianOperator& op) {
    const std::size_t dim = op.dim();
    if (!op.is_diagonal()) return op.dense();
    std::vector<cplx> matrix(dim * dim, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < dim; ++i) {
        matrix[i * dim + i] = cplx{op.diag()[i], 0.0};
    }
    return matrix;
}

std::vector<double> occupations(const Spectrum& spec, const QuantumState& psi) {
    if (psi.amplitudes.size() != spec.dim) {
        throw ConfigError("occupations: state size does not match spectrum");
    }
    std::vector<double> occ(spec.size(), 0.0);
    if (spec.diagonal) {
        for (std::size_t i = 0; i < spec.dim; ++i) {
            occ[spec.group_of_index[i]] += std::norm(psi.amplitudes[i]);
        }
        return occ;
    }
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const std::vector<cplx> w =
            apply_dense(spec.dim, spec.projectors[j], psi.amplitudes);
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i < spec.dim; ++i) {
            acc += std::conj(psi.amplitudes[i]) * w[i];
        }
        occ[j] = std::max(0.0, acc.real());
    }
    return occ;
}

HermitianOperator spectral_map(const HermitianOperator& op,
                               const std::function<double(double)>& f) {
    const Spectrum& spec = op.spectrum();
    if (op.is_diagonal()) {
        std::vector<double> entries(spec.dim);
        for (std::size_t i = 0; i < spec.dim; ++i) {
            entries[i] = f(spec.eigenvalues[spec.group_of_index[i]]);
        }
        return diagonal_operator(op.n_qubits(), std::move(entries));
    }
    std::vector<cplx> matrix(spec.dim * spec.dim, cplx{0.0, 0.0});
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double value = f(spec.eigenvalues[j]);
        for (std::size_t k = 0; k < matrix.size(); ++k) {
            matrix[k] += value * spec.projectors[j][k];
        }
    }
    return dense_operator(op.n_qubits(), std::move(matrix));
}

cplx u_expectation(const HermitianOperator& re_u, const QuantumState& psi) {
    const Spectrum& spec = re_u.spectrum();
    const std::vector<double> occ = occupations(spec, psi);
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double theta = phase_angle(spec.eigenvalues[j]);
        acc += occ[j] * cplx{std::cos(theta), std::sin(theta)};
    }
    return acc;
}

std::vector<cplx> apply_canonical_unitary(const HermitianOperator& re_u,
                                          const std::vector<cplx>& v) {
    if (v.size() != re_u.dim()) {
        throw ConfigError("apply_canonical_unitary: vector size mismatch");
    }
    if (re_u.is_diagonal()) {
        std::vector<cplx> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double theta = phase_angle(re_u.diag()[i]);
            out[i] = cplx{std::cos(theta), std::sin(theta)} * v[i];
        }
        return out;
    }
    const Spectrum& spec = re_u.spectrum();
    std::vector<cplx> out(v.size(), cplx{0.0, 0.0});
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double theta = phase_angle(spec.eigenvalues[j]);
        const cplx phase{std::cos(theta), std::sin(theta)};
        const std::vector<cplx> w = apply_dense(spec.dim, spec.projectors[j], v);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] += phase * w[i];
    }
    return out;
}

std::pair<std::vector<double>, std::vector<cplx>> eigen_hermitian(
    std::size_t dim, const std::vector<cplx>& matrix) {
    if (matrix.size() != dim * dim) {
        throw ConfigError("eigen_hermitian: matrix size mismatch");
    }
    std::vector<cplx> a = matrix;
    for (std::size_t r = 0; r < dim; ++r) {
        a[r * dim + r] = cplx{a[r * dim + r].real(), 0.0};
        for (std::size_t c = r + 1; c < dim; ++c) {
            const cplx mean = 0.5 * (a[r * dim + c] + std::conj(a[c * dim + r]));
            a[r * dim + c] = mean;
            a[c * dim + r] = std::conj(mean);
        }
    }
    std::vector<cplx> vectors(dim * dim, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < dim; ++i) vectors[i * dim + i] = cplx{1.0, 0.0};

    double frob = 0.0;
    for (const cplx& m : a) frob += std::norm(m);
    frob = std::sqrt(frob);
    const double target = 1e-13 * std::max(1.0, frob);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = r + 1; c < dim; ++c) {
                s += std::norm(a[r * dim + c]);
            }
        }
        return std::sqrt(2.0 * s);
    };

    const int max_sweeps = 100;
    int sweep = 0;
    while (off_norm() > target) {
        if (++sweep > max_sweeps) {
            std::ostringstream msg;
            msg << "eigen_hermitian: no convergence after " << max_sweeps
                << " sweeps, off-diagonal norm " << off_norm();
            throw InvariantError(msg.str());
        }
        for (std::size_t p = 0; p < dim; ++p) {
            for (std::size_t q = p + 1; q < dim; ++q) {
                const cplx g = a[p * dim + q];
                const double absg = std::abs(g);
                if (absg == 0.0) continue;
                const double phi = std::arg(g);
                const double app = a[p * dim + p].real();
                const double aqq = a[q * dim + q].real();
                const double theta = 0.5 * std::atan2(2.0 * absg, app - aqq);
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                const cplx ehalf{std::cos(phi / 2.0), std::sin(phi / 2.0)};
                const cplx r00 = c * ehalf;
                const cplx r01 = -s * ehalf;
                const cplx r10 = s * std::conj(ehalf);
                const cplx r11 = c * std::conj(ehalf);
                for (std::size_t i = 0; i < dim; ++i) {
                    const cplx aip = a[i * dim + p];
                    const cplx aiq = a[i * dim + q];
                    a[i * dim + p] = aip * r00 + aiq * r10;
                    a[i * dim + q] = aip * r01 + aiq * r11;
                }
                for (std::size_t j = 0; j < dim; ++j) {
                    const cplx apj = a[p * dim + j];
                    const cplx aqj = a[q * dim + j];
                    a[p * dim + j] = std::conj(r00) * apj + std::conj(r10) * aqj;
                    a[q * dim + j] = std::conj(r01) * apj + std::conj(r11) * aqj;
                }
                for (std::size_t i = 0; i < dim; ++i) {
                    const cplx vip = vectors[i * dim + p];
                    const cplx viq = vectors[i * dim + q];
                    vectors[i * dim + p] = vip * r00 + viq * r10;
                    vectors[i * dim + q] = vip * r01 + viq * r11;
                }
            }
        }
    }

    std::vector<double> values(dim);
    for (std::size_t i = 0; i < dim; ++i) values[i] = a[i * dim + i].real();
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return values[x] < values[y];
    });
    std::vector<double> sorted_values(dim);
    std::vector<cplx> sorted_vectors(dim * dim);
    for (std::size_t k = 0; k < dim; ++k) {
        sorted_values[k] = values[order[k]];
        for (std::size_t r = 0; r < dim; ++r) {
            sorted_vectors[r * dim + k] = vectors[r * dim + order[k]];
        }
    }
    return {std::move(sorted_values), std::move(sorted_vectors)};
}

}  // namespace shotbudget
