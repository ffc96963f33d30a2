#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace shotbudget {

using cplx = std::complex<double>;

// Amplitude vector over the 2^n computational basis states.
// Index bit q (little-endian) is the state of qubit q.
struct QuantumState {
    int n_qubits = 0;
    std::vector<cplx> amplitudes;
};

QuantumState make_state(int n_qubits, std::vector<cplx> amplitudes);
QuantumState basis_state(int n_qubits, std::uint64_t index);
cplx overlap(const QuantumState& a, const QuantumState& b);

// Distinct eigenvalues with their eigenspace projectors. For diagonal
// operators the projectors are kept implicitly as a group id per basis index;
// dense operators carry explicit projector matrices (row-major).
struct Spectrum {
    std::vector<double> eigenvalues;
    std::vector<int> ranks;
    double degeneracy_tolerance = 0.0;
    std::size_t dim = 0;
    bool diagonal = false;
    std::vector<int> group_of_index;
    std::vector<std::vector<cplx>> projectors;

    std::size_t size() const { return eigenvalues.size(); }
};

class HermitianOperator {
public:
    HermitianOperator() = default;

    int n_qubits() const { return data_->n_qubits; }
    std::size_t dim() const { return data_->diagonal ? data_->diag.size()
                                                    : data_->dim; }
    bool is_diagonal() const { return data_->diagonal; }
    const std::vector<double>& diag() const { return data_->diag; }
    const std::vector<cplx>& dense() const { return data_->dense; }
    const Spectrum& spectrum() const;

    friend HermitianOperator diagonal_operator(int, std::vector<double>);
    friend HermitianOperator dense_operator(int, std::vector<cplx>);

private:
    struct Data {
        int n_qubits = 0;
        bool diagonal = true;
        std::size_t dim = 0;
        std::vector<double> diag;
        std::vector<cplx> dense;
        mutable std::once_flag spectrum_once;
        mutable std::unique_ptr<Spectrum> spectrum;
    };
    std::shared_ptr<Data> data_;
};

// Builders.
HermitianOperator diagonal_operator(int n_qubits, std::vector<double> entries);
HermitianOperator dense_operator(int n_qubits, std::vector<cplx> matrix);
HermitianOperator identity_operator(int n_qubits, double value);
HermitianOperator weighted_z(const std::vector<double>& weights);

// Sum of Pauli strings. Each string has one character per qubit, character k
// acting on qubit k: 'I', 'X', 'Y' or 'Z'. Result is diagonal when every
// string is made of I/Z only.
HermitianOperator pauli_sum(
    int n_qubits, const std::vector<std::pair<double, std::string>>& terms);
HermitianOperator xx_plus_yy();
HermitianOperator heisenberg_triple();

// alpha*a + beta*b; stays diagonal when both inputs are.
HermitianOperator linear_combination(double alpha, const HermitianOperator& a,
                                     double beta, const HermitianOperator& b);
// scale*op + shift*identity.
HermitianOperator shifted(const HermitianOperator& op, double scale,
                          double shift);

double expectation(const HermitianOperator& op, const QuantumState& psi);
double von_neumann_variance(const HermitianOperator& op, const QuantumState& psi);
double spectral_norm(const HermitianOperator& op);
std::vector<cplx> apply_operator(const HermitianOperator& op, const std::vector<cplx>& v);
std::vector<cplx> dense_matrix_of(const HermitianOperator& op);

// Occupations a_j = <psi|Pi_j|psi> for each distinct eigenvalue.
std::vector<double> occupations(const Spectrum& spec, const QuantumState& psi);

// New operator with the same eigenspaces and eigenvalues f(lambda).
HermitianOperator spectral_map(const HermitianOperator& op,
                               const std::function<double(double)>& f);

// Statistics of U = exp(i arccos(re_u)), the canonical unitary whose
// Hermitian part is re_u; eigenvalues are clamped to [-1, 1] before arccos.
cplx u_expectation(const HermitianOperator& re_u, const QuantumState& psi);
std::vector<cplx> apply_canonical_unitary(const HermitianOperator& re_u,
                                          const std::vector<cplx>& v);

// Cyclic complex Jacobi diagonalization of a Hermitian matrix (row-major).
// Returns ascending eigenvalues and the matching eigenvectors as columns.
std::pair<std::vector<double>, std::vector<cplx>> eigen_hermitian(
    std::size_t dim, const std::vector<cplx>& matrix);

}  // namespace shotbudget
