#ifndef QTRAJ_HILBERT_HPP
#define QTRAJ_HILBERT_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qtraj/errors.hpp"

namespace qtraj {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Unit-norm pure state over a finite basis.
class QuantumState {
  public:
    // Normalizes on construction; throws ModelError for dim < 2 or zero norm.
    explicit QuantumState(Vector amplitudes);

    const Vector& amplitudes() const { return amps_; }
    Eigen::Index dim() const { return amps_.size(); }

    Complex operator[](Eigen::Index i) const { return amps_(i); }

  private:
    Vector amps_;
};

/// Dense Hermitian operator (observable, Hamiltonian, monitored channel).
class HermitianOperator {
  public:
    // Validates entries[i][j] == conj(entries[j][i]) within 1e-12.
    explicit HermitianOperator(Matrix entries);

    static HermitianOperator zero(Eigen::Index dim);
    static HermitianOperator diagonal(const Eigen::VectorXd& diag);

    const Matrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

  private:
    Matrix m_;
};

/// Density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
  public:
    // Validates Hermiticity (1e-10), trace (1e-8) and min eigenvalue (-1e-8);
    // tolerances can be widened for integrator output.
    explicit DensityMatrix(Matrix entries, double herm_tol = 1e-10,
                           double trace_tol = 1e-8, double pos_tol = 1e-8);

    static DensityMatrix pure(const QuantumState& psi);
    static DensityMatrix maximally_mixed(Eigen::Index dim);

    const Matrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

  private:
    Matrix m_;
};

/// <psi|L|psi>. Throws ModelError on dimension mismatch or if the quadratic
/// form has imaginary part above 1e-9.
double expectation(const QuantumState& psi, const HermitianOperator& op);

/// <L^2> - <L>^2, clamped to zero from below.
double variance(const QuantumState& psi, const HermitianOperator& op);

/// Half the trace norm of a - b; in [0, 1] for density matrices.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_distance(const Matrix& a, const Matrix& b);

/// Ensemble mix sum_i w_i |psi_i><psi_i|. Weights must be nonnegative and
/// sum to 1 within 1e-9.
DensityMatrix mix(const std::vector<QuantumState>& states,
                  const std::vector<double>& weights);

/// Analytic dephasing-rate matrix for a single Hermitian channel: with
/// eigenvalues l of L, R(i,j) = (coupling/2) * (l_i - l_j)^2. In the L
/// eigenbasis with H = 0 the master equation solves to
/// rho_ij(t) = rho_ij(0) * exp(-R(i,j) t).
Eigen::MatrixXd dephasing_rates(const HermitianOperator& op, double coupling);

} // namespace qtraj

#endif
