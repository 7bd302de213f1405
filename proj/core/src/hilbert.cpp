#include "qtraj/hilbert.hpp"

#include <cmath>

namespace qtraj {

QuantumState::QuantumState(Vector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 2)
        throw ModelError("QuantumState: dim must be >= 2, got " +
                         std::to_string(amps_.size()));
    const double n = amps_.norm();
    if (!std::isfinite(n) || n < 1e-14)
        throw ModelError("QuantumState: amplitudes have zero or non-finite norm");
    amps_ /= n;
}

HermitianOperator::HermitianOperator(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        throw ModelError("HermitianOperator: matrix must be square");
    const double dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12)
        throw ModelError("HermitianOperator: not Hermitian, max deviation " +
                         std::to_string(dev));
    // Symmetrize so downstream eigen-solvers see an exactly Hermitian matrix.
    m_ = ((m_ + m_.adjoint()) / 2.0).eval();
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
    return HermitianOperator(Matrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::diagonal(const Eigen::VectorXd& diag) {
    Matrix m = Matrix::Zero(diag.size(), diag.size());
    for (Eigen::Index i = 0; i < diag.size(); ++i) m(i, i) = diag(i);
    return HermitianOperator(std::move(m));
}

DensityMatrix::DensityMatrix(Matrix entries, double herm_tol, double trace_tol,
                             double pos_tol)
    : m_(std::move(entries)) {
    if (m_.rows() != m_.cols())
        throw ModelError("DensityMatrix: matrix must be square");
    const double herm_dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > herm_tol)
        throw ModelError("DensityMatrix: Hermiticity violated by " +
                         std::to_string(herm_dev));
    m_ = ((m_ + m_.adjoint()) / 2.0).eval();
    const double tr_dev = std::abs(m_.trace().real() - 1.0) +
                          std::abs(m_.trace().imag());
    if (tr_dev > trace_tol)
        throw ModelError("DensityMatrix: trace deviates from 1 by " +
                         std::to_string(tr_dev));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -pos_tol)
        throw ModelError("DensityMatrix: negative eigenvalue " +
                         std::to_string(min_eig));
}

DensityMatrix DensityMatrix::pure(const QuantumState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / double(dim));
}

double expectation(const QuantumState& psi, const HermitianOperator& op) {
    if (psi.dim() != op.dim())
        throw ModelError("expectation: state dim " + std::to_string(psi.dim()) +
                         " vs operator dim " + std::to_string(op.dim()));
    const Complex v = psi.amplitudes().dot(op.matrix() * psi.amplitudes());
    if (std::abs(v.imag()) > 1e-9)
        throw ModelError("expectation: quadratic form has imaginary part " +
                         std::to_string(v.imag()));
    return v.real();
}

double variance(const QuantumState& psi, const HermitianOperator& op) {
    if (psi.dim() != op.dim())
        throw ModelError("variance: dimension mismatch");
    const Vector lpsi = op.matrix() * psi.amplitudes();
    const double mean = psi.amplitudes().dot(lpsi).real();
    const double second = lpsi.squaredNorm();
    const double var = second - mean * mean;
    if (var < -1e-10)
        throw ModelError("variance: negative beyond tolerance: " +
                         std::to_string(var));
    return var < 0.0 ? 0.0 : var;
}

double trace_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ModelError("trace_distance: dimension mismatch");
    Matrix d = a - b;
    d = ((d + d.adjoint()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return trace_distance(a.matrix(), b.matrix());
}

DensityMatrix mix(const std::vector<QuantumState>& states,
                  const std::vector<double>& weights) {
    if (states.empty() || states.size() != weights.size())
        throw ModelError("mix: states/weights size mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ModelError("mix: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ModelError("mix: weights sum to " + std::to_string(sum));
    const Eigen::Index dim = states.front().dim();
    Matrix rho = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].dim() != dim) throw ModelError("mix: dimension mismatch");
        rho += weights[i] * states[i].amplitudes() *
               states[i].amplitudes().adjoint();
    }
    return DensityMatrix(std::move(rho));
}

Eigen::MatrixXd dephasing_rates(const HermitianOperator& op, double coupling) {
    if (coupling < 0.0) throw ModelError("dephasing_rates: coupling < 0");
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd l = es.eigenvalues();
    Eigen::MatrixXd rates(l.size(), l.size());
    for (Eigen::Index i = 0; i < l.size(); ++i)
        for (Eigen::Index j = 0; j < l.size(); ++j) {
            const double d = l(i) - l(j);
            rates(i, j) = 0.5 * coupling * d * d;
        }
    return rates;
}

} // namespace qtraj
