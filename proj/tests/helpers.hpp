#ifndef QTRAJ_TESTS_HELPERS_HPP
#define QTRAJ_TESTS_HELPERS_HPP

#include <random>

#include "qtraj/hilbert.hpp"
#include "qtraj/model.hpp"

namespace qtraj::testing {

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index dim) {
    std::normal_distribution<double> n;
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex{n(rng), n(rng)};
    return v;
}

inline QuantumState random_state(std::mt19937_64& rng, Eigen::Index dim) {
    return QuantumState(random_vector(rng, dim));
}

inline HermitianOperator random_hermitian(std::mt19937_64& rng,
                                          Eigen::Index dim) {
    std::normal_distribution<double> n;
    Matrix a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = Complex{n(rng), n(rng)};
    Matrix h = 0.5 * (a + a.adjoint());
    return HermitianOperator(std::move(h));
}

inline DensityMatrix random_density(std::mt19937_64& rng, Eigen::Index dim,
                                    int n_states = 3) {
    std::vector<QuantumState> states;
    std::vector<double> weights;
    std::uniform_real_distribution<double> u(0.1, 1.0);
    double sum = 0.0;
    for (int i = 0; i < n_states; ++i) {
        states.push_back(random_state(rng, dim));
        weights.push_back(u(rng));
        sum += weights.back();
    }
    for (double& w : weights) w /= sum;
    return mix(states, weights);
}

// Shared qubit pieces.
inline HermitianOperator sigma_z() {
    return HermitianOperator::diagonal(Eigen::Vector2d(1.0, -1.0));
}

inline HermitianOperator sigma_x_half() {
    Matrix h(2, 2);
    h << 0.0, 0.5, 0.5, 0.0;
    return HermitianOperator(std::move(h));
}

inline QuantumState ket0() {
    Vector v(2);
    v << 1.0, 0.0;
    return QuantumState(std::move(v));
}

inline QuantumState ket1() {
    Vector v(2);
    v << 0.0, 1.0;
    return QuantumState(std::move(v));
}

inline QuantumState ket_plus() {
    Vector v(2);
    v << 1.0, 1.0;
    return QuantumState(std::move(v));
}

inline QuantumState ket_minus() {
    Vector v(2);
    v << 1.0, -1.0;
    return QuantumState(std::move(v));
}

/// The workhorse monitored qubit: L = diag(1,-1), coupling lambda,
/// Hamiltonian with off-diagonal 1/2 (or zero for pure dephasing).
inline MonitoringModel qubit_model(double lambda, bool with_hamiltonian,
                                   std::optional<FeedbackSpec> fb = {}) {
    HermitianOperator h =
        with_hamiltonian ? sigma_x_half() : HermitianOperator::zero(2);
    return MonitoringModel(std::move(h), {{sigma_z(), lambda}}, std::move(fb));
}

} // namespace qtraj::testing

#endif
