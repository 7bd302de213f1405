#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "qtraj/me.hpp"

using namespace qtraj;
using namespace qtraj::testing;

TEST_CASE("maximally mixed state is a fixed point of pure dephasing") {
    MonitoringModel model = qubit_model(1.0, false);
    const Matrix rho = DensityMatrix::maximally_mixed(2).matrix();
    CHECK(me_derivative(rho, model).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dephasing derivative of the coherence matrix element") {
    MonitoringModel model = qubit_model(1.0, false);
    const Matrix rho = DensityMatrix::pure(ket_plus()).matrix(); // rho01 = 1/2
    const Matrix d = me_derivative(rho, model);
    CHECK(d(0, 1).real() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(d(0, 0)) < 1e-14);
}

TEST_CASE("zero coupling leaves the pure von Neumann term") {
    std::mt19937_64 rng(41);
    auto h = random_hermitian(rng, 3);
    MonitoringModel model(h, {{random_hermitian(rng, 3), 0.0}});
    const Matrix rho = random_density(rng, 3).matrix();
    const Matrix d = me_derivative(rho, model);
    const Complex i{0.0, 1.0};
    const Matrix expected = -i * (h.matrix() * rho - rho * h.matrix());
    CHECK((d - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(d.trace()) < 1e-12);
    CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("me_derivative rejects dimension mismatch") {
    MonitoringModel model = qubit_model(1.0, false);
    CHECK_THROWS_AS(me_derivative(Matrix::Identity(3, 3) / 3.0, model),
                    ModelError);
}

TEST_CASE("trivial generator keeps the state constant") {
    MonitoringModel model(HermitianOperator::zero(2), {{sigma_z(), 0.0}});
    const DensityMatrix rho0 = DensityMatrix::pure(ket_plus());
    auto sol = run_me(model, rho0, 1e-3, 100, 10);
    for (const auto& rho : sol.states)
        CHECK((rho - rho0.matrix()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("qubit coherence decays at the closed-form rate") {
    MonitoringModel model = qubit_model(1.0, false);
    auto sol =
        run_me(model, DensityMatrix::pure(ket_plus()), 1e-4, 10000, 10000);
    REQUIRE(sol.times.back() == doctest::Approx(1.0));
    CHECK(sol.states.back()(0, 1).real() ==
          doctest::Approx(0.0676676).epsilon(1e-5));
    CHECK(std::abs(sol.states.back()(0, 1).real() - 0.5 * std::exp(-2.0)) <
          1e-6);
}

TEST_CASE("run_me rejects nonpositive step counts") {
    MonitoringModel model = qubit_model(1.0, false);
    CHECK_THROWS_AS(run_me(model, DensityMatrix::maximally_mixed(2), 1e-3, 0),
                    ModelError);
}

TEST_CASE("the master equation is linear in the initial state") {
    std::mt19937_64 rng(47);
    auto h = random_hermitian(rng, 3);
    auto l = random_hermitian(rng, 3);
    MonitoringModel model(h, {{l, 0.8}});
    const Matrix a = random_density(rng, 3).matrix();
    const Matrix b = random_density(rng, 3).matrix();
    const double alpha = 0.3;
    const DensityMatrix mixed(alpha * a + (1.0 - alpha) * b);

    auto sol_a = run_me(model, DensityMatrix(a), 1e-3, 200, 50);
    auto sol_b = run_me(model, DensityMatrix(b), 1e-3, 200, 50);
    auto sol_m = run_me(model, mixed, 1e-3, 200, 50);
    for (std::size_t s = 0; s < sol_m.states.size(); ++s) {
        const Matrix combo =
            alpha * sol_a.states[s] + (1.0 - alpha) * sol_b.states[s];
        CHECK((sol_m.states[s] - combo).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("integration reproduces the eigenbasis dephasing solution") {
    std::mt19937_64 rng(53);
    const double lam = 0.7, t_final = 5.0;
    auto l = random_hermitian(rng, 4);
    MonitoringModel model(HermitianOperator::zero(4), {{l, lam}});
    const Matrix rho0 = random_density(rng, 4).matrix();

    auto sol = run_me(model, DensityMatrix(rho0), 1e-3, 5000, 5000);
    Eigen::SelfAdjointEigenSolver<Matrix> es(l.matrix());
    const Eigen::MatrixXd rates = dephasing_rates(l, lam);
    const Matrix tilde0 =
        es.eigenvectors().adjoint() * rho0 * es.eigenvectors();
    const Matrix tilde_t = es.eigenvectors().adjoint() * sol.states.back() *
                           es.eigenvectors();
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) {
            const Complex expected =
                tilde0(i, j) * std::exp(-rates(i, j) * t_final);
            CHECK(std::abs(tilde_t(i, j) - expected) < 1e-6);
        }
}

TEST_CASE("a grossly oversized step is rejected, not silently integrated") {
    MonitoringModel model = qubit_model(1.0, false);
    CHECK_THROWS_AS(run_me(model, DensityMatrix::pure(ket_plus()), 5.0, 4, 1),
                    IntegrationError);
}

TEST_CASE("states stay physical along the integration") {
    MonitoringModel model = qubit_model(1.0, true);
    auto sol = run_me(model, DensityMatrix::pure(ket0()), 1e-4, 20000, 2000);
    for (const auto& rho : sol.states) {
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-9);
        CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
        CHECK(es.eigenvalues().minCoeff() > -1e-6);
    }
}
