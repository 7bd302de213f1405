#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qtraj/lattice.hpp"
#include "qtraj/me.hpp"
#include "qtraj/stats.hpp"

using namespace qtraj;
using namespace qtraj::testing;

namespace {

LatticeConfig one_particle(int n_sites, double sigma, double coupling,
                           double mass = 1.0) {
    LatticeConfig c;
    c.n_sites = n_sites;
    c.particle_masses = {mass};
    c.smearing_sigma = sigma;
    c.gamma_over_m0sq = coupling;
    return c;
}

} // namespace

TEST_CASE("config validation catches every limit") {
    CHECK_THROWS_AS(one_particle(1, 0.5, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(one_particle(17, 0.5, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(one_particle(8, 0.0, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(one_particle(8, 4.0, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(one_particle(8, 0.5, -1.0).validate(), ConfigError);
    CHECK_THROWS_AS(one_particle(8, 0.5, 1.0, -2.0).validate(), ConfigError);

    LatticeConfig big = one_particle(16, 0.5, 1.0);
    big.particle_masses = {1.0, 1.0, 1.0}; // 16^3 > 256
    CHECK_THROWS_AS(big.validate(), ConfigError);

    CHECK_NOTHROW(one_particle(12, 1.0, 0.5).validate());
}

TEST_CASE("periodic distance and kernel basics") {
    CHECK(periodic_distance(0, 11, 12) == 1);
    CHECK(periodic_distance(0, 6, 12) == 6);
    CHECK(periodic_distance(3, 3, 12) == 0);
    CHECK(gaussian_kernel(0.0, 1.0) == 1.0);
    CHECK(gaussian_kernel(2.0, 1.0) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("basis indexing round-trips for two particles") {
    LatticeConfig c = one_particle(5, 0.5, 1.0);
    c.particle_masses = {1.0, 2.0};
    for (int s0 = 0; s0 < 5; ++s0)
        for (int s1 = 0; s1 < 5; ++s1) {
            const Eigen::Index i = basis_index(c, {s0, s1});
            CHECK(basis_site(c, i, 0) == s0);
            CHECK(basis_site(c, i, 1) == s1);
        }
}

TEST_CASE("narrow kernel collapses the density operators to projectors") {
    auto family = build_mass_density_ops(one_particle(8, 0.05, 1.0));
    for (int c = 0; c < 8; ++c)
        for (Eigen::Index i = 0; i < 8; ++i) {
            const double expected = (i == c) ? 1.0 : 0.0;
            CHECK(std::abs(family.diagonals[c](i) - expected) < 1e-10);
        }
}

TEST_CASE("mass density is linear in the particle mass") {
    auto f1 = build_mass_density_ops(one_particle(8, 0.9, 1.0, 1.0));
    auto f3 = build_mass_density_ops(one_particle(8, 0.9, 1.0, 3.0));
    for (int c = 0; c < 8; ++c)
        CHECK((f3.diagonals[c] - 3.0 * f1.diagonals[c]).cwiseAbs().maxCoeff() <
              1e-12);
}

TEST_CASE("two pinned particles add their smeared masses") {
    LatticeConfig c = one_particle(8, 0.7, 1.0);
    c.particle_masses = {1.0, 2.0};
    auto family = build_mass_density_ops(c);
    const Eigen::Index pinned = basis_index(c, {0, 0});
    // <F_0> on |site 0, site 0> = (m1 + m2) * G(0) = 3
    CHECK(family.diagonals[0](pinned) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("the density family sums to a multiple of the identity") {
    LatticeConfig c = one_particle(9, 1.3, 1.0);
    c.particle_masses = {1.0, 2.5};
    auto family = build_mass_density_ops(c);
    Eigen::VectorXd total = Eigen::VectorXd::Zero(c.dim());
    for (const auto& d : family.diagonals) total += d;
    CHECK((total.array() - total(0)).abs().maxCoeff() < 1e-10);

    double kernel_sum = 0.0;
    for (int s = 0; s < 9; ++s)
        kernel_sum += gaussian_kernel(periodic_distance(0, s, 9), 1.3);
    CHECK(total(0) == doctest::Approx(3.5 * kernel_sum).epsilon(1e-12));
}

TEST_CASE("decoherence rate: diagonal zero, matches brute-force kernel sum") {
    LatticeConfig c = one_particle(12, 0.8, 0.4);
    auto family = build_mass_density_ops(c);
    CHECK(csl_decoherence_rate(c, 3, 3) == 0.0);

    for (Eigen::Index i : {0L, 2L})
        for (Eigen::Index j : {5L, 9L}) {
            double direct = 0.0;
            for (int cell = 0; cell < 12; ++cell) {
                const double fi =
                    gaussian_kernel(periodic_distance(cell, int(i), 12), 0.8);
                const double fj =
                    gaussian_kernel(periodic_distance(cell, int(j), 12), 0.8);
                direct += 0.5 * 0.4 * (fi - fj) * (fi - fj);
            }
            CHECK(csl_decoherence_rate(c, family, i, j) ==
                  doctest::Approx(direct).epsilon(1e-12));
        }
}

TEST_CASE("rate saturates for separations far beyond the smearing width") {
    LatticeConfig c = one_particle(12, 0.8, 1.0);
    const double r5 = csl_decoherence_rate(c, 0, 5);
    const double r6 = csl_decoherence_rate(c, 0, 6);
    CHECK(std::abs(r5 - r6) / r6 < 1e-3);
    // and vanishes continuously as the separation shrinks
    CHECK(csl_decoherence_rate(c, 0, 1) < r6);
    CHECK(csl_decoherence_rate(c, 0, 1) > 0.0);
}

TEST_CASE("mass-squared amplification of the analytic rate") {
    const double r1 = csl_decoherence_rate(one_particle(12, 0.8, 1.0, 1.0), 0, 6);
    const double r2 = csl_decoherence_rate(one_particle(12, 0.8, 1.0, 2.0), 0, 6);
    CHECK(r2 / r1 > 3.99);
    CHECK(r2 / r1 < 4.01);
}

TEST_CASE("integrated ME decay matches the analytic rate within 0.5%") {
    LatticeConfig c = one_particle(12, 1.0, 0.3);
    MonitoringModel model = make_csl_model(c);
    Vector v = Vector::Zero(12);
    v(0) = v(6) = 1.0;
    auto sol = run_me(model, DensityMatrix::pure(QuantumState(v)), 1e-3, 2000,
                      100);

    std::vector<double> mags(sol.times.size());
    for (std::size_t s = 0; s < sol.times.size(); ++s)
        mags[s] = std::abs(sol.states[s](0, 6));
    const double fitted = fit_exponential_decay_rate(sol.times, mags);
    const double analytic = csl_decoherence_rate(c, 0, 6);
    CHECK(std::abs(fitted - analytic) / analytic < 0.005);
}

TEST_CASE("make_csl_model wires one channel per cell at the lattice coupling") {
    LatticeConfig c = one_particle(6, 0.7, 0.25);
    MonitoringModel model = make_csl_model(c);
    REQUIRE(model.channels().size() == 6);
    for (const auto& ch : model.channels()) CHECK(ch.coupling == 0.25);
    CHECK(model.dim() == 6);
    CHECK(model.hamiltonian().matrix().cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(make_csl_model(c, HermitianOperator::zero(5)),
                    ConfigError);
}
