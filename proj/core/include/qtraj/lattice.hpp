#ifndef QTRAJ_LATTICE_HPP
#define QTRAJ_LATTICE_HPP

#include <optional>
#include <vector>

#include "qtraj/model.hpp"

namespace qtraj {

/// One or two distinguishable particles on a periodic 1-D lattice. All
/// lengths are in lattice units; couplings are dimensionless (lambda =
/// gamma/m0^2 folded into one number per channel).
struct LatticeConfig {
    int n_sites = 0;
    std::vector<double> particle_masses; // in units of m0
    double smearing_sigma = 1.0;
    double gamma_over_m0sq = 0.0;

    int particles() const { return int(particle_masses.size()); }
    Eigen::Index dim() const; // n_sites^particles
    void validate() const;    // throws ConfigError
};

/// Minimum-image distance on the periodic lattice.
int periodic_distance(int a, int b, int n_sites);

/// Gaussian smearing kernel exp(-d^2 / (2 sigma^2)).
double gaussian_kernel(double d, double sigma);

/// Coarse-grained mass density operators, one per lattice cell:
///   F_c = sum_p m_p sum_s G_sigma(d(c, s)) P_{p,s}.
/// All diagonal in the position product basis; sum_c F_c is proportional to
/// the identity (times total mass and the kernel normalization).
struct MassDensityFamily {
    std::vector<HermitianOperator> ops;             // one per cell
    std::vector<Eigen::VectorXd> diagonals;         // eigenvalues f_c(i)
};

MassDensityFamily build_mass_density_ops(const LatticeConfig& config);

/// Site of particle p in product-basis state i (particle 0 varies fastest).
int basis_site(const LatticeConfig& config, Eigen::Index i, int particle);

/// Product-basis index for the given per-particle sites.
Eigen::Index basis_index(const LatticeConfig& config,
                         const std::vector<int>& sites);

/// Analytic off-diagonal decay rate between position basis states i and j:
///   sum_c (lambda/2) (f_c(i) - f_c(j))^2.
double csl_decoherence_rate(const LatticeConfig& config, Eigen::Index i,
                            Eigen::Index j);
double csl_decoherence_rate(const LatticeConfig& config,
                            const MassDensityFamily& family, Eigen::Index i,
                            Eigen::Index j);

/// The CSL model as an instance of the generic engines: one channel per cell,
/// coupling gamma_over_m0sq each. H defaults to zero.
MonitoringModel
make_csl_model(const LatticeConfig& config,
               std::optional<HermitianOperator> hamiltonian = std::nullopt,
               std::optional<FeedbackSpec> feedback = std::nullopt);

} // namespace qtraj

#endif
