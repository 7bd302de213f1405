#include "qtraj/lattice.hpp"

#include <cmath>
#include <cstdlib>

namespace qtraj {

Eigen::Index LatticeConfig::dim() const {
    Eigen::Index d = 1;
    for (int p = 0; p < particles(); ++p) d *= n_sites;
    return d;
}

void LatticeConfig::validate() const {
    if (n_sites < 2 || n_sites > 16)
        throw ConfigError("lattice: n_sites must be in [2, 16]");
    if (particle_masses.empty())
        throw ConfigError("lattice: at least one particle required");
    for (double m : particle_masses)
        if (!(m > 0.0) || !std::isfinite(m))
            throw ConfigError("lattice: particle masses must be > 0");
    if (dim() > 256)
        throw ConfigError("lattice: Hilbert dimension " +
                          std::to_string(dim()) + " exceeds 256");
    if (!(smearing_sigma > 0.0))
        throw ConfigError("lattice: smearing_sigma must be > 0");
    if (!(smearing_sigma < n_sites / 2.0))
        throw ConfigError("lattice: smearing_sigma must be < n_sites/2");
    if (!(gamma_over_m0sq >= 0.0))
        throw ConfigError("lattice: coupling must be >= 0");
}

int periodic_distance(int a, int b, int n_sites) {
    int d = std::abs(a - b) % n_sites;
    return std::min(d, n_sites - d);
}

double gaussian_kernel(double d, double sigma) {
    return std::exp(-d * d / (2.0 * sigma * sigma));
}

int basis_site(const LatticeConfig& config, Eigen::Index i, int particle) {
    for (int p = 0; p < particle; ++p) i /= config.n_sites;
    return int(i % config.n_sites);
}

Eigen::Index basis_index(const LatticeConfig& config,
                         const std::vector<int>& sites) {
    Eigen::Index i = 0;
    for (int p = config.particles() - 1; p >= 0; --p)
        i = i * config.n_sites + sites[p];
    return i;
}

MassDensityFamily build_mass_density_ops(const LatticeConfig& config) {
    config.validate();
    const Eigen::Index d = config.dim();
    MassDensityFamily family;
    family.ops.reserve(config.n_sites);
    family.diagonals.reserve(config.n_sites);
    for (int c = 0; c < config.n_sites; ++c) {
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (int p = 0; p < config.particles(); ++p)
                diag(i) += config.particle_masses[p] *
                           gaussian_kernel(
                               periodic_distance(c, basis_site(config, i, p),
                                                 config.n_sites),
                               config.smearing_sigma);
        family.ops.push_back(HermitianOperator::diagonal(diag));
        family.diagonals.push_back(std::move(diag));
    }
    return family;
}

double csl_decoherence_rate(const LatticeConfig& config,
                            const MassDensityFamily& family, Eigen::Index i,
                            Eigen::Index j) {
    double rate = 0.0;
    for (const auto& f : family.diagonals) {
        const double d = f(i) - f(j);
        rate += 0.5 * config.gamma_over_m0sq * d * d;
    }
    return rate;
}

double csl_decoherence_rate(const LatticeConfig& config, Eigen::Index i,
                            Eigen::Index j) {
    return csl_decoherence_rate(config, build_mass_density_ops(config), i, j);
}

MonitoringModel make_csl_model(const LatticeConfig& config,
                               std::optional<HermitianOperator> hamiltonian,
                               std::optional<FeedbackSpec> feedback) {
    MassDensityFamily family = build_mass_density_ops(config);
    std::vector<Channel> channels;
    channels.reserve(family.ops.size());
    for (auto& op : family.ops)
        channels.push_back({std::move(op), config.gamma_over_m0sq});
    HermitianOperator h = hamiltonian ? std::move(*hamiltonian)
                                      : HermitianOperator::zero(config.dim());
    if (h.dim() != config.dim())
        throw ConfigError("make_csl_model: Hamiltonian dim does not match "
                          "lattice Hilbert dimension");
    return MonitoringModel(std::move(h), std::move(channels),
                           std::move(feedback));
}

} // namespace qtraj
