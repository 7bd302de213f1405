#ifndef QTRAJ_GRW_HPP
#define QTRAJ_GRW_HPP

#include <cstdint>
#include <optional>
#include <utility>

#include "qtraj/lattice.hpp"
#include "qtraj/me.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

/// GRW-style jump unravelling on the lattice: Poisson-fired Gaussian
/// localizations of individual particles, each leaving a flash.
struct JumpModel {
    HermitianOperator hamiltonian;
    double jump_rate = 1.0;         // per particle, 1/time
    double localization_width = 1.0; // lattice units
    LatticeConfig lattice;

    void validate() const;
};

/// Discrete localization operators G_{p,z} (Gaussian of the given width
/// centred at z, acting on particle p), normalized so sum_z G_{p,z}^2 = 1.
struct LocalizationFamily {
    std::vector<Eigen::VectorXd> site_profile; // g_z(s) per centre z
    // kernel(i,j) = sum_p sum_z g_z(site_p(i)) g_z(site_p(j))
    Eigen::MatrixXd kernel;
};

LocalizationFamily build_localization_family(const JumpModel& model);

/// One first-order split step: jump decision, then unitary Euler step.
/// Returns the flash when a jump fired. Requires dt*rate*particles < 0.1.
std::pair<QuantumState, std::optional<FlashEvent>>
grw_step(const QuantumState& state, const JumpModel& model, double dt,
         double time, CounterRng& rng);

/// Ensemble generator of the jump unravelling:
///   -i[H, rho] + rate * sum_p (sum_z G_{p,z} rho G_{p,z} - rho).
Matrix grw_me_derivative(const Matrix& rho, const JumpModel& model);

/// RK4 integration of the jump master equation.
MESolution run_grw_me(const JumpModel& model, const DensityMatrix& rho0,
                      double dt, long steps, long sample_stride = 1);

/// One jump trajectory with its flash log (snapshots at the sample stride).
TrajectoryResult run_jump_trajectory(const JumpModel& model,
                                     const QuantumState& initial,
                                     const TrajectoryOptions& opts,
                                     std::uint64_t seed,
                                     std::uint64_t trajectory_index);

} // namespace qtraj

#endif
