#include "qtraj/grw.hpp"

#include <cmath>

namespace qtraj {

namespace {
constexpr Complex kImag{0.0, 1.0};
}

void JumpModel::validate() const {
    lattice.validate();
    if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate))
        throw ConfigError("JumpModel: jump_rate must be finite and >= 0");
    if (!(localization_width > 0.0) || !std::isfinite(localization_width))
        throw ConfigError("JumpModel: localization_width must be > 0");
    if (hamiltonian.dim() != lattice.dim())
        throw ConfigError("JumpModel: Hamiltonian dim mismatch");
}

LocalizationFamily build_localization_family(const JumpModel& model) {
    model.validate();
    const int n = model.lattice.n_sites;
    const int particles = model.lattice.particles();
    const Eigen::Index d = model.lattice.dim();

    // Translation invariance makes sum_z g(d(z,s))^2 the same constant for
    // every s, so normalizing by it gives sum_z G_z^2 = identity exactly.
    double norm_sq = 0.0;
    for (int z = 0; z < n; ++z) {
        const double g = gaussian_kernel(periodic_distance(z, 0, n),
                                         model.localization_width);
        norm_sq += g * g;
    }
    const double norm = std::sqrt(norm_sq);

    LocalizationFamily family;
    family.site_profile.reserve(n);
    for (int z = 0; z < n; ++z) {
        Eigen::VectorXd profile(n);
        for (int s = 0; s < n; ++s)
            profile(s) = gaussian_kernel(periodic_distance(z, s, n),
                                         model.localization_width) /
                         norm;
        family.site_profile.push_back(std::move(profile));
    }

    family.kernel = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (int p = 0; p < particles; ++p) {
                const int si = basis_site(model.lattice, i, p);
                const int sj = basis_site(model.lattice, j, p);
                double k = 0.0;
                for (int z = 0; z < n; ++z)
                    k += family.site_profile[z](si) * family.site_profile[z](sj);
                family.kernel(i, j) += k;
            }
    return family;
}

namespace {

// Shared inner step used by both the pure grw_step and the trajectory loop.
std::optional<FlashEvent> jump_step_inplace(Vector& psi, const JumpModel& model,
                                            const LocalizationFamily& family,
                                            double dt, double time,
                                            CounterRng& rng) {
    const int particles = model.lattice.particles();
    const double p_jump = model.jump_rate * particles * dt;
    if (p_jump >= 0.1)
        throw ModelError("grw_step: dt*rate*particles must be < 0.1, got " +
                         std::to_string(p_jump));

    if (rng.next_uniform() < p_jump) {
        const int particle =
            std::min(particles - 1, int(rng.next_uniform() * particles));
        // Born weights over flash centres; they sum to 1 exactly because
        // sum_z G_z^2 = identity.
        const int n = model.lattice.n_sites;
        const double u = rng.next_uniform();
        double cum = 0.0;
        int centre = n - 1;
        for (int z = 0; z < n; ++z) {
            double w = 0.0;
            for (Eigen::Index i = 0; i < psi.size(); ++i) {
                const double g =
                    family.site_profile[z](basis_site(model.lattice, i, particle));
                w += std::norm(psi(i)) * g * g;
            }
            cum += w;
            if (u < cum) {
                centre = z;
                break;
            }
        }
        for (Eigen::Index i = 0; i < psi.size(); ++i)
            psi(i) *= family.site_profile[centre](
                basis_site(model.lattice, i, particle));
        const double nrm = psi.norm();
        if (!(nrm > 0.0))
            throw Error("grw_step: post-jump state has zero norm");
        psi /= nrm;
        return FlashEvent{time, particle, centre};
    }

    // No jump: unitary Euler step.
    psi -= (kImag * dt) * (model.hamiltonian.matrix() * psi);
    psi.normalize();
    return std::nullopt;
}

} // namespace

std::pair<QuantumState, std::optional<FlashEvent>>
grw_step(const QuantumState& state, const JumpModel& model, double dt,
         double time, CounterRng& rng) {
    if (state.dim() != model.lattice.dim())
        throw ModelError("grw_step: state/model dimension mismatch");
    const LocalizationFamily family = build_localization_family(model);
    Vector psi = state.amplitudes();
    auto flash = jump_step_inplace(psi, model, family, dt, time, rng);
    return {QuantumState(std::move(psi)), flash};
}

Matrix grw_me_derivative(const Matrix& rho, const JumpModel& model) {
    if (rho.rows() != model.lattice.dim())
        throw ModelError("grw_me_derivative: dimension mismatch");
    const LocalizationFamily family = build_localization_family(model);
    const Matrix& h = model.hamiltonian.matrix();
    Matrix out = -kImag * (h * rho - rho * h);
    out += model.jump_rate *
           (family.kernel.cast<Complex>().cwiseProduct(rho) -
            double(model.lattice.particles()) * rho);
    return out;
}

MESolution run_grw_me(const JumpModel& model, const DensityMatrix& rho0,
                      double dt, long steps, long sample_stride) {
    if (rho0.dim() != model.lattice.dim())
        throw ModelError("run_grw_me: state/model dimension mismatch");
    const LocalizationFamily family = build_localization_family(model);
    const Matrix& h = model.hamiltonian.matrix();
    const double particles = model.lattice.particles();
    auto deriv = [&](const Matrix& rho) {
        Matrix out = -kImag * (h * rho - rho * h);
        out += model.jump_rate *
               (family.kernel.cast<Complex>().cwiseProduct(rho) -
                particles * rho);
        return out;
    };
    return rk4_evolve(deriv, rho0.matrix(), dt, steps, sample_stride);
}

TrajectoryResult run_jump_trajectory(const JumpModel& model,
                                     const QuantumState& initial,
                                     const TrajectoryOptions& opts,
                                     std::uint64_t seed,
                                     std::uint64_t trajectory_index) {
    if (opts.steps < 1)
        throw ModelError("run_jump_trajectory: steps must be >= 1");
    if (initial.dim() != model.lattice.dim())
        throw ModelError("run_jump_trajectory: state/model dimension mismatch");
    const LocalizationFamily family = build_localization_family(model);

    Vector psi = initial.amplitudes();
    CounterRng rng(seed, trajectory_index, 0);

    TrajectoryResult res;
    auto sample = [&](double t) {
        res.times.push_back(t);
        if (opts.keep_snapshots) res.snapshots.push_back(psi);
    };
    sample(0.0);
    for (long n = 0; n < opts.steps; ++n) {
        const double t = double(n) * opts.dt;
        auto flash = jump_step_inplace(psi, model, family, opts.dt, t, rng);
        if (flash) res.flashes.push_back(*flash);
        if ((n + 1) % opts.sample_stride == 0 || n + 1 == opts.steps)
            sample(double(n + 1) * opts.dt);
    }
    res.final_state = psi;
    return res;
}

} // namespace qtraj
