#include "qtraj/me.hpp"

#include <cmath>

namespace qtraj {

namespace {
constexpr Complex kImag{0.0, 1.0};
}

Matrix me_derivative(const Matrix& rho, const MonitoringModel& model) {
    if (rho.rows() != model.dim() || rho.cols() != model.dim())
        throw ModelError("me_derivative: dimension mismatch");
    const Matrix& h = model.hamiltonian().matrix();
    Matrix out = -kImag * (h * rho - rho * h);
    for (const auto& ch : model.channels()) {
        if (ch.coupling == 0.0) continue;
        const Matrix& l = ch.op.matrix();
        const Matrix comm = l * rho - rho * l;
        out -= (0.5 * ch.coupling) * (l * comm - comm * l);
    }
    return out;
}

MESolution rk4_evolve(const std::function<Matrix(const Matrix&)>& derivative,
                      const Matrix& rho0, double dt, long steps,
                      long sample_stride) {
    if (!(dt > 0.0)) throw ModelError("rk4_evolve: dt must be > 0");
    if (steps < 1) throw ModelError("rk4_evolve: steps must be >= 1");
    if (sample_stride < 1) throw ModelError("rk4_evolve: stride must be >= 1");

    Matrix rho = rho0;
    MESolution sol;

    auto check_and_sample = [&](double t) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(
            ((rho + rho.adjoint()) / 2.0).eval(), Eigen::EigenvaluesOnly);
        const double min_eig = es.eigenvalues().minCoeff();
        if (min_eig < -1e-6)
            throw IntegrationError(
                "rk4_evolve: positivity violated (min eigenvalue " +
                std::to_string(min_eig) + " at t = " + std::to_string(t) +
                "); dt is likely too large");
        sol.times.push_back(t);
        sol.states.push_back(rho);
    };

    check_and_sample(0.0);
    for (long n = 0; n < steps; ++n) {
        const Matrix k1 = derivative(rho);
        const Matrix k2 = derivative(rho + (0.5 * dt) * k1);
        const Matrix k3 = derivative(rho + (0.5 * dt) * k2);
        const Matrix k4 = derivative(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double tr = rho.trace().real();
        if (!std::isfinite(tr) || std::abs(tr - 1.0) > 1e-9)
            throw IntegrationError("rk4_evolve: trace drift " +
                                   std::to_string(tr - 1.0) + " at step " +
                                   std::to_string(n));
        rho /= tr;

        if ((n + 1) % sample_stride == 0 || n + 1 == steps)
            check_and_sample(double(n + 1) * dt);
    }
    return sol;
}

MESolution run_me(const MonitoringModel& model, const DensityMatrix& rho0,
                  double dt, long steps, long sample_stride) {
    if (rho0.dim() != model.dim())
        throw ModelError("run_me: state/model dimension mismatch");
    return rk4_evolve([&](const Matrix& r) { return me_derivative(r, model); },
                      rho0.matrix(), dt, steps, sample_stride);
}

} // namespace qtraj
