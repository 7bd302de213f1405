#ifndef QTRAJ_ME_HPP
#define QTRAJ_ME_HPP

#include <functional>
#include <vector>

#include "qtraj/model.hpp"

namespace qtraj {

struct MESolution {
    std::vector<double> times;
    std::vector<Matrix> states;
};

/// Right-hand side of the decoherence master equation
///   drho/dt = -i[H, rho] - sum_k (l_k/2) [L_k, [L_k, rho]].
/// The result is traceless and Hermiticity-preserving.
Matrix me_derivative(const Matrix& rho, const MonitoringModel& model);

/// Fixed-step RK4 on an arbitrary trace-preserving generator. Renormalizes
/// the trace each step (relative drift beyond 1e-9 per step is an error) and
/// checks positivity at sample points (eigenvalues below -1e-6 are an error).
MESolution rk4_evolve(const std::function<Matrix(const Matrix&)>& derivative,
                      const Matrix& rho0, double dt, long steps,
                      long sample_stride = 1);

/// RK4 integration of the master equation for `model` (feedback specs, if
/// any, are ignored here; see modified_me_params for the substitution route).
MESolution run_me(const MonitoringModel& model, const DensityMatrix& rho0,
                  double dt, long steps, long sample_stride = 1);

} // namespace qtraj

#endif
