#ifndef QTRAJ_SSE_HPP
#define QTRAJ_SSE_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qtraj/model.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

/// Reusable Euler-Maruyama stepper for the normalized diffusive SSE
///
///   dpsi = -iH psi dt - sum_k (l_k/2)(L_k - <L_k>)^2 psi dt
///          + sum_k sqrt(l_k) (L_k - <L_k>) psi dW_k
///
/// followed by renormalization and, when the model carries a FeedbackSpec,
/// the feedback post-map. Holds workspace so stepping does not allocate.
class SseStepper {
  public:
    SseStepper(const MonitoringModel& model, double dt);

    /// Advances psi by one step in place. dW holds one Wiener increment per
    /// channel; signal_out (same length) receives the per-channel signal
    /// increments s_k = <L_k> dt + dW_k / (2 sqrt(l_k)). step_index is used
    /// only for error reporting.
    void step(Vector& psi, std::span<const double> dW,
              std::span<double> signal_out, long step_index);

    const MonitoringModel& model() const { return model_; }
    double dt() const { return dt_; }

    /// Pre-step expectations <L_k> of the last step() call.
    const std::vector<double>& pre_expectations() const { return pre_exp_; }

  private:
    void apply_feedback_unitary(Vector& psi, std::span<const double> amounts);

    const MonitoringModel& model_;
    double dt_;
    Vector acc_, lpsi_, l2psi_, tmp_;
    std::vector<double> pre_exp_, fb_amounts_;
    // diagonal-channel fast path (CSL mass-density families are diagonal)
    std::vector<bool> diag_channel_;
    std::vector<Eigen::VectorXd> diag_;
    bool zero_hamiltonian_ = false;
    // precomputed eigenbasis of the single feedback channel, when applicable
    bool single_fb_channel_ = false;
    Matrix fb_vecs_;
    Eigen::VectorXd fb_vals_;
};

/// One SSE step as a pure function. Returns the post state and the
/// per-channel signal increments.
std::pair<QuantumState, std::vector<double>>
sse_step(const QuantumState& state, const MonitoringModel& model, double dt,
         std::span<const double> dW);

/// Integrates one trajectory with the counter-based noise streams keyed by
/// (seed, trajectory_index, channel). Deterministic in all arguments.
TrajectoryResult run_trajectory(const MonitoringModel& model,
                                const QuantumState& initial,
                                const TrajectoryOptions& opts,
                                std::uint64_t seed,
                                std::uint64_t trajectory_index);

} // namespace qtraj

#endif
