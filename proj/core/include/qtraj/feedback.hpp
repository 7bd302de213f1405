#ifndef QTRAJ_FEEDBACK_HPP
#define QTRAJ_FEEDBACK_HPP

#include <span>

#include "qtraj/model.hpp"

namespace qtraj {

/// Signal feedback (legitimate): applies exp(-i g sum_k L_k s_k) with
/// s_k = <L_k>_pre dt + dW_k / (2 sqrt(l_k)), the same increment emitted by
/// the measurement step. Call strictly after the diffusive update and
/// renormalization. dW and pre_expectations are indexed by model channel.
QuantumState apply_signal_feedback(const QuantumState& state_post_measurement,
                                   const MonitoringModel& model, double dt,
                                   std::span<const double> dW,
                                   std::span<const double> pre_expectations);

/// Mean-field feedback (illegitimate): applies exp(-i g sum_k L_k <L_k> dt)
/// with the trajectory's own current expectation; no noise enters.
QuantumState
apply_meanfield_feedback(const QuantumState& state_post_measurement,
                         const MonitoringModel& model, double dt);

/// The closed-ME substitution for signal feedback: H -> H + (g/2) sum L_k^2
/// and l_k -> l_k + g^2/(4 l_k) over the feedback channels. The returned
/// model carries no feedback spec (it is absorbed). Throws ModelError when a
/// feedback channel has zero coupling and g != 0.
MonitoringModel modified_me_params(const MonitoringModel& model, double gain);

} // namespace qtraj

#endif
