#include "qtraj/feedback.hpp"

#include <cmath>

namespace qtraj {

namespace {

constexpr Complex kImag{0.0, 1.0};

QuantumState apply_unitary(const QuantumState& state,
                           const MonitoringModel& model,
                           std::span<const double> amounts) {
    const auto& fb = model.feedback();
    if (!fb) throw ModelError("feedback: model carries no FeedbackSpec");
    Matrix f = Matrix::Zero(state.dim(), state.dim());
    for (std::size_t j = 0; j < fb->channels.size(); ++j)
        f += amounts[j] * model.channels()[fb->channels[j]].op.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(f);
    Vector rotated = es.eigenvectors().adjoint() * state.amplitudes();
    for (Eigen::Index i = 0; i < rotated.size(); ++i)
        rotated(i) *= std::exp(-kImag * (fb->gain * es.eigenvalues()(i)));
    return QuantumState(es.eigenvectors() * rotated);
}

} // namespace

QuantumState apply_signal_feedback(const QuantumState& state_post_measurement,
                                   const MonitoringModel& model, double dt,
                                   std::span<const double> dW,
                                   std::span<const double> pre_expectations) {
    const auto& fb = model.feedback();
    if (!fb || fb->mode != FeedbackMode::Signal)
        throw ModelError("apply_signal_feedback: model is not in signal mode");
    std::vector<double> amounts(fb->channels.size());
    for (std::size_t j = 0; j < fb->channels.size(); ++j) {
        const std::size_t k = fb->channels[j];
        const double lam = model.channels()[k].coupling;
        if (lam <= 0.0)
            throw ModelError("apply_signal_feedback: channel " +
                             std::to_string(k) + " is unmonitored");
        amounts[j] = pre_expectations[k] * dt + dW[k] / (2.0 * std::sqrt(lam));
    }
    return apply_unitary(state_post_measurement, model, amounts);
}

QuantumState
apply_meanfield_feedback(const QuantumState& state_post_measurement,
                         const MonitoringModel& model, double dt) {
    const auto& fb = model.feedback();
    if (!fb || fb->mode != FeedbackMode::MeanField)
        throw ModelError(
            "apply_meanfield_feedback: model is not in mean-field mode");
    std::vector<double> amounts(fb->channels.size());
    for (std::size_t j = 0; j < fb->channels.size(); ++j) {
        const auto& op = model.channels()[fb->channels[j]].op;
        amounts[j] = expectation(state_post_measurement, op) * dt;
    }
    return apply_unitary(state_post_measurement, model, amounts);
}

MonitoringModel modified_me_params(const MonitoringModel& model, double gain) {
    const auto& fb = model.feedback();
    if (!fb || fb->mode != FeedbackMode::Signal)
        throw ModelError("modified_me_params: model is not in signal mode");

    Matrix h = model.hamiltonian().matrix();
    std::vector<Channel> channels = model.channels();
    for (std::size_t k : fb->channels) {
        const Matrix& l = channels[k].op.matrix();
        h += (0.5 * gain) * (l * l);
        if (channels[k].coupling == 0.0) {
            if (gain != 0.0)
                throw ModelError("modified_me_params: feedback of an "
                                 "unmonitored channel (coupling 0) diverges");
        } else {
            channels[k].coupling += gain * gain / (4.0 * channels[k].coupling);
        }
    }
    return MonitoringModel(HermitianOperator(std::move(h)),
                           std::move(channels));
}

} // namespace qtraj
