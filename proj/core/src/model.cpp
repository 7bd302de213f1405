#include "qtraj/model.hpp"

#include <cmath>

namespace qtraj {

MonitoringModel::MonitoringModel(HermitianOperator hamiltonian,
                                 std::vector<Channel> channels,
                                 std::optional<FeedbackSpec> feedback)
    : hamiltonian_(std::move(hamiltonian)),
      channels_(std::move(channels)),
      feedback_(std::move(feedback)) {
    for (std::size_t k = 0; k < channels_.size(); ++k) {
        if (channels_[k].op.dim() != hamiltonian_.dim())
            throw ModelError("MonitoringModel: channel " + std::to_string(k) +
                             " dim mismatch");
        if (!(channels_[k].coupling >= 0.0) ||
            !std::isfinite(channels_[k].coupling))
            throw ModelError("MonitoringModel: channel " + std::to_string(k) +
                             " coupling must be finite and >= 0");
    }
    if (feedback_) {
        if (!std::isfinite(feedback_->gain))
            throw ModelError("MonitoringModel: feedback gain must be finite");
        if (feedback_->channels.empty())
            throw ModelError("MonitoringModel: feedback references no channels");
        for (std::size_t k : feedback_->channels)
            if (k >= channels_.size())
                throw ModelError("MonitoringModel: feedback channel index " +
                                 std::to_string(k) + " out of range");
    }
}

} // namespace qtraj
