#ifndef QTRAJ_MODEL_HPP
#define QTRAJ_MODEL_HPP

#include <optional>
#include <vector>

#include "qtraj/hilbert.hpp"

namespace qtraj {

/// One monitored Hermitian channel with its dimensionless coupling
/// (all physical rate constants collapsed into one dimensionless number).
struct Channel {
    HermitianOperator op;
    double coupling = 0.0;
};

enum class FeedbackMode {
    Signal,    // feed back the measured signal increment (legitimate)
    MeanField, // feed back the trajectory's own expectation (illegitimate)
};

// How the feedback map is composed with the diffusive update. PostMeasurement
// is the physical measurement-acts-first ordering; InDrift folds the feedback
// Hamiltonian directly into the Euler drift and is kept as a diagnostic foil
// that fails the closed-ME oracle.
enum class FeedbackOrdering {
    PostMeasurement,
    PreMeasurement,
    InDrift,
};

struct FeedbackSpec {
    FeedbackMode mode = FeedbackMode::Signal;
    double gain = 0.0;
    std::vector<std::size_t> channels; // indices into MonitoringModel::channels
    FeedbackOrdering ordering = FeedbackOrdering::PostMeasurement;
};

/// One complete simulation definition: Hamiltonian, monitored channels,
/// optional feedback. Immutable after construction; shared read-only across
/// trajectory workers.
class MonitoringModel {
  public:
    MonitoringModel(HermitianOperator hamiltonian, std::vector<Channel> channels,
                    std::optional<FeedbackSpec> feedback = std::nullopt);

    const HermitianOperator& hamiltonian() const { return hamiltonian_; }
    const std::vector<Channel>& channels() const { return channels_; }
    const std::optional<FeedbackSpec>& feedback() const { return feedback_; }
    Eigen::Index dim() const { return hamiltonian_.dim(); }

  private:
    HermitianOperator hamiltonian_;
    std::vector<Channel> channels_;
    std::optional<FeedbackSpec> feedback_;
};

} // namespace qtraj

#endif
