#ifndef QTRAJ_TRAJECTORY_HPP
#define QTRAJ_TRAJECTORY_HPP

#include <vector>

#include "qtraj/hilbert.hpp"

namespace qtraj {

/// A GRW localization event: "something happened here, now".
struct FlashEvent {
    double time = 0.0;
    int particle = 0;
    int center = 0; // lattice site index
};

/// Classical measurement record: values[k][n] is the signal increment of
/// channel k over step n divided by dt (a regularized white-noise sample).
struct SignalRecord {
    std::vector<double> times; // end of each step
    std::vector<std::vector<double>> values;
    // mean field M(t) alongside the signal: the pre-step expectation <L_k>,
    // so values - mean_field is the regularized white noise of the record
    std::vector<std::vector<double>> mean_field;
};

struct TrajectoryOptions {
    double dt = 1e-3;
    long steps = 0;
    long sample_stride = 10;
    bool keep_signal = false;
    bool keep_snapshots = false;
};

struct TrajectoryResult {
    std::vector<double> times;                      // sampled, includes t = 0
    std::vector<std::vector<double>> expectations;  // [channel][sample]
    std::vector<Vector> snapshots;                  // sampled states, optional
    SignalRecord signal;                            // optional
    std::vector<FlashEvent> flashes;                // jump runs only
    Vector final_state;
};

} // namespace qtraj

#endif
