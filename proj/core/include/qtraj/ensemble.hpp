#ifndef QTRAJ_ENSEMBLE_HPP
#define QTRAJ_ENSEMBLE_HPP

#include <cstdint>
#include <vector>

#include "qtraj/grw.hpp"
#include "qtraj/me.hpp"
#include "qtraj/model.hpp"
#include "qtraj/sse.hpp"
#include "qtraj/stats.hpp"

namespace qtraj {

/// Weighted pure-state decomposition of an initial density matrix.
struct Decomposition {
    std::vector<double> weights;
    std::vector<QuantumState> states;

    static Decomposition single(QuantumState state);
    DensityMatrix density() const; // the mixed rho it represents
    void validate() const;
};

struct EnsembleParams {
    double dt = 1e-3;
    long steps = 0;
    long sample_stride = 10;
    long trajectories = 0;
    std::uint64_t seed = 0;
    int workers = 0; // 0 = hardware concurrency; never affects results
    bool keep_trajectory_states = false;
};

/// Monte-Carlo aggregate over M trajectories. Means are accumulated in a
/// fixed block order, so the report is bit-identical for any worker count.
struct EnsembleReport {
    long trajectories = 0;
    std::vector<double> times;
    std::vector<Matrix> mean_states;
    std::vector<std::vector<MeanSE>> channel_expectations; // [channel][time]
    std::vector<double> distance_to_reference; // empty without a reference
    // flat per-trajectory snapshots [traj][time*dim*dim], kept on request
    std::vector<std::vector<Complex>> trajectory_states;
    Eigen::Index dim = 0;
};

EnsembleReport run_ensemble(const MonitoringModel& model,
                            const Decomposition& initial,
                            const EnsembleParams& params,
                            const MESolution* reference = nullptr);

enum class FwtVerdict { Tangible, NotTangible, Inconclusive };

const char* to_string(FwtVerdict v);

/// Free Will Test: are two decompositions of the same rho0 statistically
/// distinguishable once the feedback is switched on?
struct FWTReport {
    std::vector<double> times;
    std::vector<double> distance; // between the two ensemble means,
                                  // bootstrap-bias-corrected
    std::vector<double> bootstrap_se; // per-time bootstrap SE of distance
    double max_distance = 0.0;
    double se_at_max = 0.0;
    double time_at_max = 0.0;
    FwtVerdict verdict = FwtVerdict::Inconclusive;
    long trajectories = 0;
    int bootstrap_resamples = 0;
};

FWTReport fwt_experiment(const MonitoringModel& model_with_feedback,
                         const Decomposition& decomp_a,
                         const Decomposition& decomp_b,
                         const EnsembleParams& params,
                         int bootstrap_resamples = 1000);

/// Born-rule outcome statistics: classify final states by the dominant joint
/// eigenprojector of the (mutually commuting) monitored channels.
struct BornOutcome {
    std::vector<double> eigenvalues; // one per channel
    long count = 0;
    double frequency = 0.0;
    double ci_halfwidth = 0.0; // 3-sigma binomial
};

struct BornReport {
    std::vector<BornOutcome> outcomes;
    long unresolved = 0;
    long trajectories = 0;
};

BornReport born_statistics(const MonitoringModel& model,
                           const QuantumState& initial,
                           const EnsembleParams& params);

/// Weak-order validation: bias(dt) is the max-over-time trace distance
/// between the ensemble mean at step dt and a fine ME reference (the
/// parameter-substituted ME when the model carries signal feedback).
struct ConvergenceReport {
    std::vector<double> dts;
    std::vector<double> bias;
    std::vector<double> ratios; // bias(dt_i) / bias(dt_{i+1})
};

ConvergenceReport convergence_study(const MonitoringModel& model,
                                    const Decomposition& initial,
                                    const std::vector<double>& dt_list,
                                    double total_time, long trajectories,
                                    std::uint64_t seed, int workers = 0,
                                    double sample_interval = 0.1);

/// Monte-Carlo aggregate of the GRW jump unravelling, with the flash log.
struct JumpEnsembleReport {
    long trajectories = 0;
    std::vector<double> times;
    std::vector<Matrix> mean_states;
    std::vector<double> distance_to_reference;
    std::vector<long> flash_counts;        // per trajectory, by index
    std::vector<long> flash_site_histogram; // pooled over all flashes
    std::vector<FlashEvent> flashes;        // kept on request, index order
    Eigen::Index dim = 0;
};

JumpEnsembleReport run_jump_ensemble(const JumpModel& model,
                                     const Decomposition& initial,
                                     const EnsembleParams& params,
                                     const MESolution* reference = nullptr,
                                     bool keep_flashes = false);

/// Signal = mean field + white noise: windowed-average variance of the
/// residual against the 1/(4 lambda tau_w) prediction, plus residual
/// autocorrelations pooled over trajectories and channels.
struct SignalNoiseReport {
    std::vector<long> window_steps;
    std::vector<double> window_variance;
    std::vector<double> predicted_variance;
    std::vector<double> autocorr; // lags 1..max_lag
    double autocorr_se = 0.0;     // SE of zero for the pooled estimate
};

SignalNoiseReport signal_noise_study(const MonitoringModel& model,
                                     const QuantumState& initial,
                                     const EnsembleParams& params,
                                     const std::vector<long>& window_steps,
                                     int max_lag = 5);

} // namespace qtraj

#endif
