#include "qtraj/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "qtraj/feedback.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

namespace {

// Trajectories are aggregated in fixed-size blocks; blocks are work items
// and are merged in index order, so results do not depend on worker count.
constexpr long kBlockSize = 64;

void parallel_blocks(long n_blocks, int workers,
                     const std::function<void(long)>& body) {
    if (workers <= 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = int(std::min<long>(workers, n_blocks));
    if (workers <= 1) {
        for (long b = 0; b < n_blocks; ++b) body(b);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const long b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                body(b);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Stratified allocation: trajectory i draws the decomposition member whose
// cumulative weight interval contains (i + 0.5) / M.
std::size_t initial_index(const Decomposition& decomp, long i, long m) {
    const double u = (double(i) + 0.5) / double(m);
    double cum = 0.0;
    for (std::size_t j = 0; j < decomp.weights.size(); ++j) {
        cum += decomp.weights[j];
        if (u < cum) return j;
    }
    return decomp.weights.size() - 1;
}

long sample_count(long steps, long stride) {
    long s = 1 + steps / stride;
    if (steps % stride != 0) ++s;
    return s;
}

std::vector<double> match_reference(const std::vector<double>& times,
                                    const MESolution& reference,
                                    const std::vector<Matrix>& mean_states) {
    std::vector<double> dist(times.size());
    std::size_t j = 0;
    for (std::size_t s = 0; s < times.size(); ++s) {
        while (j < reference.times.size() &&
               reference.times[j] < times[s] - 1e-9)
            ++j;
        if (j >= reference.times.size() ||
            std::abs(reference.times[j] - times[s]) > 1e-9)
            throw ModelError("run_ensemble: reference solution has no sample "
                             "at t = " + std::to_string(times[s]));
        dist[s] = trace_distance(mean_states[s], reference.states[j]);
    }
    return dist;
}

} // namespace

Decomposition Decomposition::single(QuantumState state) {
    Decomposition d;
    d.weights.push_back(1.0);
    d.states.push_back(std::move(state));
    return d;
}

DensityMatrix Decomposition::density() const {
    return mix(states, weights);
}

void Decomposition::validate() const {
    mix(states, weights); // checks weights and dimensions
}

EnsembleReport run_ensemble(const MonitoringModel& model,
                            const Decomposition& initial,
                            const EnsembleParams& params,
                            const MESolution* reference) {
    if (params.trajectories < 2)
        throw ModelError("run_ensemble: at least 2 trajectories required");
    initial.validate();
    for (const auto& s : initial.states)
        if (s.dim() != model.dim())
            throw ModelError("run_ensemble: initial state dimension mismatch");

    const long m = params.trajectories;
    const Eigen::Index d = model.dim();
    const std::size_t nch = model.channels().size();
    const long n_samples = sample_count(params.steps, params.sample_stride);
    const long n_blocks = (m + kBlockSize - 1) / kBlockSize;

    struct BlockAccum {
        std::vector<Matrix> sum_rho;
        std::vector<std::vector<double>> sum_e, sum_e2; // [channel][time]
    };
    std::vector<BlockAccum> blocks(n_blocks);

    EnsembleReport report;
    report.trajectories = m;
    report.dim = d;
    if (params.keep_trajectory_states)
        report.trajectory_states.resize(m);

    TrajectoryOptions opts;
    opts.dt = params.dt;
    opts.steps = params.steps;
    opts.sample_stride = params.sample_stride;
    opts.keep_snapshots = true;

    std::vector<double>* times_seen = &report.times;

    parallel_blocks(n_blocks, params.workers, [&](long b) {
        BlockAccum& acc = blocks[b];
        acc.sum_rho.assign(n_samples, Matrix::Zero(d, d));
        acc.sum_e.assign(nch, std::vector<double>(n_samples, 0.0));
        acc.sum_e2.assign(nch, std::vector<double>(n_samples, 0.0));
        const long lo = b * kBlockSize;
        const long hi = std::min(m, lo + kBlockSize);
        for (long i = lo; i < hi; ++i) {
            const auto& psi0 = initial.states[initial_index(initial, i, m)];
            TrajectoryResult traj;
            try {
                traj = run_trajectory(model, psi0, opts, params.seed, i);
            } catch (const Error& e) {
                throw IntegrationError("trajectory " + std::to_string(i) +
                                       ": " + e.what());
            }
            if (long(traj.times.size()) != n_samples)
                throw Error("run_ensemble: unexpected sample count");
            for (long s = 0; s < n_samples; ++s) {
                const Vector& psi = traj.snapshots[s];
                acc.sum_rho[s].noalias() += psi * psi.adjoint();
                for (std::size_t k = 0; k < nch; ++k) {
                    const double e = traj.expectations[k][s];
                    acc.sum_e[k][s] += e;
                    acc.sum_e2[k][s] += e * e;
                }
            }
            if (params.keep_trajectory_states) {
                auto& flat = report.trajectory_states[i];
                flat.reserve(n_samples * d * d);
                for (const auto& psi : traj.snapshots)
                    for (Eigen::Index col = 0; col < d; ++col)
                        for (Eigen::Index row = 0; row < d; ++row)
                            flat.push_back(psi(row) * std::conj(psi(col)));
            }
            if (b == 0 && i == lo) *times_seen = traj.times;
        }
    });

    // Fixed-order merge.
    std::vector<Matrix> sum_rho(n_samples, Matrix::Zero(d, d));
    std::vector<std::vector<double>> sum_e(nch,
                                           std::vector<double>(n_samples, 0.0)),
        sum_e2(nch, std::vector<double>(n_samples, 0.0));
    for (long b = 0; b < n_blocks; ++b) {
        for (long s = 0; s < n_samples; ++s) sum_rho[s] += blocks[b].sum_rho[s];
        for (std::size_t k = 0; k < nch; ++k)
            for (long s = 0; s < n_samples; ++s) {
                sum_e[k][s] += blocks[b].sum_e[k][s];
                sum_e2[k][s] += blocks[b].sum_e2[k][s];
            }
    }

    report.mean_states.reserve(n_samples);
    for (long s = 0; s < n_samples; ++s) {
        Matrix mean = sum_rho[s] / double(m);
        // ensemble means must still look like density matrices
        DensityMatrix check(mean, 1e-6, 1e-6, 1e-6);
        report.mean_states.push_back(std::move(mean));
    }
    report.channel_expectations.assign(nch, std::vector<MeanSE>(n_samples));
    for (std::size_t k = 0; k < nch; ++k)
        for (long s = 0; s < n_samples; ++s) {
            const double mean = sum_e[k][s] / double(m);
            const double var =
                std::max(0.0, (sum_e2[k][s] - double(m) * mean * mean) /
                                  double(m - 1));
            report.channel_expectations[k][s] = {mean,
                                                 std::sqrt(var / double(m))};
        }

    if (reference)
        report.distance_to_reference =
            match_reference(report.times, *reference, report.mean_states);
    return report;
}

const char* to_string(FwtVerdict v) {
    switch (v) {
        case FwtVerdict::Tangible: return "tangible";
        case FwtVerdict::NotTangible: return "not_tangible";
        default: return "inconclusive";
    }
}

FWTReport fwt_experiment(const MonitoringModel& model_with_feedback,
                         const Decomposition& decomp_a,
                         const Decomposition& decomp_b,
                         const EnsembleParams& params,
                         int bootstrap_resamples) {
    const Matrix rho_a = decomp_a.density().matrix();
    const Matrix rho_b = decomp_b.density().matrix();
    if ((rho_a - rho_b).cwiseAbs().maxCoeff() > 1e-10)
        throw ModelError(
            "fwt_experiment: decompositions do not mix to the same rho0");
    if (bootstrap_resamples < 2)
        throw ModelError("fwt_experiment: need >= 2 bootstrap resamples");

    EnsembleParams p = params;
    p.keep_trajectory_states = true;
    // Shared seed: trajectory i of ensemble A and of ensemble B consume the
    // same noise streams (common random numbers).
    EnsembleReport rep_a = run_ensemble(model_with_feedback, decomp_a, p);
    EnsembleReport rep_b = run_ensemble(model_with_feedback, decomp_b, p);

    const long m = params.trajectories;
    const Eigen::Index d = rep_a.dim;
    const long n_samples = long(rep_a.times.size());
    const long flat = n_samples * d * d;

    FWTReport out;
    out.times = rep_a.times;
    out.trajectories = m;
    out.bootstrap_resamples = bootstrap_resamples;
    out.distance.resize(n_samples);
    for (long s = 0; s < n_samples; ++s)
        out.distance[s] =
            trace_distance(rep_a.mean_states[s], rep_b.mean_states[s]);

    // Paired bootstrap over trajectories.
    std::vector<std::vector<double>> boot_dist(
        n_samples, std::vector<double>(bootstrap_resamples));
    CounterRng boot_rng(params.seed, 0xb001u, 0);
    std::vector<Complex> acc_a(flat), acc_b(flat);
    for (int r = 0; r < bootstrap_resamples; ++r) {
        std::fill(acc_a.begin(), acc_a.end(), Complex{0.0, 0.0});
        std::fill(acc_b.begin(), acc_b.end(), Complex{0.0, 0.0});
        for (long i = 0; i < m; ++i) {
            const long idx = long(boot_rng.next_u64() % std::uint64_t(m));
            const auto& fa = rep_a.trajectory_states[idx];
            const auto& fb = rep_b.trajectory_states[idx];
            for (long j = 0; j < flat; ++j) {
                acc_a[j] += fa[j];
                acc_b[j] += fb[j];
            }
        }
        for (long s = 0; s < n_samples; ++s) {
            Matrix ma =
                Eigen::Map<const Matrix>(acc_a.data() + s * d * d, d, d) /
                double(m);
            Matrix mb =
                Eigen::Map<const Matrix>(acc_b.data() + s * d * d, d, d) /
                double(m);
            boot_dist[s][r] = trace_distance(ma, mb);
        }
    }
    out.bootstrap_se.resize(n_samples);
    for (long s = 0; s < n_samples; ++s) {
        out.bootstrap_se[s] = std::sqrt(sample_variance(boot_dist[s]));
        // The distance between noisy means is biased upward; the bootstrap
        // mean carries roughly twice that bias, so 2 d - mean(d*) removes it
        // to first order while leaving a genuine separation untouched.
        double boot_mean = 0.0;
        for (double v : boot_dist[s]) boot_mean += v;
        boot_mean /= double(bootstrap_resamples);
        out.distance[s] = std::max(0.0, 2.0 * out.distance[s] - boot_mean);
    }

    long s_max = 0;
    for (long s = 1; s < n_samples; ++s)
        if (out.distance[s] > out.distance[s_max]) s_max = s;
    out.max_distance = out.distance[s_max];
    out.se_at_max = out.bootstrap_se[s_max];
    out.time_at_max = out.times[s_max];

    if (out.max_distance >= 5.0 * out.se_at_max)
        out.verdict = FwtVerdict::NotTangible;
    else if (out.max_distance <= 2.0 * out.se_at_max)
        out.verdict = FwtVerdict::Tangible;
    else
        out.verdict = FwtVerdict::Inconclusive;
    return out;
}

BornReport born_statistics(const MonitoringModel& model,
                           const QuantumState& initial,
                           const EnsembleParams& params) {
    if (params.trajectories < 2)
        throw ModelError("born_statistics: at least 2 trajectories required");
    const std::size_t nch = model.channels().size();
    const Matrix& h = model.hamiltonian().matrix();
    for (std::size_t k = 0; k < nch; ++k) {
        const Matrix& l = model.channels()[k].op.matrix();
        if ((h * l - l * h).cwiseAbs().maxCoeff() > 1e-10)
            throw ModelError("born_statistics: H does not commute with "
                             "channel " + std::to_string(k));
    }

    // Joint eigenspaces of the commuting channel family, found through a
    // generic combination that splits every shared degeneracy.
    const Eigen::Index d = model.dim();
    Matrix combo = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < nch; ++k)
        combo += std::sqrt(2.0 + double(k) * 0.7182818) *
                 model.channels()[k].op.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(combo);

    std::vector<std::vector<double>> labels;   // per outcome, per channel
    std::vector<std::vector<Eigen::Index>> members; // eigenvector columns
    for (Eigen::Index v = 0; v < d; ++v) {
        std::vector<double> lab(nch);
        const Vector vec = es.eigenvectors().col(v);
        for (std::size_t k = 0; k < nch; ++k)
            lab[k] = vec.dot(model.channels()[k].op.matrix() * vec).real();
        bool found = false;
        for (std::size_t o = 0; o < labels.size(); ++o) {
            bool same = true;
            for (std::size_t k = 0; k < nch; ++k)
                if (std::abs(labels[o][k] - lab[k]) > 1e-8) same = false;
            if (same) {
                members[o].push_back(v);
                found = true;
                break;
            }
        }
        if (!found) {
            labels.push_back(std::move(lab));
            members.push_back({v});
        }
    }

    const long m = params.trajectories;
    const long n_blocks = (m + kBlockSize - 1) / kBlockSize;
    std::vector<std::vector<long>> block_counts(
        n_blocks, std::vector<long>(labels.size() + 1, 0)); // last: unresolved

    TrajectoryOptions opts;
    opts.dt = params.dt;
    opts.steps = params.steps;
    opts.sample_stride = params.steps; // final state only
    opts.keep_snapshots = false;

    parallel_blocks(n_blocks, params.workers, [&](long b) {
        const long lo = b * kBlockSize;
        const long hi = std::min(m, lo + kBlockSize);
        for (long i = lo; i < hi; ++i) {
            TrajectoryResult traj =
                run_trajectory(model, initial, opts, params.seed, i);
            bool resolved = false;
            for (std::size_t o = 0; o < members.size(); ++o) {
                double w = 0.0;
                for (Eigen::Index v : members[o])
                    w += std::norm(
                        es.eigenvectors().col(v).dot(traj.final_state));
                if (w > 0.99) {
                    ++block_counts[b][o];
                    resolved = true;
                    break;
                }
            }
            if (!resolved) ++block_counts[b].back();
        }
    });

    BornReport report;
    report.trajectories = m;
    report.outcomes.resize(labels.size());
    for (std::size_t o = 0; o < labels.size(); ++o)
        report.outcomes[o].eigenvalues = labels[o];
    for (long b = 0; b < n_blocks; ++b) {
        for (std::size_t o = 0; o < labels.size(); ++o)
            report.outcomes[o].count += block_counts[b][o];
        report.unresolved += block_counts[b].back();
    }
    for (auto& o : report.outcomes) {
        o.frequency = double(o.count) / double(m);
        o.ci_halfwidth =
            3.0 * std::sqrt(o.frequency * (1.0 - o.frequency) / double(m));
    }
    return report;
}

ConvergenceReport convergence_study(const MonitoringModel& model,
                                    const Decomposition& initial,
                                    const std::vector<double>& dt_list,
                                    double total_time, long trajectories,
                                    std::uint64_t seed, int workers,
                                    double sample_interval) {
    if (dt_list.size() < 2)
        throw ModelError("convergence_study: need >= 2 dt values");
    for (std::size_t i = 1; i < dt_list.size(); ++i)
        if (!(dt_list[i] < dt_list[i - 1]))
            throw ModelError("convergence_study: dt_list must be descending");

    // ME reference: the parameter-substituted model when signal feedback is
    // on, the bare model otherwise.
    const MonitoringModel* ref_model = &model;
    std::optional<MonitoringModel> substituted;
    if (model.feedback()) {
        if (model.feedback()->mode != FeedbackMode::Signal)
            throw ModelError("convergence_study: no ME oracle for mean-field "
                             "feedback");
        substituted = modified_me_params(model, model.feedback()->gain);
        ref_model = &*substituted;
    }

    const double dt_me = sample_interval / std::ceil(sample_interval / 1e-4);
    const long me_steps = std::lround(total_time / dt_me);
    const long me_stride = std::lround(sample_interval / dt_me);
    MESolution reference =
        run_me(*ref_model, initial.density(), dt_me, me_steps, me_stride);

    ConvergenceReport report;
    for (double dt : dt_list) {
        const long steps = std::lround(total_time / dt);
        const long stride = std::lround(sample_interval / dt);
        if (std::abs(stride * dt - sample_interval) > 1e-9)
            throw ModelError("convergence_study: dt " + std::to_string(dt) +
                             " does not divide the sample interval");
        EnsembleParams p;
        p.dt = dt;
        p.steps = steps;
        p.sample_stride = stride;
        p.trajectories = trajectories;
        p.seed = seed;
        p.workers = workers;
        EnsembleReport rep = run_ensemble(model, initial, p, &reference);
        double bias = 0.0;
        for (double v : rep.distance_to_reference) bias = std::max(bias, v);
        report.dts.push_back(dt);
        report.bias.push_back(bias);
    }
    for (std::size_t i = 0; i + 1 < report.bias.size(); ++i)
        report.ratios.push_back(report.bias[i] /
                                std::max(report.bias[i + 1], 1e-300));
    return report;
}

JumpEnsembleReport run_jump_ensemble(const JumpModel& model,
                                     const Decomposition& initial,
                                     const EnsembleParams& params,
                                     const MESolution* reference,
                                     bool keep_flashes) {
    if (params.trajectories < 2)
        throw ModelError("run_jump_ensemble: at least 2 trajectories required");
    initial.validate();
    model.validate();
    const long m = params.trajectories;
    const Eigen::Index d = model.lattice.dim();
    const long n_samples = sample_count(params.steps, params.sample_stride);
    const long n_blocks = (m + kBlockSize - 1) / kBlockSize;

    struct BlockAccum {
        std::vector<Matrix> sum_rho;
        std::vector<long> site_hist;
        std::vector<std::vector<FlashEvent>> flashes; // per trajectory
    };
    std::vector<BlockAccum> blocks(n_blocks);

    JumpEnsembleReport report;
    report.trajectories = m;
    report.dim = d;
    report.flash_counts.assign(m, 0);

    TrajectoryOptions opts;
    opts.dt = params.dt;
    opts.steps = params.steps;
    opts.sample_stride = params.sample_stride;
    opts.keep_snapshots = true;

    std::vector<double>* times_seen = &report.times;

    parallel_blocks(n_blocks, params.workers, [&](long b) {
        BlockAccum& acc = blocks[b];
        acc.sum_rho.assign(n_samples, Matrix::Zero(d, d));
        acc.site_hist.assign(model.lattice.n_sites, 0);
        const long lo = b * kBlockSize;
        const long hi = std::min(m, lo + kBlockSize);
        if (keep_flashes) acc.flashes.resize(hi - lo);
        for (long i = lo; i < hi; ++i) {
            const auto& psi0 = initial.states[initial_index(initial, i, m)];
            TrajectoryResult traj =
                run_jump_trajectory(model, psi0, opts, params.seed, i);
            for (long s = 0; s < n_samples; ++s) {
                const Vector& psi = traj.snapshots[s];
                acc.sum_rho[s].noalias() += psi * psi.adjoint();
            }
            report.flash_counts[i] = long(traj.flashes.size());
            for (const auto& f : traj.flashes) ++acc.site_hist[f.center];
            if (keep_flashes) acc.flashes[i - lo] = std::move(traj.flashes);
            if (b == 0 && i == lo) *times_seen = traj.times;
        }
    });

    std::vector<Matrix> sum_rho(n_samples, Matrix::Zero(d, d));
    report.flash_site_histogram.assign(model.lattice.n_sites, 0);
    for (long b = 0; b < n_blocks; ++b) {
        for (long s = 0; s < n_samples; ++s) sum_rho[s] += blocks[b].sum_rho[s];
        for (int z = 0; z < model.lattice.n_sites; ++z)
            report.flash_site_histogram[z] += blocks[b].site_hist[z];
        if (keep_flashes)
            for (auto& traj_flashes : blocks[b].flashes)
                report.flashes.insert(report.flashes.end(),
                                      traj_flashes.begin(),
                                      traj_flashes.end());
    }
    report.mean_states.reserve(n_samples);
    for (long s = 0; s < n_samples; ++s)
        report.mean_states.push_back(sum_rho[s] / double(m));
    if (reference)
        report.distance_to_reference =
            match_reference(report.times, *reference, report.mean_states);
    return report;
}

SignalNoiseReport signal_noise_study(const MonitoringModel& model,
                                     const QuantumState& initial,
                                     const EnsembleParams& params,
                                     const std::vector<long>& window_steps,
                                     int max_lag) {
    if (window_steps.empty())
        throw ModelError("signal_noise_study: no window lengths");
    double lambda = -1.0;
    for (const auto& ch : model.channels()) {
        if (ch.coupling == 0.0) continue;
        if (lambda < 0.0) lambda = ch.coupling;
        else if (std::abs(ch.coupling - lambda) > 1e-12)
            throw ModelError("signal_noise_study: monitored couplings must "
                             "all be equal");
    }
    if (lambda <= 0.0)
        throw ModelError("signal_noise_study: no monitored channel");

    TrajectoryOptions opts;
    opts.dt = params.dt;
    opts.steps = params.steps;
    opts.sample_stride = params.steps;
    opts.keep_signal = true;

    // Pooled accumulators over trajectories and monitored channels.
    std::vector<double> wsum(window_steps.size(), 0.0),
        wsumsq(window_steps.size(), 0.0);
    std::vector<long> wcount(window_steps.size(), 0);
    std::vector<double> ac_sum(max_lag, 0.0);
    long ac_series = 0;

    for (long i = 0; i < params.trajectories; ++i) {
        TrajectoryResult traj =
            run_trajectory(model, initial, opts, params.seed, i);
        for (std::size_t k = 0; k < model.channels().size(); ++k) {
            if (model.channels()[k].coupling == 0.0) continue;
            const auto& sig = traj.signal.values[k];
            const auto& mf = traj.signal.mean_field[k];
            std::vector<double> resid(sig.size());
            for (std::size_t n = 0; n < sig.size(); ++n)
                resid[n] = sig[n] - mf[n];
            for (std::size_t w = 0; w < window_steps.size(); ++w) {
                const long ws = window_steps[w];
                for (std::size_t n = 0; n + ws <= resid.size(); n += ws) {
                    double mean = 0.0;
                    for (long j = 0; j < ws; ++j) mean += resid[n + j];
                    mean /= double(ws);
                    wsum[w] += mean;
                    wsumsq[w] += mean * mean;
                    ++wcount[w];
                }
            }
            for (int lag = 1; lag <= max_lag; ++lag)
                ac_sum[lag - 1] += autocorrelation(resid, lag);
            ++ac_series;
        }
    }

    SignalNoiseReport report;
    report.window_steps = window_steps;
    for (std::size_t w = 0; w < window_steps.size(); ++w) {
        if (wcount[w] < 2)
            throw ModelError("signal_noise_study: window too long for run");
        const double mean = wsum[w] / double(wcount[w]);
        report.window_variance.push_back(
            (wsumsq[w] - double(wcount[w]) * mean * mean) /
            double(wcount[w] - 1));
        report.predicted_variance.push_back(
            1.0 / (4.0 * lambda * double(window_steps[w]) * params.dt));
    }
    for (int lag = 1; lag <= max_lag; ++lag)
        report.autocorr.push_back(ac_sum[lag - 1] / double(ac_series));
    report.autocorr_se =
        1.0 / std::sqrt(double(params.steps) * double(ac_series));
    return report;
}

} // namespace qtraj
