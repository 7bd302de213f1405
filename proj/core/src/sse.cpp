#include "qtraj/sse.hpp"

#include <cmath>
#include <limits>

#include "qtraj/rng.hpp"

namespace qtraj {

namespace {

constexpr Complex kImag{0.0, 1.0};

bool all_finite(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag()))
            return false;
    return true;
}

} // namespace

SseStepper::SseStepper(const MonitoringModel& model, double dt)
    : model_(model), dt_(dt) {
    if (!(dt > 0.0)) throw ModelError("SseStepper: dt must be > 0");
    if (model.channels().empty())
        throw ModelError("SseStepper: SSE runs need at least one channel");
    const Eigen::Index d = model.dim();
    acc_.resize(d);
    lpsi_.resize(d);
    l2psi_.resize(d);
    tmp_.resize(d);
    pre_exp_.resize(model.channels().size());
    zero_hamiltonian_ =
        model.hamiltonian().matrix().cwiseAbs().maxCoeff() == 0.0;
    const std::size_t nch = model.channels().size();
    diag_channel_.assign(nch, false);
    diag_.resize(nch);
    for (std::size_t k = 0; k < nch; ++k) {
        const Matrix& m = model.channels()[k].op.matrix();
        bool is_diag = true;
        for (Eigen::Index i = 0; i < d && is_diag; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                if (i != j && m(i, j) != Complex{0.0, 0.0}) {
                    is_diag = false;
                    break;
                }
        diag_channel_[k] = is_diag;
        if (is_diag) diag_[k] = m.diagonal().real();
    }
    if (model.feedback() && model.feedback()->channels.size() == 1) {
        single_fb_channel_ = true;
        const auto& op = model.channels()[model.feedback()->channels[0]].op;
        Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix());
        fb_vecs_ = es.eigenvectors();
        fb_vals_ = es.eigenvalues();
    }
}

void SseStepper::apply_feedback_unitary(Vector& psi,
                                        std::span<const double> amounts) {
    const double g = model_.feedback()->gain;
    if (single_fb_channel_) {
        tmp_.noalias() = fb_vecs_.adjoint() * psi;
        for (Eigen::Index i = 0; i < tmp_.size(); ++i)
            tmp_(i) *= std::exp(-kImag * (g * amounts[0] * fb_vals_(i)));
        psi.noalias() = fb_vecs_ * tmp_;
    } else {
        Matrix f = Matrix::Zero(psi.size(), psi.size());
        const auto& fbch = model_.feedback()->channels;
        for (std::size_t j = 0; j < fbch.size(); ++j)
            f += amounts[j] * model_.channels()[fbch[j]].op.matrix();
        Eigen::SelfAdjointEigenSolver<Matrix> es(f);
        tmp_.noalias() = es.eigenvectors().adjoint() * psi;
        for (Eigen::Index i = 0; i < tmp_.size(); ++i)
            tmp_(i) *= std::exp(-kImag * (g * es.eigenvalues()(i)));
        psi.noalias() = es.eigenvectors() * tmp_;
    }
    psi.normalize();
}

void SseStepper::step(Vector& psi, std::span<const double> dW,
                      std::span<double> signal_out, long step_index) {
    const auto& chans = model_.channels();
    const std::size_t nch = chans.size();
    const auto& fb = model_.feedback();

    // Pre-measurement expectations and the recorded signal increments.
    for (std::size_t k = 0; k < nch; ++k) {
        if (diag_channel_[k]) {
            double e = 0.0;
            for (Eigen::Index i = 0; i < psi.size(); ++i)
                e += diag_[k](i) * std::norm(psi(i));
            pre_exp_[k] = e;
        } else {
            lpsi_.noalias() = chans[k].op.matrix() * psi;
            pre_exp_[k] = psi.dot(lpsi_).real();
        }
        const double lam = chans[k].coupling;
        signal_out[k] = lam > 0.0
                            ? pre_exp_[k] * dt_ + dW[k] / (2.0 * std::sqrt(lam))
                            : std::numeric_limits<double>::quiet_NaN();
    }

    auto& fb_amounts = fb_amounts_;
    if (fb) {
        fb_amounts.resize(fb->channels.size());
        for (std::size_t j = 0; j < fb->channels.size(); ++j)
            fb_amounts[j] = fb->mode == FeedbackMode::Signal
                                ? signal_out[fb->channels[j]]
                                : pre_exp_[fb->channels[j]] * dt_;
    }

    if (fb && fb->ordering == FeedbackOrdering::PreMeasurement)
        apply_feedback_unitary(psi, fb_amounts);

    // Euler-Maruyama update.
    acc_ = psi;
    if (!zero_hamiltonian_)
        acc_.noalias() +=
            (-kImag * dt_) * (model_.hamiltonian().matrix() * psi);
    for (std::size_t k = 0; k < nch; ++k) {
        const double lam = chans[k].coupling;
        if (lam == 0.0) continue;
        if (diag_channel_[k]) {
            double e = 0.0;
            for (Eigen::Index i = 0; i < psi.size(); ++i)
                e += diag_[k](i) * std::norm(psi(i));
            const double sl = std::sqrt(lam) * dW[k];
            for (Eigen::Index i = 0; i < psi.size(); ++i) {
                const double c = diag_[k](i) - e;
                acc_(i) += (sl * c - 0.5 * lam * dt_ * c * c) * psi(i);
            }
            continue;
        }
        lpsi_.noalias() = chans[k].op.matrix() * psi;
        const double e = psi.dot(lpsi_).real();
        l2psi_.noalias() = chans[k].op.matrix() * lpsi_;
        acc_.noalias() += (-0.5 * lam * dt_) *
                          (l2psi_ - (2.0 * e) * lpsi_ + (e * e) * psi);
        acc_.noalias() += (std::sqrt(lam) * dW[k]) * (lpsi_ - e * psi);
    }
    if (fb && fb->ordering == FeedbackOrdering::InDrift) {
        for (std::size_t j = 0; j < fb->channels.size(); ++j) {
            lpsi_.noalias() = chans[fb->channels[j]].op.matrix() * psi;
            acc_.noalias() += (-kImag * fb->gain * fb_amounts[j]) * lpsi_;
        }
    }

    if (!all_finite(acc_))
        throw IntegrationError("sse_step: non-finite amplitudes at step " +
                               std::to_string(step_index));
    psi = acc_;
    psi.normalize();

    if (fb && fb->ordering == FeedbackOrdering::PostMeasurement) {
        if (fb->mode == FeedbackMode::MeanField) {
            for (std::size_t j = 0; j < fb->channels.size(); ++j) {
                lpsi_.noalias() = chans[fb->channels[j]].op.matrix() * psi;
                fb_amounts[j] = psi.dot(lpsi_).real() * dt_;
            }
        }
        apply_feedback_unitary(psi, fb_amounts);
    }
}

std::pair<QuantumState, std::vector<double>>
sse_step(const QuantumState& state, const MonitoringModel& model, double dt,
         std::span<const double> dW) {
    if (state.dim() != model.dim())
        throw ModelError("sse_step: state/model dimension mismatch");
    if (dW.size() != model.channels().size())
        throw ModelError("sse_step: expected one Wiener increment per channel");
    for (double w : dW)
        if (!std::isfinite(w)) throw ModelError("sse_step: non-finite dW");
    SseStepper stepper(model, dt);
    Vector psi = state.amplitudes();
    std::vector<double> signal(model.channels().size());
    stepper.step(psi, dW, signal, 0);
    return {QuantumState(std::move(psi)), std::move(signal)};
}

TrajectoryResult run_trajectory(const MonitoringModel& model,
                                const QuantumState& initial,
                                const TrajectoryOptions& opts,
                                std::uint64_t seed,
                                std::uint64_t trajectory_index) {
    if (opts.steps < 1) throw ModelError("run_trajectory: steps must be >= 1");
    if (opts.sample_stride < 1)
        throw ModelError("run_trajectory: sample_stride must be >= 1");
    if (initial.dim() != model.dim())
        throw ModelError("run_trajectory: state/model dimension mismatch");

    const std::size_t nch = model.channels().size();
    SseStepper stepper(model, opts.dt);
    Vector psi = initial.amplitudes();

    std::vector<CounterRng> streams;
    streams.reserve(nch);
    for (std::size_t k = 0; k < nch; ++k)
        streams.emplace_back(seed, trajectory_index, k);

    TrajectoryResult res;
    res.expectations.resize(nch);
    if (opts.keep_signal) {
        res.signal.values.resize(nch);
        res.signal.mean_field.resize(nch);
        res.signal.times.reserve(opts.steps);
        for (auto& v : res.signal.values) v.reserve(opts.steps);
        for (auto& v : res.signal.mean_field) v.reserve(opts.steps);
    }

    const double sqrt_dt = std::sqrt(opts.dt);
    std::vector<double> dw(nch), sig(nch);

    auto sample = [&](double t) {
        res.times.push_back(t);
        for (std::size_t k = 0; k < nch; ++k) {
            const Complex e =
                psi.dot(model.channels()[k].op.matrix() * psi);
            res.expectations[k].push_back(e.real());
        }
        if (opts.keep_snapshots) res.snapshots.push_back(psi);
    };

    sample(0.0);
    for (long n = 0; n < opts.steps; ++n) {
        for (std::size_t k = 0; k < nch; ++k)
            dw[k] = sqrt_dt * streams[k].next_normal();
        stepper.step(psi, dw, sig, n);
        const double t = double(n + 1) * opts.dt;
        if (opts.keep_signal) {
            res.signal.times.push_back(t);
            for (std::size_t k = 0; k < nch; ++k) {
                res.signal.values[k].push_back(sig[k] / opts.dt);
                res.signal.mean_field[k].push_back(
                    stepper.pre_expectations()[k]);
            }
        }
        if ((n + 1) % opts.sample_stride == 0 || n + 1 == opts.steps)
            sample(t);
    }
    res.final_state = psi;
    return res;
}

} // namespace qtraj
