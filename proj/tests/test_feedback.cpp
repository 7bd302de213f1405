#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/feedback.hpp"
#include "qtraj/me.hpp"

using namespace qtraj;
using namespace qtraj::testing;

namespace {

FeedbackSpec signal_fb(double gain,
                       FeedbackOrdering ordering =
                           FeedbackOrdering::PostMeasurement) {
    return FeedbackSpec{FeedbackMode::Signal, gain, {0}, ordering};
}

} // namespace

TEST_CASE("zero gain feedback is the identity map") {
    MonitoringModel model = qubit_model(1.0, false, signal_fb(0.0));
    std::vector<double> dw{0.3}, pre{0.2};
    auto out = apply_signal_feedback(ket_plus(), model, 1e-3, dw, pre);
    CHECK((out.amplitudes() - ket_plus().amplitudes()).norm() < 1e-14);

    MonitoringModel mf = qubit_model(
        1.0, false, FeedbackSpec{FeedbackMode::MeanField, 0.0, {0}});
    auto out2 = apply_meanfield_feedback(ket_plus(), mf, 1e-3);
    CHECK((out2.amplitudes() - ket_plus().amplitudes()).norm() < 1e-14);
}

TEST_CASE("feedback on an eigenstate is a global phase") {
    const double g = 1.7, dt = 1e-3, dw = 0.25;
    MonitoringModel model = qubit_model(1.0, false, signal_fb(g));
    std::vector<double> dws{dw}, pre{1.0}; // <L> on |0> is +1
    auto out = apply_signal_feedback(ket0(), model, dt, dws, pre);

    const double s = 1.0 * dt + dw / 2.0;
    const Complex phase = std::exp(Complex{0.0, -g * s});
    CHECK(std::abs(out[0] - phase) < 1e-12);
    CHECK(std::abs(out[1]) < 1e-12);

    const Matrix before =
        ket0().amplitudes() * ket0().amplitudes().adjoint();
    const Matrix after = out.amplitudes() * out.amplitudes().adjoint();
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);

    MonitoringModel mf = qubit_model(
        1.0, false, FeedbackSpec{FeedbackMode::MeanField, g, {0}});
    auto out2 = apply_meanfield_feedback(ket0(), mf, dt);
    CHECK(std::abs(out2[0] - std::exp(Complex{0.0, -g * dt})) < 1e-12);
}

TEST_CASE("feedback maps demand a matching mode") {
    MonitoringModel sig = qubit_model(1.0, false, signal_fb(1.0));
    CHECK_THROWS_AS(apply_meanfield_feedback(ket0(), sig, 1e-3), ModelError);
    MonitoringModel mf = qubit_model(
        1.0, false, FeedbackSpec{FeedbackMode::MeanField, 1.0, {0}});
    std::vector<double> dw{0.0}, pre{0.0};
    CHECK_THROWS_AS(apply_signal_feedback(ket0(), mf, 1e-3, dw, pre),
                    ModelError);
}

TEST_CASE("parameter substitution: lambda=1, g=2 doubles the coupling") {
    MonitoringModel model = qubit_model(1.0, true, signal_fb(2.0));
    MonitoringModel sub = modified_me_params(model, 2.0);
    CHECK(sub.channels()[0].coupling == 2.0);
    // H' = H + (g/2) L^2 = H + identity for L = sigma_z
    const Matrix expected =
        sigma_x_half().matrix() + Matrix::Identity(2, 2);
    CHECK((sub.hamiltonian().matrix() - expected).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(!sub.feedback().has_value());
}

TEST_CASE("parameter substitution: identity at g=0, lambda=1/2 maps to 1") {
    MonitoringModel model = qubit_model(0.5, true, signal_fb(0.0));
    MonitoringModel sub0 = modified_me_params(model, 0.0);
    CHECK(sub0.channels()[0].coupling == 0.5);
    CHECK((sub0.hamiltonian().matrix() - sigma_x_half().matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);

    MonitoringModel model2 = qubit_model(0.5, true, signal_fb(1.0));
    CHECK(modified_me_params(model2, 1.0).channels()[0].coupling == 1.0);
}

TEST_CASE("substituting feedback of an unmonitored channel is rejected") {
    MonitoringModel model = qubit_model(0.0, true, signal_fb(1.0));
    CHECK_THROWS_AS(modified_me_params(model, 1.0), ModelError);
}

TEST_CASE("signal-feedback ensemble approaches the substituted ME") {
    const double g = 2.0, dt = 1e-3;
    const long steps = 1000;
    MonitoringModel model = qubit_model(1.0, true, signal_fb(g));
    MonitoringModel oracle_model = modified_me_params(model, g);
    auto oracle = run_me(oracle_model, DensityMatrix::pure(ket0()), 1e-4,
                         10 * steps, 1000);

    EnsembleParams p;
    p.dt = dt;
    p.steps = steps;
    p.sample_stride = 100;
    p.trajectories = 4000;
    p.seed = 2024;
    p.workers = 1;
    auto rep = run_ensemble(model, Decomposition::single(ket0()), p, &oracle);
    double worst = 0.0;
    for (double v : rep.distance_to_reference) worst = std::max(worst, v);
    CHECK(worst < 0.05);
}

TEST_CASE("folding the feedback into the drift breaks the ME oracle") {
    // The naive in-drift substitution drops the Ito cross terms and lands on
    // a different ensemble evolution; the split-step composition does not.
    const double g = 2.0, dt = 1e-3;
    const long steps = 1000;
    MonitoringModel good = qubit_model(1.0, true, signal_fb(g));
    MonitoringModel bad =
        qubit_model(1.0, true, signal_fb(g, FeedbackOrdering::InDrift));
    auto oracle = run_me(modified_me_params(good, g),
                         DensityMatrix::pure(ket0()), 1e-4, 10 * steps, 1000);

    EnsembleParams p;
    p.dt = dt;
    p.steps = steps;
    p.sample_stride = 100;
    p.trajectories = 4000;
    p.seed = 5150;
    p.workers = 1;

    auto rep_good =
        run_ensemble(good, Decomposition::single(ket0()), p, &oracle);
    auto rep_bad = run_ensemble(bad, Decomposition::single(ket0()), p, &oracle);
    double worst_good = 0.0, worst_bad = 0.0;
    for (double v : rep_good.distance_to_reference)
        worst_good = std::max(worst_good, v);
    for (double v : rep_bad.distance_to_reference)
        worst_bad = std::max(worst_bad, v);
    CHECK(worst_good < 0.05);
    CHECK(worst_bad > 0.03);
    CHECK(worst_bad > 4.0 * worst_good);
}
