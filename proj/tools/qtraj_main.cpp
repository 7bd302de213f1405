// Command-line entry points for the monitoring / spontaneous-collapse
// experiments: deterministic master-equation runs, Monte-Carlo ensembles,
// the Free Will Test, GRW jump runs, CSL lattice rate fits and weak-order
// convergence studies.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qtraj/config.hpp"
#include "qtraj/feedback.hpp"
#include "qtraj/results_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qtraj;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::int64_t> seed;
    int workers = 0;
};

RunConfig load_config(const CliOptions& opts, ExperimentKind expected) {
    std::ifstream in(opts.config_path);
    if (!in)
        throw ConfigError("cannot read config file: " + opts.config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config(buf.str());
    if (cfg.experiment != expected)
        throw ConfigError(std::string("config is for experiment '") +
                          to_string(cfg.experiment) +
                          "' but the subcommand expects '" +
                          to_string(expected) + "'");
    if (opts.seed) {
        cfg.seed = std::uint64_t(*opts.seed);
        cfg.echo["ensemble"]["seed"] = *opts.seed; // keep the echo re-runnable
    }
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (!cfg.out_dir) cfg.out_dir = "qtraj_out";
    return cfg;
}

json base_summary(const RunConfig& cfg) {
    json s;
    s["version"] = kVersion;
    s["experiment"] = to_string(cfg.experiment);
    s["seed"] = cfg.seed;
    s["config"] = cfg.echo;
    return s;
}

EnsembleParams ensemble_params(const RunConfig& cfg, int workers) {
    EnsembleParams p;
    p.dt = cfg.dt;
    p.steps = cfg.steps;
    p.sample_stride = cfg.sample_stride;
    p.trajectories = cfg.trajectories;
    p.seed = cfg.seed;
    p.workers = workers;
    return p;
}

// ME oracle matching an SSE run: 10x finer RK4 on the (possibly
// feedback-substituted) model, sampled at the same times.
MESolution reference_me(const MonitoringModel& model, const DensityMatrix& rho0,
                        const RunConfig& cfg) {
    const MonitoringModel* m = &model;
    std::optional<MonitoringModel> substituted;
    if (model.feedback()) {
        if (model.feedback()->mode != FeedbackMode::Signal)
            throw ConfigError("no closed master equation exists for "
                              "mean-field feedback");
        substituted = modified_me_params(model, model.feedback()->gain);
        m = &*substituted;
    }
    return run_me(*m, rho0, cfg.dt / 10.0, cfg.steps * 10,
                  cfg.sample_stride * 10);
}

int run_me_cmd(const CliOptions& opts) {
    RunConfig cfg = load_config(opts, ExperimentKind::Me);
    MonitoringModel model = cfg.build_model();
    const MonitoringModel* m = &model;
    std::optional<MonitoringModel> substituted;
    if (model.feedback()) {
        if (model.feedback()->mode != FeedbackMode::Signal)
            throw ConfigError("no closed master equation exists for "
                              "mean-field feedback");
        substituted = modified_me_params(model, model.feedback()->gain);
        m = &*substituted;
    }
    MESolution sol = run_me(*m, cfg.initial_a->density(), cfg.dt, cfg.steps,
                            cfg.sample_stride);
    const fs::path dir = *cfg.out_dir;
    write_time_series_csv(dir / "timeseries.csv", rows_from_me(sol));
    json s = base_summary(cfg);
    s["samples"] = sol.times.size();
    s["final_time"] = sol.times.back();
    write_summary_json(dir / "summary.json", s);
    std::cout << "me: " << sol.times.size() << " samples -> " << dir.string()
              << "\n";
    return 0;
}

int run_ensemble_cmd(const CliOptions& opts) {
    RunConfig cfg = load_config(opts, ExperimentKind::Ensemble);
    MonitoringModel model = cfg.build_model();
    std::optional<MESolution> ref;
    if (!model.feedback() || model.feedback()->mode == FeedbackMode::Signal)
        ref = reference_me(model, cfg.initial_a->density(), cfg);
    EnsembleReport rep =
        run_ensemble(model, *cfg.initial_a, ensemble_params(cfg, opts.workers),
                     ref ? &*ref : nullptr);
    const fs::path dir = *cfg.out_dir;
    write_time_series_csv(dir / "timeseries.csv", rows_from_ensemble(rep));
    json s = base_summary(cfg);
    s["trajectories"] = rep.trajectories;
    if (!rep.distance_to_reference.empty()) {
        double dmax = 0.0;
        for (double d : rep.distance_to_reference) dmax = std::max(dmax, d);
        s["max_trace_distance_to_me"] = dmax;
    }
    write_summary_json(dir / "summary.json", s);
    std::cout << "ensemble: M=" << rep.trajectories << " -> " << dir.string()
              << "\n";
    return 0;
}

int run_fwt_cmd(const CliOptions& opts) {
    RunConfig cfg = load_config(opts, ExperimentKind::Fwt);
    MonitoringModel model = cfg.build_model();
    FWTReport rep = fwt_experiment(model, *cfg.initial_a, *cfg.initial_b,
                                   ensemble_params(cfg, opts.workers));
    const fs::path dir = *cfg.out_dir;
    write_time_series_csv(dir / "timeseries.csv", rows_from_fwt(rep));
    json s = base_summary(cfg);
    s["verdict"] = to_string(rep.verdict);
    s["max_distance"] = rep.max_distance;
    s["se_at_max"] = rep.se_at_max;
    s["time_at_max"] = rep.time_at_max;
    s["bootstrap_resamples"] = rep.bootstrap_resamples;
    write_summary_json(dir / "summary.json", s);
    std::cout << "fwt verdict: " << to_string(rep.verdict)
              << " (max distance " << rep.max_distance << ", SE "
              << rep.se_at_max << ") -> " << dir.string() << "\n";
    return 0;
}

int run_grw_cmd(const CliOptions& opts) {
    RunConfig cfg = load_config(opts, ExperimentKind::Grw);
    JumpModel jm = cfg.build_jump_model();
    MESolution ref = run_grw_me(jm, cfg.initial_a->density(), cfg.dt / 10.0,
                                cfg.steps * 10, cfg.sample_stride * 10);
    JumpEnsembleReport rep =
        run_jump_ensemble(jm, *cfg.initial_a,
                          ensemble_params(cfg, opts.workers), &ref, true);
    const fs::path dir = *cfg.out_dir;
    write_time_series_csv(dir / "timeseries.csv",
                          rows_from_jump_ensemble(rep));
    write_flash_csv(dir / "flashes.csv", rep.flashes);
    json s = base_summary(cfg);
    s["trajectories"] = rep.trajectories;
    std::vector<double> counts(rep.flash_counts.begin(),
                               rep.flash_counts.end());
    const MeanSE c = mean_se(counts);
    s["flash_count_mean"] = c.mean;
    s["flash_count_se"] = c.se;
    s["flash_count_variance"] = sample_variance(counts);
    s["flash_site_histogram"] = rep.flash_site_histogram;
    double dmax = 0.0;
    for (double d : rep.distance_to_reference) dmax = std::max(dmax, d);
    s["max_trace_distance_to_me"] = dmax;
    write_summary_json(dir / "summary.json", s);
    std::cout << "grw: " << rep.flashes.size() << " flashes, mean count "
              << c.mean << " -> " << dir.string() << "\n";
    return 0;
}

int run_csl_cmd(const CliOptions& opts) {
    RunConfig cfg = load_config(opts, ExperimentKind::Csl);
    MonitoringModel model = cfg.build_model();

    // Which off-diagonal element to fit: configured, or the two largest
    // amplitudes of the initial state.
    long bi = 0, bj = 1;
    if (cfg.csl_element) {
        bi = cfg.csl_element->first;
        bj = cfg.csl_element->second;
    } else {
        const Vector& amp = cfg.initial_a->states.front().amplitudes();
        double best1 = -1.0, best2 = -1.0;
        for (Eigen::Index i = 0; i < amp.size(); ++i) {
            const double a = std::abs(amp(i));
            if (a > best1) {
                best2 = best1; bj = bi;
                best1 = a; bi = i;
            } else if (a > best2) {
                best2 = a; bj = i;
            }
        }
    }

    const double analytic =
        csl_decoherence_rate(*cfg.lattice, bi, bj);

    MESolution ref = reference_me(model, cfg.initial_a->density(), cfg);
    EnsembleReport rep = run_ensemble(
        model, *cfg.initial_a, ensemble_params(cfg, opts.workers), &ref);

    std::vector<double> me_abs, mc_abs;
    for (std::size_t s = 0; s < ref.times.size(); ++s)
        me_abs.push_back(std::abs(ref.states[s](bi, bj)));
    for (std::size_t s = 0; s < rep.times.size(); ++s)
        mc_abs.push_back(std::abs(rep.mean_states[s](bi, bj)));
    const double me_rate = fit_exponential_decay_rate(ref.times, me_abs);
    const double mc_rate = fit_exponential_decay_rate(rep.times, mc_abs);

    const fs::path dir = *cfg.out_dir;
    write_time_series_csv(dir / "timeseries.csv", rows_from_ensemble(rep));
    json s = base_summary(cfg);
    s["element"] = {bi, bj};
    s["analytic_rate"] = analytic;
    s["me_fitted_rate"] = me_rate;
    s["mc_fitted_rate"] = mc_rate;
    write_summary_json(dir / "summary.json", s);
    std::cout << "csl: analytic rate " << analytic << ", ME fit " << me_rate
              << ", MC fit " << mc_rate << " -> " << dir.string() << "\n";
    return 0;
}

int run_convergence_cmd(const CliOptions& opts) {
    RunConfig cfg = load_config(opts, ExperimentKind::Convergence);
    MonitoringModel model = cfg.build_model();
    ConvergenceReport rep = convergence_study(
        model, *cfg.initial_a, cfg.dt_list, cfg.total_time, cfg.trajectories,
        cfg.seed, opts.workers, cfg.sample_interval);
    const fs::path dir = *cfg.out_dir;
    {
        std::vector<TimeSeriesRow> rows;
        for (std::size_t i = 0; i < rep.dts.size(); ++i)
            rows.push_back({rep.dts[i], "bias", rep.bias[i], 0.0});
        write_time_series_csv(dir / "bias_table.csv", rows);
    }
    json s = base_summary(cfg);
    s["dt"] = rep.dts;
    s["bias"] = rep.bias;
    s["ratios"] = rep.ratios;
    write_summary_json(dir / "summary.json", s);
    std::cout << "convergence: ratios";
    for (double r : rep.ratios) std::cout << ' ' << r;
    std::cout << " -> " << dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum trajectory / spontaneous collapse laboratory"};
    app.require_subcommand(1);

    CliOptions opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "run configuration file")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "override the config seed");
        sub->add_option("--workers", opts.workers,
                        "worker threads (affects speed only, never results)");
    };

    auto* me = app.add_subcommand("run-me", "deterministic master equation");
    auto* ens = app.add_subcommand("run-ensemble", "SSE Monte-Carlo ensemble");
    auto* fwt = app.add_subcommand("run-fwt", "Free Will Test");
    auto* grw = app.add_subcommand("run-grw", "GRW jump unravelling");
    auto* csl = app.add_subcommand("run-csl", "CSL lattice decoherence rates");
    auto* conv = app.add_subcommand("run-convergence", "weak-order study");
    for (auto* sub : {me, ens, fwt, grw, csl, conv}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        if (me->parsed()) return run_me_cmd(opts);
        if (ens->parsed()) return run_ensemble_cmd(opts);
        if (fwt->parsed()) return run_fwt_cmd(opts);
        if (grw->parsed()) return run_grw_cmd(opts);
        if (csl->parsed()) return run_csl_cmd(opts);
        if (conv->parsed()) return run_convergence_cmd(opts);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
