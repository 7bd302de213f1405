#include "qtraj/config.hpp"

#include <cmath>
#include <sstream>

namespace qtraj {

using nlohmann::json;

namespace {

class Validator {
  public:
    void error(const std::string& path, const std::string& msg) {
        errors_.push_back(path + ": " + msg);
    }
    bool ok() const { return errors_.empty(); }
    void finish() const {
        if (errors_.empty()) return;
        std::ostringstream out;
        out << "invalid config (" << errors_.size() << " error"
            << (errors_.size() == 1 ? "" : "s") << "):";
        for (const auto& e : errors_) out << "\n  " << e;
        throw ConfigError(out.str());
    }

  private:
    std::vector<std::string> errors_;
};

std::optional<Complex> parse_scalar(const json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex(j[0].get<double>(), j[1].get<double>());
    return std::nullopt;
}

std::optional<Matrix> parse_matrix(const json& j, const std::string& path,
                                   Validator& v) {
    if (!j.is_array() || j.empty()) {
        v.error(path, "expected a non-empty array of rows");
        return std::nullopt;
    }
    const std::size_t n = j.size();
    Matrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!j[r].is_array() || j[r].size() != n) {
            v.error(path + "[" + std::to_string(r) + "]",
                    "expected a row of length " + std::to_string(n));
            return std::nullopt;
        }
        for (std::size_t c = 0; c < n; ++c) {
            auto s = parse_scalar(j[r][c]);
            if (!s) {
                v.error(path + "[" + std::to_string(r) + "][" +
                            std::to_string(c) + "]",
                        "expected a number or [re, im] pair");
                return std::nullopt;
            }
            m(r, c) = *s;
        }
    }
    return m;
}

std::optional<Vector> parse_state_vector(const json& j, const std::string& path,
                                         Validator& v) {
    if (!j.is_array() || j.size() < 2) {
        v.error(path, "expected an amplitude array of length >= 2");
        return std::nullopt;
    }
    Vector vec(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        auto s = parse_scalar(j[i]);
        if (!s) {
            v.error(path + "[" + std::to_string(i) + "]",
                    "expected a number or [re, im] pair");
            return std::nullopt;
        }
        vec(i) = *s;
    }
    if (vec.norm() < 1e-14) {
        v.error(path, "state has zero norm");
        return std::nullopt;
    }
    return vec;
}

// "initial": {"state": [...]} or {"decomposition": [{"weight": w, "state":
// [...]}, ...]}; with a lattice, {"sites": [s_p...]} or {"superposition_sites":
// [[s_p...], ...]} are also accepted.
std::optional<Decomposition>
parse_initial(const json& j, const std::string& path, Validator& v,
              const std::optional<LatticeConfig>& lattice) {
    if (!j.is_object()) {
        v.error(path, "expected an object");
        return std::nullopt;
    }
    auto product_state = [&](const json& sites,
                             const std::string& p) -> std::optional<Vector> {
        if (!lattice) {
            v.error(p, "site-based initial states need a lattice section");
            return std::nullopt;
        }
        if (!sites.is_array() ||
            sites.size() != std::size_t(lattice->particles())) {
            v.error(p, "expected one site per particle");
            return std::nullopt;
        }
        std::vector<int> s;
        for (const auto& e : sites) {
            if (!e.is_number_integer() || e.get<int>() < 0 ||
                e.get<int>() >= lattice->n_sites) {
                v.error(p, "site index out of range");
                return std::nullopt;
            }
            s.push_back(e.get<int>());
        }
        Vector vec = Vector::Zero(lattice->dim());
        vec(basis_index(*lattice, s)) = 1.0;
        return vec;
    };

    std::vector<Vector> states;
    std::vector<double> weights;
    if (j.contains("state")) {
        auto s = parse_state_vector(j["state"], path + ".state", v);
        if (!s) return std::nullopt;
        states.push_back(std::move(*s));
        weights.push_back(1.0);
    } else if (j.contains("sites")) {
        auto s = product_state(j["sites"], path + ".sites");
        if (!s) return std::nullopt;
        states.push_back(std::move(*s));
        weights.push_back(1.0);
    } else if (j.contains("superposition_sites")) {
        const auto& arr = j["superposition_sites"];
        if (!arr.is_array() || arr.size() < 2) {
            v.error(path + ".superposition_sites",
                    "expected >= 2 site tuples");
            return std::nullopt;
        }
        Vector vec;
        bool first = true;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            auto s = product_state(arr[i], path + ".superposition_sites[" +
                                               std::to_string(i) + "]");
            if (!s) return std::nullopt;
            if (first) {
                vec = *s;
                first = false;
            } else {
                vec += *s;
            }
        }
        states.push_back(std::move(vec));
        weights.push_back(1.0);
    } else if (j.contains("decomposition")) {
        const auto& arr = j["decomposition"];
        if (!arr.is_array() || arr.empty()) {
            v.error(path + ".decomposition", "expected a non-empty array");
            return std::nullopt;
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p =
                path + ".decomposition[" + std::to_string(i) + "]";
            if (!arr[i].is_object() || !arr[i].contains("weight") ||
                !arr[i].contains("state") || !arr[i]["weight"].is_number()) {
                v.error(p, "expected {weight, state}");
                return std::nullopt;
            }
            const double w = arr[i]["weight"].get<double>();
            if (w < 0.0) {
                v.error(p + ".weight", "must be >= 0");
                return std::nullopt;
            }
            auto s = parse_state_vector(arr[i]["state"], p + ".state", v);
            if (!s) return std::nullopt;
            weights.push_back(w);
            states.push_back(std::move(*s));
        }
    } else {
        v.error(path, "expected one of: state, sites, superposition_sites, "
                      "decomposition");
        return std::nullopt;
    }

    Decomposition d;
    try {
        for (auto& s : states) d.states.emplace_back(std::move(s));
        d.weights = std::move(weights);
        d.validate();
    } catch (const Error& e) {
        v.error(path, e.what());
        return std::nullopt;
    }
    return d;
}

} // namespace

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Me: return "me";
        case ExperimentKind::Ensemble: return "ensemble";
        case ExperimentKind::Fwt: return "fwt";
        case ExperimentKind::Grw: return "grw";
        case ExperimentKind::Csl: return "csl";
        default: return "convergence";
    }
}

MonitoringModel RunConfig::build_model() const {
    if (lattice) return make_csl_model(*lattice, std::nullopt, feedback);
    std::vector<Channel> chans;
    for (const auto& [op, coupling] : channels)
        chans.push_back({HermitianOperator(op), coupling});
    return MonitoringModel(HermitianOperator(*hamiltonian), std::move(chans),
                           feedback);
}

JumpModel RunConfig::build_jump_model() const {
    if (!lattice) throw ConfigError("grw experiment requires a lattice section");
    JumpModel jm{HermitianOperator::zero(lattice->dim()), jump_rate,
                 localization_width, *lattice};
    jm.validate();
    return jm;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");

    Validator v;
    RunConfig cfg;
    cfg.echo = j;

    // experiment
    if (!j.contains("experiment") || !j["experiment"].is_string()) {
        v.error("experiment", "required string, one of me | ensemble | fwt | "
                              "grw | csl | convergence");
    } else {
        const std::string e = j["experiment"].get<std::string>();
        if (e == "me") cfg.experiment = ExperimentKind::Me;
        else if (e == "ensemble") cfg.experiment = ExperimentKind::Ensemble;
        else if (e == "fwt") cfg.experiment = ExperimentKind::Fwt;
        else if (e == "grw") cfg.experiment = ExperimentKind::Grw;
        else if (e == "csl") cfg.experiment = ExperimentKind::Csl;
        else if (e == "convergence")
            cfg.experiment = ExperimentKind::Convergence;
        else v.error("experiment", "unknown kind '" + e + "'");
    }

    // lattice
    if (j.contains("lattice")) {
        const auto& l = j["lattice"];
        if (!l.is_object()) {
            v.error("lattice", "expected an object");
        } else {
            LatticeConfig lc;
            if (l.contains("n_sites") && l["n_sites"].is_number_integer())
                lc.n_sites = l["n_sites"].get<int>();
            else v.error("lattice.n_sites", "required integer");
            if (l.contains("particles") && l["particles"].is_array()) {
                for (const auto& m : l["particles"]) {
                    if (!m.is_number())
                        v.error("lattice.particles", "masses must be numbers");
                    else lc.particle_masses.push_back(m.get<double>());
                }
            } else {
                v.error("lattice.particles", "required array of masses");
            }
            if (l.contains("smearing_sigma") &&
                l["smearing_sigma"].is_number())
                lc.smearing_sigma = l["smearing_sigma"].get<double>();
            if (l.contains("coupling") && l["coupling"].is_number())
                lc.gamma_over_m0sq = l["coupling"].get<double>();
            if (v.ok()) {
                try {
                    lc.validate();
                    cfg.lattice = lc;
                } catch (const Error& e) {
                    v.error("lattice", e.what());
                }
            }
        }
    }

    // explicit model
    if (j.contains("model")) {
        if (cfg.lattice)
            v.error("model", "mutually exclusive with the lattice section");
        const auto& m = j["model"];
        if (!m.is_object()) {
            v.error("model", "expected an object");
        } else {
            if (m.contains("hamiltonian"))
                cfg.hamiltonian =
                    parse_matrix(m["hamiltonian"], "model.hamiltonian", v);
            else v.error("model.hamiltonian", "required matrix");
            if (m.contains("channels") && m["channels"].is_array()) {
                const auto& chans = m["channels"];
                for (std::size_t k = 0; k < chans.size(); ++k) {
                    const std::string p =
                        "model.channels[" + std::to_string(k) + "]";
                    if (!chans[k].is_object() ||
                        !chans[k].contains("operator")) {
                        v.error(p, "expected {operator, coupling}");
                        continue;
                    }
                    auto op = parse_matrix(chans[k]["operator"],
                                           p + ".operator", v);
                    double coupling = 0.0;
                    if (!chans[k].contains("coupling") ||
                        !chans[k]["coupling"].is_number())
                        v.error(p + ".coupling", "required number");
                    else coupling = chans[k]["coupling"].get<double>();
                    if (coupling < 0.0)
                        v.error(p + ".coupling", "must be >= 0");
                    if (op) cfg.channels.emplace_back(std::move(*op), coupling);
                }
            } else {
                v.error("model.channels", "required array");
            }
            if (cfg.hamiltonian) {
                if ((*cfg.hamiltonian -
                     cfg.hamiltonian->adjoint()).cwiseAbs().maxCoeff() > 1e-12)
                    v.error("model.hamiltonian", "not Hermitian");
                for (std::size_t k = 0; k < cfg.channels.size(); ++k) {
                    const auto& op = cfg.channels[k].first;
                    if (op.rows() != cfg.hamiltonian->rows())
                        v.error("model.channels[" + std::to_string(k) +
                                    "].operator",
                                "dimension differs from hamiltonian");
                    else if ((op - op.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
                        v.error("model.channels[" + std::to_string(k) +
                                    "].operator",
                                "not Hermitian");
                }
            }
        }
    } else if (!cfg.lattice) {
        v.error("model", "either a model or a lattice section is required");
    }

    // feedback
    if (j.contains("feedback")) {
        const auto& f = j["feedback"];
        if (!f.is_object()) {
            v.error("feedback", "expected an object");
        } else {
            FeedbackSpec spec;
            const std::string mode =
                f.value("mode", std::string(""));
            if (mode == "signal") spec.mode = FeedbackMode::Signal;
            else if (mode == "mean_field") spec.mode = FeedbackMode::MeanField;
            else v.error("feedback.mode", "must be signal or mean_field");
            if (f.contains("gain") && f["gain"].is_number() &&
                std::isfinite(f["gain"].get<double>()))
                spec.gain = f["gain"].get<double>();
            else v.error("feedback.gain", "required finite number");
            if (f.contains("channels") && f["channels"].is_array() &&
                !f["channels"].empty()) {
                for (const auto& c : f["channels"]) {
                    if (!c.is_number_integer() || c.get<long>() < 0)
                        v.error("feedback.channels",
                                "indices must be nonnegative integers");
                    else spec.channels.push_back(c.get<std::size_t>());
                }
            } else {
                v.error("feedback.channels", "required non-empty array");
            }
            if (v.ok()) cfg.feedback = std::move(spec);
        }
    }

    // numerics
    if (j.contains("numerics")) {
        const auto& n = j["numerics"];
        if (n.contains("dt")) {
            if (!n["dt"].is_number() || !(n["dt"].get<double>() > 0.0))
                v.error("numerics.dt", "must be a number > 0");
            else cfg.dt = n["dt"].get<double>();
        }
        if (n.contains("steps")) {
            if (!n["steps"].is_number_integer() || n["steps"].get<long>() < 1)
                v.error("numerics.steps", "must be an integer >= 1");
            else cfg.steps = n["steps"].get<long>();
        }
        if (n.contains("sample_stride")) {
            if (!n["sample_stride"].is_number_integer() ||
                n["sample_stride"].get<long>() < 1)
                v.error("numerics.sample_stride", "must be an integer >= 1");
            else cfg.sample_stride = n["sample_stride"].get<long>();
        }
    }
    if (cfg.steps == 0 && cfg.experiment != ExperimentKind::Convergence)
        v.error("numerics.steps", "required integer >= 1");

    // ensemble
    if (j.contains("ensemble")) {
        const auto& e = j["ensemble"];
        if (e.contains("trajectories")) {
            if (!e["trajectories"].is_number_integer() ||
                e["trajectories"].get<long>() < 2)
                v.error("ensemble.trajectories", "must be an integer >= 2");
            else cfg.trajectories = e["trajectories"].get<long>();
        }
        if (e.contains("seed")) {
            if (!e["seed"].is_number_integer())
                v.error("ensemble.seed", "must be an integer");
            else cfg.seed = e["seed"].get<std::uint64_t>();
        }
    }

    // grw
    if (j.contains("grw")) {
        const auto& g = j["grw"];
        if (g.contains("jump_rate")) {
            if (!g["jump_rate"].is_number() ||
                g["jump_rate"].get<double>() < 0.0)
                v.error("grw.jump_rate", "must be a number >= 0");
            else cfg.jump_rate = g["jump_rate"].get<double>();
        }
        if (g.contains("localization_width")) {
            if (!g["localization_width"].is_number() ||
                !(g["localization_width"].get<double>() > 0.0))
                v.error("grw.localization_width", "must be a number > 0");
            else cfg.localization_width =
                     g["localization_width"].get<double>();
        }
    }

    // csl
    if (j.contains("csl") && j["csl"].contains("element")) {
        const auto& e = j["csl"]["element"];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer())
            v.error("csl.element", "expected a pair of basis indices");
        else cfg.csl_element = {e[0].get<long>(), e[1].get<long>()};
    }

    // convergence
    if (j.contains("convergence")) {
        const auto& c = j["convergence"];
        if (c.contains("dt_list") && c["dt_list"].is_array()) {
            for (const auto& d : c["dt_list"]) {
                if (!d.is_number() || !(d.get<double>() > 0.0))
                    v.error("convergence.dt_list", "entries must be > 0");
                else cfg.dt_list.push_back(d.get<double>());
            }
            for (std::size_t i = 1; i < cfg.dt_list.size(); ++i)
                if (!(cfg.dt_list[i] < cfg.dt_list[i - 1]))
                    v.error("convergence.dt_list", "must be descending");
        }
        if (c.contains("total_time") && c["total_time"].is_number())
            cfg.total_time = c["total_time"].get<double>();
        if (c.contains("sample_interval") && c["sample_interval"].is_number())
            cfg.sample_interval = c["sample_interval"].get<double>();
    }

    // initial states
    const std::string init_key =
        cfg.experiment == ExperimentKind::Fwt ? "initial_a" : "initial";
    if (j.contains(init_key))
        cfg.initial_a = parse_initial(j[init_key], init_key, v, cfg.lattice);
    else if (j.contains("initial") &&
             cfg.experiment == ExperimentKind::Fwt)
        v.error("initial_a", "fwt experiments use initial_a and initial_b");
    else
        v.error(init_key, "required");
    if (cfg.experiment == ExperimentKind::Fwt) {
        if (j.contains("initial_b"))
            cfg.initial_b =
                parse_initial(j["initial_b"], "initial_b", v, cfg.lattice);
        else v.error("initial_b", "required for fwt");
    }

    // output
    if (j.contains("output") && j["output"].contains("dir")) {
        if (!j["output"]["dir"].is_string())
            v.error("output.dir", "must be a string");
        else cfg.out_dir = j["output"]["dir"].get<std::string>();
    }

    // per-experiment requirements
    switch (cfg.experiment) {
        case ExperimentKind::Me:
            break;
        case ExperimentKind::Ensemble:
        case ExperimentKind::Csl:
            if (cfg.trajectories < 2)
                v.error("ensemble.trajectories", "required integer >= 2");
            break;
        case ExperimentKind::Fwt:
            if (cfg.trajectories < 2)
                v.error("ensemble.trajectories", "required integer >= 2");
            if (!cfg.feedback)
                v.error("feedback", "required for fwt experiments");
            break;
        case ExperimentKind::Grw:
            if (cfg.trajectories < 2)
                v.error("ensemble.trajectories", "required integer >= 2");
            if (!cfg.lattice)
                v.error("lattice", "required for grw experiments");
            break;
        case ExperimentKind::Convergence:
            if (cfg.trajectories < 2)
                v.error("ensemble.trajectories", "required integer >= 2");
            if (cfg.dt_list.size() < 2)
                v.error("convergence.dt_list", "need >= 2 descending entries");
            if (!(cfg.total_time > 0.0))
                v.error("convergence.total_time", "required number > 0");
            break;
    }
    if (cfg.experiment == ExperimentKind::Csl && !cfg.lattice)
        v.error("lattice", "required for csl experiments");

    // dimension cross-checks
    if (v.ok()) {
        const Eigen::Index dim =
            cfg.lattice ? cfg.lattice->dim() : cfg.hamiltonian->rows();
        if (cfg.initial_a)
            for (const auto& s : cfg.initial_a->states)
                if (s.dim() != dim)
                    v.error(init_key, "state dimension " +
                                          std::to_string(s.dim()) +
                                          " does not match model dim " +
                                          std::to_string(dim));
        if (cfg.initial_b)
            for (const auto& s : cfg.initial_b->states)
                if (s.dim() != dim)
                    v.error("initial_b", "state dimension mismatch");
        if (cfg.feedback)
            for (std::size_t k : cfg.feedback->channels) {
                const std::size_t nch = cfg.lattice
                                            ? std::size_t(cfg.lattice->n_sites)
                                            : cfg.channels.size();
                if (k >= nch)
                    v.error("feedback.channels",
                            "index " + std::to_string(k) + " out of range");
            }
        if (cfg.csl_element) {
            if (cfg.csl_element->first < 0 || cfg.csl_element->first >= dim ||
                cfg.csl_element->second < 0 || cfg.csl_element->second >= dim)
                v.error("csl.element", "basis index out of range");
        }
    }

    v.finish();
    return cfg;
}

} // namespace qtraj
