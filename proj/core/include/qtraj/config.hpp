#ifndef QTRAJ_CONFIG_HPP
#define QTRAJ_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtraj/ensemble.hpp"
#include "qtraj/grw.hpp"
#include "qtraj/lattice.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

enum class ExperimentKind { Me, Ensemble, Fwt, Grw, Csl, Convergence };

const char* to_string(ExperimentKind k);

/// Validated run description parsed from a JSON config file. See
/// docs/config-schema.md for the schema.
struct RunConfig {
    ExperimentKind experiment = ExperimentKind::Me;
    nlohmann::json echo; // the config as parsed, for self-describing output

    // exactly one of: explicit model matrices, or a lattice section
    std::optional<Matrix> hamiltonian;
    std::vector<std::pair<Matrix, double>> channels; // (operator, coupling)
    std::optional<LatticeConfig> lattice;
    std::optional<FeedbackSpec> feedback;

    std::optional<Decomposition> initial_a;
    std::optional<Decomposition> initial_b; // fwt only

    double dt = 1e-3;
    long steps = 0;
    long sample_stride = 10;
    long trajectories = 0;
    std::uint64_t seed = 0;

    double jump_rate = 1.0;          // grw
    double localization_width = 1.0; // grw
    std::optional<std::pair<long, long>> csl_element; // basis pair to fit

    std::vector<double> dt_list; // convergence
    double total_time = 0.0;
    double sample_interval = 0.1;

    std::optional<std::string> out_dir;

    /// The monitoring model this config describes (explicit or CSL lattice),
    /// feedback attached.
    MonitoringModel build_model() const;
    JumpModel build_jump_model() const;
};

/// Parses and validates a JSON config. Throws ConfigError; for schema
/// violations the message lists every offending field path, not just the
/// first.
RunConfig parse_config(const std::string& text);

} // namespace qtraj

#endif
