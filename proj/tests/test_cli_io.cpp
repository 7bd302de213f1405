#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "qtraj/config.hpp"
#include "qtraj/results_io.hpp"

using namespace qtraj;
namespace fs = std::filesystem;

namespace {

const char* kMinimalEnsemble = R"({
  "experiment": "ensemble",
  "model": {
    "hamiltonian": [[0, 0.5], [0.5, 0]],
    "channels": [{"operator": [[1, 0], [0, -1]], "coupling": 1.0}]
  },
  "numerics": {"steps": 100},
  "ensemble": {"trajectories": 16, "seed": 5},
  "initial": {"state": [1, 0]}
})";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "qtraj_io_tests";
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QTRAJ_CLI_PATH) + " " + args +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("minimal config parses with defaults filled") {
    RunConfig cfg = parse_config(kMinimalEnsemble);
    CHECK(cfg.experiment == ExperimentKind::Ensemble);
    CHECK(cfg.dt == 1e-3);
    CHECK(cfg.sample_stride == 10);
    CHECK(cfg.steps == 100);
    CHECK(cfg.trajectories == 16);
    CHECK(cfg.seed == 5);
    REQUIRE(cfg.initial_a.has_value());
    CHECK(cfg.initial_a->states.size() == 1);
    MonitoringModel model = cfg.build_model();
    CHECK(model.dim() == 2);
    CHECK(model.channels().size() == 1);
}

TEST_CASE("schema violations carry field paths and are all reported") {
    nlohmann::json j = nlohmann::json::parse(kMinimalEnsemble);
    j["model"]["channels"][0]["coupling"] = -1.0;
    j["numerics"]["dt"] = -0.5;
    try {
        parse_config(j.dump());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("model.channels[0].coupling") != std::string::npos);
        CHECK(msg.find("numerics.dt") != std::string::npos);
    }
}

TEST_CASE("model and lattice sections are mutually exclusive") {
    nlohmann::json j = nlohmann::json::parse(kMinimalEnsemble);
    j["lattice"] = {{"n_sites", 6},
                    {"particles", {1.0}},
                    {"smearing_sigma", 1.0},
                    {"coupling", 0.5}};
    try {
        parse_config(j.dump());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("mutually exclusive") !=
              std::string::npos);
    }
}

TEST_CASE("syntax errors surface the parser position") {
    try {
        parse_config("{ \"experiment\": ");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("syntax error") != std::string::npos);
        CHECK(msg.find("line") != std::string::npos);
    }
}

TEST_CASE("complex entries and lattice initial states parse") {
    const char* text = R"({
      "experiment": "csl",
      "lattice": {"n_sites": 6, "particles": [1.0], "smearing_sigma": 1.0,
                  "coupling": 0.5},
      "numerics": {"steps": 50},
      "ensemble": {"trajectories": 8, "seed": 1},
      "initial": {"superposition_sites": [[0], [3]]}
    })";
    RunConfig cfg = parse_config(text);
    REQUIRE(cfg.lattice.has_value());
    CHECK(cfg.lattice->n_sites == 6);
    REQUIRE(cfg.initial_a.has_value());
    const auto& psi = cfg.initial_a->states[0];
    CHECK(std::abs(std::abs(psi[0]) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(std::abs(psi[3]) - 1.0 / std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("17-digit serialization round-trips exactly") {
    const double values[] = {1.0 / 3.0,  -0.0,     6.02214076e23,
                             1e-300,     123456.75, 2.2250738585072014e-308};
    for (double x : values) {
        const std::string s = format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("empty time series still writes the header") {
    const fs::path p = scratch_dir() / "empty.csv";
    write_time_series_csv(p, {});
    CHECK(slurp(p) == "time,observable,mean,se\n");
}

TEST_CASE("flash log columns") {
    const fs::path p = scratch_dir() / "flashes.csv";
    write_flash_csv(p, {{0.25, 0, 3}, {0.5, 1, 7}});
    const std::string text = slurp(p);
    CHECK(text.find("time,particle,center\n") == 0);
    CHECK(text.find("0.25,0,3") != std::string::npos);
    CHECK(text.find("0.5,1,7") != std::string::npos);
}

TEST_CASE("summary JSON round-trips its numbers exactly") {
    const fs::path p = scratch_dir() / "summary.json";
    nlohmann::json s;
    s["max_distance"] = 0.123456789012345678;
    s["bias"] = {2.0 / 3.0, 1e-17};
    s["verdict"] = "not_tangible";
    write_summary_json(p, s);
    nlohmann::json back = nlohmann::json::parse(slurp(p));
    CHECK(back["max_distance"].get<double>() ==
          s["max_distance"].get<double>());
    CHECK(back["bias"][0].get<double>() == 2.0 / 3.0);
    CHECK(back["bias"][1].get<double>() == 1e-17);
    CHECK(back["verdict"] == "not_tangible");
}

TEST_CASE("cli runs an ensemble end to end") {
    const fs::path dir = scratch_dir();
    const fs::path cfg_path = dir / "ensemble.json";
    {
        std::ofstream out(cfg_path);
        out << kMinimalEnsemble;
    }
    const fs::path out_a = dir / "run_a";
    const fs::path out_b = dir / "run_b";
    fs::remove_all(out_a);
    fs::remove_all(out_b);

    CHECK(run_cli("run-ensemble --config " + cfg_path.string() + " --out " +
                  out_a.string() + " --workers 1") == 0);
    CHECK(fs::exists(out_a / "timeseries.csv"));
    CHECK(fs::exists(out_a / "summary.json"));

    nlohmann::json summary =
        nlohmann::json::parse(slurp(out_a / "summary.json"));
    CHECK(summary["seed"] == 5);
    CHECK(summary["version"] == std::string(kVersion));
    CHECK(summary["config"]["experiment"] == "ensemble");

    // identical run at a different worker count: byte-identical output
    CHECK(run_cli("run-ensemble --config " + cfg_path.string() + " --out " +
                  out_b.string() + " --workers 3") == 0);
    CHECK(slurp(out_a / "timeseries.csv") == slurp(out_b / "timeseries.csv"));
}

TEST_CASE("cli exit codes distinguish config from runtime problems") {
    const fs::path dir = scratch_dir();
    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << "{ not json";
    }
    CHECK(run_cli("run-ensemble --config " + bad.string()) == 1);

    // wrong subcommand for the config's experiment kind
    const fs::path cfg_path = dir / "ensemble2.json";
    {
        std::ofstream out(cfg_path);
        out << kMinimalEnsemble;
    }
    CHECK(run_cli("run-me --config " + cfg_path.string()) == 1);
    CHECK(run_cli("run-ensemble --config " + (dir / "missing.json").string()) !=
          0);
}
