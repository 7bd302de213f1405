#include "qtraj/results_io.hpp"

#include <cstdio>
#include <fstream>

namespace qtraj {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open for writing: " + path.string());
    return out;
}

} // namespace

void write_time_series_csv(const std::filesystem::path& path,
                           const std::vector<TimeSeriesRow>& rows) {
    auto out = open_for_write(path);
    out << "time,observable,mean,se\n";
    for (const auto& r : rows)
        out << format_double(r.time) << ',' << r.observable << ','
            << format_double(r.mean) << ',' << format_double(r.se) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void write_flash_csv(const std::filesystem::path& path,
                     const std::vector<FlashEvent>& flashes) {
    auto out = open_for_write(path);
    out << "time,particle,center\n";
    for (const auto& f : flashes)
        out << format_double(f.time) << ',' << f.particle << ',' << f.center
            << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void write_summary_json(const std::filesystem::path& path,
                        const nlohmann::json& summary) {
    auto out = open_for_write(path);
    out << summary.dump(2) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

namespace {

void append_state_rows(std::vector<TimeSeriesRow>& rows, double t,
                       const Matrix& rho) {
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            const std::string id =
                std::to_string(i) + "_" + std::to_string(j);
            rows.push_back({t, "rho_re_" + id, rho(i, j).real(), 0.0});
            if (i != j)
                rows.push_back({t, "rho_im_" + id, rho(i, j).imag(), 0.0});
        }
}

} // namespace

std::vector<TimeSeriesRow> rows_from_ensemble(const EnsembleReport& report) {
    std::vector<TimeSeriesRow> rows;
    for (std::size_t s = 0; s < report.times.size(); ++s) {
        const double t = report.times[s];
        for (std::size_t k = 0; k < report.channel_expectations.size(); ++k) {
            const auto& e = report.channel_expectations[k][s];
            rows.push_back({t, "exp_L" + std::to_string(k), e.mean, e.se});
        }
        append_state_rows(rows, t, report.mean_states[s]);
        if (!report.distance_to_reference.empty())
            rows.push_back({t, "trace_distance_to_me",
                            report.distance_to_reference[s], 0.0});
    }
    return rows;
}

std::vector<TimeSeriesRow> rows_from_me(const MESolution& solution) {
    std::vector<TimeSeriesRow> rows;
    for (std::size_t s = 0; s < solution.times.size(); ++s)
        append_state_rows(rows, solution.times[s], solution.states[s]);
    return rows;
}

std::vector<TimeSeriesRow>
rows_from_jump_ensemble(const JumpEnsembleReport& report) {
    std::vector<TimeSeriesRow> rows;
    for (std::size_t s = 0; s < report.times.size(); ++s) {
        append_state_rows(rows, report.times[s], report.mean_states[s]);
        if (!report.distance_to_reference.empty())
            rows.push_back({report.times[s], "trace_distance_to_me",
                            report.distance_to_reference[s], 0.0});
    }
    return rows;
}

std::vector<TimeSeriesRow> rows_from_fwt(const FWTReport& report) {
    std::vector<TimeSeriesRow> rows;
    for (std::size_t s = 0; s < report.times.size(); ++s)
        rows.push_back({report.times[s], "trace_distance_ab",
                        report.distance[s], report.bootstrap_se[s]});
    return rows;
}

} // namespace qtraj
