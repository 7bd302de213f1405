#ifndef QTRAJ_RESULTS_IO_HPP
#define QTRAJ_RESULTS_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtraj/ensemble.hpp"
#include "qtraj/me.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

inline constexpr const char* kVersion = "0.1.0";

struct TimeSeriesRow {
    double time = 0.0;
    std::string observable;
    double mean = 0.0;
    double se = 0.0;
};

/// 17 significant digits, round-trip exact.
std::string format_double(double x);

void write_time_series_csv(const std::filesystem::path& path,
                           const std::vector<TimeSeriesRow>& rows);

void write_flash_csv(const std::filesystem::path& path,
                     const std::vector<FlashEvent>& flashes);

/// Summary document with the config echo, seed and version stamped in.
void write_summary_json(const std::filesystem::path& path,
                        const nlohmann::json& summary);

std::vector<TimeSeriesRow> rows_from_ensemble(const EnsembleReport& report);
std::vector<TimeSeriesRow> rows_from_me(const MESolution& solution);
std::vector<TimeSeriesRow> rows_from_jump_ensemble(
    const JumpEnsembleReport& report);
std::vector<TimeSeriesRow> rows_from_fwt(const FWTReport& report);

} // namespace qtraj

#endif
