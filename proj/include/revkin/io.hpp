#pragma once

// Serialization: configuration JSON, TAC / trajectory / whole-blood CSV,
// and JSON forms of the report types. Floats are written with 17
// significant digits so every file round-trips exactly.

#include <filesystem>
#include <string>

#include "revkin/estimation.hpp"
#include "revkin/identifiability.hpp"
#include "revkin/model.hpp"
#include "revkin/oracle.hpp"
#include "revkin/polyexp.hpp"

namespace revkin::io {

// -- Configuration JSON -----------------------------------------------------
// {"input": {"terms": [{"lambda": f, "mu": f}, ...]},
//  "regions": [{"id": "...", "K1": f, "k2": f, "k3": f, "k4": f}, ...]}

Configuration configuration_from_json(const std::string& text);
Configuration read_configuration(const std::filesystem::path& path);
std::string configuration_to_json(const Configuration& config);
void write_configuration(const Configuration& config, const std::filesystem::path& path);

// -- TAC table CSV ------------------------------------------------------
// Header `region_id,time_min,value`, rows grouped by region in table order.
// Whole-blood samples go to a sidecar CSV with header `time_min,cwb`.

std::string tac_table_to_csv(const TacTable& table);
TacTable tac_table_from_csv(const std::string& text);
void write_tac_table(const TacTable& table, const std::filesystem::path& path);
TacTable read_tac_table(const std::filesystem::path& path);

std::string wb_samples_to_csv(const std::vector<WbSample>& samples);
std::vector<WbSample> wb_samples_from_csv(const std::string& text);
void write_wb_samples(const std::vector<WbSample>& samples, const std::filesystem::path& path);
std::vector<WbSample> read_wb_samples(const std::filesystem::path& path);

// -- Trajectory CSV: `time_min,cf,cb,ct` --------------------------------

std::string trajectory_to_csv(const Trajectory& trajectory);
void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);

// -- Exponential-polynomial sums ----------------------------------------
// {"terms": [{"exponent": f, "coeffs": [f, ...]}, ...]}

std::string expsum_to_json(const ExpPolySum& sum);
ExpPolySum expsum_from_json(const std::string& text);

// -- Reports (stable field order) ----------------------------------------

std::string richness_report_to_json(const RichnessReport& report);
std::string equivalence_report_to_json(const EquivalenceReport& report);
std::string fit_result_to_json(const FitResult& result);
std::string uniqueness_report_to_json(const UniquenessReport& report);

/// `start,iter,sse` rows of a fit's optimization trace.
std::string fit_trace_to_csv(const std::vector<StartTracePoint>& trace);

/// Writes text to path atomically (temp file in the same directory, then
/// rename). Parent directories must exist.
void write_text_atomic(const std::string& text, const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Shortest text for `value` that parses back to exactly the same double
/// (17 significant digits).
std::string format_double(double value);

}  // namespace revkin::io
