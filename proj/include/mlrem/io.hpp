#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mlrem/dataset.hpp"
#include "mlrem/em.hpp"
#include "mlrem/metrics.hpp"
#include "mlrem/model.hpp"

namespace mlrem {

using Json = nlohmann::json;

// MixtureParams <-> {"betas": [[...], ...], "weights": [...], "sigma": s}.
// `where` prefixes field names in error messages, e.g. "truth".
Json params_to_json(const MixtureParams& params);
MixtureParams params_from_json(const Json& j, std::string_view where = "params");

Json state_to_json(const EMState& state);
Json matched_error_to_json(const MatchedError& err);
Json event_stats_to_json(const EventStats& stats);
Json condition_report_to_json(const ConditionReport& report);

/// Binary dataset container, all fields little-endian:
///   "MLRDATA1" | u64 n | u64 d | u64 seed | u8 has_labels |
///   f64 design[n*d] (row-major) | f64 response[n] | i32 labels[n] (if present)
void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

/// CSV with header "x0,...,x{d-1},y[,label]"; shortest round-trip decimals.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// One row per (iteration, component):
///   iter,component,beta_0..beta_{d-1},pi[,matched_error],degenerate_flag,estimator
/// matched_error is the per-component error under the permutation frozen at
/// iteration 0 and is written only when `truth` is given.
void write_trace_csv(std::ostream& out, const RunTrace& trace, const MixtureParams* truth, std::string_view estimator);

/// Shortest decimal that parses back to the same double ('.' separator).
std::string format_double(double value);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace mlrem
