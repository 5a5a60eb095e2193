#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tnd/design_mdp.hpp"
#include "tnd/eval_stats.hpp"
#include "tnd/optimizers.hpp"
#include "tnd/qnet.hpp"

namespace tnd::cli {

using nlohmann::json;

/// Creates the directory (and parents); IoError if that fails.
void ensure_directory(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

json lines_json(std::span<const BusLine> lines);
json assignment_json(const Scenario& scenario, const LineAssignment& state);
json result_json(const Scenario& scenario, const OptimizerResult& result);
json q_values_json(const QValues& q);
json ttest_json(const TTestResult& t);
json comparison_json(const ComparisonReport& report);

/// One record per line: seconds, evaluations, best value.
std::string trajectory_jsonl(std::span<const TrajectoryPoint> points);

/// Reads the "lines" array of a result file (top level, or under "result" as
/// written by optimize) back into a partition.
LineAssignment assignment_from_result(const std::filesystem::path& path);

}  // namespace tnd::cli
