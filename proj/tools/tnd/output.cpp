#include "output.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tnd/error.hpp"

namespace tnd::cli {

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_json(const std::filesystem::path& path, const json& value) {
  write_text(path, value.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json lines_json(std::span<const BusLine> lines) {
  json out = json::array();
  for (const auto& l : lines)
    out.push_back({{"id", l.id}, {"stops", l.ordered_stops}, {"length_km", l.length_km},
                   {"headway_min", l.headway_min}});
  return out;
}

json assignment_json(const Scenario& scenario, const LineAssignment& state) {
  return lines_json(realize_lines(scenario, state));
}

json result_json(const Scenario& scenario, const OptimizerResult& result) {
  json out = {{"best_value", result.best_value},
              {"evaluations", result.evaluations},
              {"episodes", result.episodes},
              {"improvements", result.trajectory.size()}};
  out["lines"] = result.best_assignment ? assignment_json(scenario, *result.best_assignment) : json::array();
  return out;
}

json q_values_json(const QValues& q) {
  json out = json::array();
  for (std::size_t i = 0; i < q.actions.size(); ++i)
    out.push_back({{"stop_id", q.actions[i].stop_id},
                   {"target_line", q.actions[i].target_line + 1},
                   {"q", q.values(static_cast<Eigen::Index>(i))}});
  return out;
}

namespace {

// JSON has no NaN; undefined statistics are written as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json ttest_json(const TTestResult& t) {
  return {{"n", t.n},
          {"mean", number_or_null(t.mean)},
          {"stddev", number_or_null(t.stddev)},
          {"t_statistic", number_or_null(t.t_statistic)},
          {"p_two_sided", number_or_null(t.p_two_sided)},
          {"p_greater", number_or_null(t.p_greater)},
          {"p_less", number_or_null(t.p_less)}};
}

json comparison_json(const ComparisonReport& report) {
  json cdf = json::array();
  for (const auto& p : report.cdf) cdf.push_back({p.value, p.probability});
  return {{"algorithm", report.algorithm},
          {"ratios", report.ratios},
          {"ttest", ttest_json(report.ttest)},
          {"cdf", std::move(cdf)}};
}

std::string trajectory_jsonl(std::span<const TrajectoryPoint> points) {
  std::string out;
  for (const auto& p : points) {
    out += json{{"seconds", p.seconds}, {"evaluations", p.evaluations}, {"best_value", p.best_value}}.dump();
    out += '\n';
  }
  return out;
}

LineAssignment assignment_from_result(const std::filesystem::path& path) {
  const json doc = read_json(path);
  const json* holder = &doc;
  if (doc.is_object() && !doc.contains("lines") && doc.contains("result")) holder = &doc["result"];
  if (!holder->is_object() || !holder->contains("lines") || !(*holder)["lines"].is_array())
    throw ParseError(path.string() + ": missing field 'lines'");
  std::vector<std::vector<int>> lines;
  try {
    for (const auto& l : (*holder)["lines"]) lines.push_back(l.at("stops").get<std::vector<int>>());
  } catch (const json::exception&) {
    throw ParseError(path.string() + ": every entry of 'lines' needs an integer array 'stops'");
  }
  return LineAssignment::from_lines(lines);
}

}  // namespace tnd::cli
