#include "tnd/eval_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "json_fields.hpp"
#include "tnd/error.hpp"

namespace tnd {

double improvement_ratio(double acc_algo, double acc_random) {
  if (!(acc_random > 0.0))
    throw ValidationError("improvement ratio undefined: baseline accessibility is " + format_double(acc_random));
  return (acc_algo - acc_random) / acc_random;
}

namespace {

// Lentz's method for the continued fraction of I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iter = 10000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete_beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast for x < (a+1)/(a+b+2); use symmetry otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw ValidationError("degrees of freedom must be > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);  // P(T > |t|)
  return t > 0 ? 1.0 - tail : tail;
}

TTestResult one_sample_ttest(std::span<const double> samples, double h0_mean) {
  const std::size_t n = samples.size();
  if (n < 2) throw ValidationError("t-test needs at least 2 samples");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double variance = ss / static_cast<double>(n - 1);
  if (!(variance > 0.0)) throw ValidationError("t-test undefined: sample variance is zero");

  TTestResult r;
  r.n = n;
  r.mean = mean;
  r.stddev = std::sqrt(variance);
  r.t_statistic = (mean - h0_mean) / (r.stddev / std::sqrt(static_cast<double>(n)));
  const double dof = static_cast<double>(n - 1);
  // Tail probabilities straight from I_x to keep precision for large |t|.
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + r.t_statistic * r.t_statistic));
  r.p_two_sided = std::min(1.0, 2.0 * tail);
  r.p_greater = r.t_statistic > 0 ? tail : 1.0 - tail;
  r.p_less = r.t_statistic > 0 ? 1.0 - tail : tail;
  return r;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> samples) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.push_back({sorted[i], static_cast<double>(i + 1) / static_cast<double>(sorted.size())});
  return out;
}

ComparisonReport compare_runs(std::string algorithm, std::span<const double> algo_values,
                              std::span<const double> random_values) {
  if (algo_values.size() != random_values.size())
    throw ValidationError("compare_runs: trial counts differ");
  ComparisonReport report;
  report.algorithm = std::move(algorithm);
  for (std::size_t i = 0; i < algo_values.size(); ++i)
    report.ratios.push_back(improvement_ratio(algo_values[i], random_values[i]));
  report.cdf = empirical_cdf(report.ratios);
  try {
    report.ttest = one_sample_ttest(report.ratios, 0.0);
  } catch (const ValidationError&) {
    report.ttest = {};
    report.ttest.n = report.ratios.size();
    if (!report.ratios.empty()) {
      report.ttest.mean = report.ratios.front();
      report.ttest.t_statistic = std::numeric_limits<double>::quiet_NaN();
      report.ttest.p_two_sided = std::numeric_limits<double>::quiet_NaN();
      report.ttest.p_greater = std::numeric_limits<double>::quiet_NaN();
      report.ttest.p_less = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return report;
}

// --- heatmap --------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<HeatmapRow> heatmap_rows(const Scenario& scenario, const AccessibilityReport& baseline,
                                     const AccessibilityReport& improved, double q_percent) {
  if (baseline.centroid_ids != improved.centroid_ids)
    throw ValidationError("heatmap: reports cover different centroid sets");
  if (baseline.centroid_ids.size() != scenario.centroids.size())
    throw ValidationError("heatmap: reports do not match the scenario's centroids");
  std::vector<bool> worst(baseline.per_centroid.size(), false);
  for (std::size_t i : worst_set(baseline.per_centroid, baseline.centroid_ids, q_percent)) worst[i] = true;

  std::vector<HeatmapRow> rows;
  rows.reserve(scenario.centroids.size());
  for (std::size_t i = 0; i < scenario.centroids.size(); ++i) {
    const auto& c = scenario.centroids[i];
    if (c.id != baseline.centroid_ids[i]) throw ValidationError("heatmap: centroid order mismatch");
    rows.push_back({c.id, c.location.x_km, c.location.y_km, baseline.per_centroid[i],
                    improved.per_centroid[i], improved.per_centroid[i] - baseline.per_centroid[i],
                    worst[i]});
  }
  return rows;
}

std::string heatmap_csv(std::span<const HeatmapRow> rows) {
  std::string out = "centroid_id,x_km,y_km,acc_baseline,acc_improved,delta,in_worst_q\n";
  for (const auto& r : rows) {
    out += std::to_string(r.centroid_id) + ',' + format_double(r.x_km) + ',' + format_double(r.y_km) +
           ',' + format_double(r.acc_baseline) + ',' + format_double(r.acc_improved) + ',' +
           format_double(r.delta) + ',' + (r.in_worst_q ? "true" : "false") + '\n';
  }
  return out;
}

std::string heatmap_geojson(std::span<const HeatmapRow> rows, double q_percent) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& r : rows) {
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {r.x_km, r.y_km}}}},
                        {"properties",
                         {{"centroid_id", r.centroid_id},
                          {"acc_baseline", r.acc_baseline},
                          {"acc_improved", r.acc_improved},
                          {"delta", r.delta},
                          {"in_worst_q", r.in_worst_q}}}});
  }
  nlohmann::json root = {{"type", "FeatureCollection"},
                         {"metadata",
                          {{"coordinates", "planar"}, {"units", "km"}, {"quantile_percent", q_percent}}},
                         {"features", std::move(features)}};
  return root.dump(2) + "\n";
}

void export_heatmap(const Scenario& scenario, const AccessibilityReport& baseline,
                    const AccessibilityReport& improved, double q_percent,
                    const std::filesystem::path& csv_path,
                    const std::optional<std::filesystem::path>& geojson_path) {
  const auto rows = heatmap_rows(scenario, baseline, improved, q_percent);
  detail::write_text_file(csv_path, heatmap_csv(rows));
  if (geojson_path) detail::write_text_file(*geojson_path, heatmap_geojson(rows, q_percent));
}

namespace {

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("heatmap line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<HeatmapRow> read_heatmap_csv(const std::filesystem::path& path) {
  std::istringstream in(detail::read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "centroid_id,x_km,y_km,acc_baseline,acc_improved,delta,in_worst_q")
    throw ParseError("heatmap: unexpected header");
  std::vector<HeatmapRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw ParseError("heatmap line " + std::to_string(line_no) + ": expected 7 columns");
    HeatmapRow r;
    r.centroid_id = static_cast<int>(parse_double(cells[0], line_no));
    r.x_km = parse_double(cells[1], line_no);
    r.y_km = parse_double(cells[2], line_no);
    r.acc_baseline = parse_double(cells[3], line_no);
    r.acc_improved = parse_double(cells[4], line_no);
    r.delta = parse_double(cells[5], line_no);
    if (cells[6] != "true" && cells[6] != "false")
      throw ParseError("heatmap line " + std::to_string(line_no) + ": in_worst_q must be true/false");
    r.in_worst_q = cells[6] == "true";
    rows.push_back(r);
  }
  return rows;
}

}  // namespace tnd
