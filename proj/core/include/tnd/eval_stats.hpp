#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnd/accessibility.hpp"
#include "tnd/territory.hpp"

namespace tnd {

/// (acc_algo - acc_random) / acc_random. Throws ValidationError if
/// acc_random <= 0.
double improvement_ratio(double acc_algo, double acc_random);

/// Regularised incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

struct TTestResult {
  double t_statistic = 0.0;
  double p_two_sided = 1.0;
  double p_greater = 0.5;  // H1: mean > h0
  double p_less = 0.5;     // H1: mean < h0
  double mean = 0.0;
  double stddev = 0.0;     // sample standard deviation (n - 1)
  std::size_t n = 0;
};

/// One-sample Student t-test. Needs n >= 2 and a non-zero sample variance
/// (ValidationError otherwise).
TTestResult one_sample_ttest(std::span<const double> samples, double h0_mean);

struct CdfPoint {
  double value = 0.0;
  double probability = 0.0;
};

/// Empirical CDF: sorted samples, the i-th (0-based) with P = (i + 1) / n.
std::vector<CdfPoint> empirical_cdf(std::span<const double> samples);

struct ComparisonReport {
  std::string algorithm;
  std::vector<double> ratios;
  TTestResult ttest;
  std::vector<CdfPoint> cdf;
};

/// Ratios R_i = improvement_ratio(algo[i], random[i]) and their t-test
/// against mean 0. When the t-test is undefined (fewer than two ratios or
/// zero variance) only `n` and `mean` are set and the statistics are NaN.
ComparisonReport compare_runs(std::string algorithm, std::span<const double> algo_values,
                              std::span<const double> random_values);

struct HeatmapRow {
  int centroid_id = 0;
  double x_km = 0.0;
  double y_km = 0.0;
  double acc_baseline = 0.0;
  double acc_improved = 0.0;
  double delta = 0.0;
  bool in_worst_q = false;

  friend bool operator==(const HeatmapRow&, const HeatmapRow&) = default;
};

/// One row per centroid; in_worst_q marks the baseline's worst-q set.
std::vector<HeatmapRow> heatmap_rows(const Scenario& scenario, const AccessibilityReport& baseline,
                                     const AccessibilityReport& improved, double q_percent);

/// Writes the CSV (and the GeoJSON mirror when `geojson_path` is set).
void export_heatmap(const Scenario& scenario, const AccessibilityReport& baseline,
                    const AccessibilityReport& improved, double q_percent,
                    const std::filesystem::path& csv_path,
                    const std::optional<std::filesystem::path>& geojson_path = std::nullopt);

std::string heatmap_csv(std::span<const HeatmapRow> rows);
std::vector<HeatmapRow> read_heatmap_csv(const std::filesystem::path& path);
std::string heatmap_geojson(std::span<const HeatmapRow> rows, double q_percent);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

}  // namespace tnd
