#pragma once

#include <map>
#include <span>
#include <vector>

#include "tnd/territory.hpp"
#include "tnd/transit_graph.hpp"

namespace tnd {

/// Shortest travel time in minutes from a centroid to every PoI, indexed like
/// scenario.pois. Label-setting search over non-negative edge weights.
std::vector<double> shortest_travel_times(const RouterGraph& graph, std::size_t centroid_index);

/// Sum over PoIs of weight * max(0, 1 - T / t_max).
double centroid_accessibility(std::span<const double> times_min, std::span<const Poi> pois,
                              double t_max_min);

/// Accessibility of every centroid, in scenario order. `threads` > 1 splits
/// centroids across workers; results are identical for any thread count.
std::vector<double> per_centroid_accessibility(const Scenario& scenario, const RouterGraph& graph,
                                               unsigned threads = 1);

/// Number of centroids in the worst-q set: ceil(q/100 * n), at least 1.
std::size_t quantile_count(std::size_t n, double q_percent);

/// Indices (into `values`) of the ceil(q% * n) smallest values; ties are
/// broken by ascending `ids`.
std::vector<std::size_t> worst_set(std::span<const double> values, std::span<const int> ids,
                                   double q_percent);

/// Sum of the values in the worst-q set.
double quantile_accessibility(std::span<const double> values, std::span<const int> ids,
                              double q_percent);

/// Convenience overload using ids 0..n-1.
double quantile_accessibility(std::span<const double> values, double q_percent);

struct AccessibilityReport {
  std::vector<int> centroid_ids;
  std::vector<double> per_centroid;
  std::map<double, double> acc_q;
  std::map<double, std::vector<int>> worst_ids;

  double total() const;
};

AccessibilityReport make_report(const Scenario& scenario, std::vector<double> per_centroid,
                                std::span<const double> quantiles);

AccessibilityReport evaluate_report(const Scenario& scenario, const RouterGraph& graph,
                                    std::span<const double> quantiles, unsigned threads = 1);

}  // namespace tnd
