#include "tnd/accessibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "tnd/error.hpp"
#include "tnd/exact_sum.hpp"
#include "tnd/parallel.hpp"

namespace tnd {

std::vector<double> shortest_travel_times(const RouterGraph& graph, std::size_t centroid_index) {
  if (centroid_index >= graph.num_centroids())
    throw ValidationError("centroid index out of range");

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.num_nodes(), inf);
  using Label = std::pair<double, int>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;

  const int source = graph.centroid_node(centroid_index);
  dist[static_cast<std::size_t>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, node] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(node)]) continue;
    for (const Edge& e : graph.out_edges(node)) {
      const double nd = d + e.minutes;
      auto& slot = dist[static_cast<std::size_t>(e.to)];
      if (nd < slot) {
        slot = nd;
        // PoIs have no outgoing edges; no need to queue them.
        if (graph.kind(e.to) != NodeKind::poi) heap.emplace(nd, e.to);
      }
    }
  }

  std::vector<double> times(graph.num_pois());
  for (std::size_t p = 0; p < times.size(); ++p)
    times[p] = dist[static_cast<std::size_t>(graph.poi_node(p))];
  return times;
}

double centroid_accessibility(std::span<const double> times_min, std::span<const Poi> pois,
                              double t_max_min) {
  double acc = 0.0;
  for (std::size_t p = 0; p < pois.size(); ++p)
    acc += pois[p].weight * std::max(0.0, 1.0 - times_min[p] / t_max_min);
  return acc;
}

std::vector<double> per_centroid_accessibility(const Scenario& scenario, const RouterGraph& graph,
                                               unsigned threads) {
  std::vector<double> acc(scenario.centroids.size());
  parallel_for(acc.size(), threads, [&](std::size_t c) {
    const auto times = shortest_travel_times(graph, c);
    acc[c] = centroid_accessibility(times, scenario.pois, scenario.params.t_max_min);
  });
  return acc;
}

std::size_t quantile_count(std::size_t n, double q_percent) {
  if (!(q_percent > 0.0 && q_percent <= 100.0))
    throw ValidationError("quantile must be in (0, 100]");
  const double exact = q_percent * static_cast<double>(n) / 100.0;
  const auto count = static_cast<std::size_t>(std::ceil(exact));
  return std::clamp<std::size_t>(count, n == 0 ? 0 : 1, n);
}

std::vector<std::size_t> worst_set(std::span<const double> values, std::span<const int> ids,
                                   double q_percent) {
  if (values.empty()) throw ValidationError("accessibility set is empty");
  if (ids.size() != values.size()) throw ValidationError("ids and values differ in length");
  const std::size_t count = quantile_count(values.size(), q_percent);
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return ids[a] < ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), less);
  order.resize(count);
  return order;
}

double quantile_accessibility(std::span<const double> values, std::span<const int> ids,
                              double q_percent) {
  // Correctly rounded, so acc^100 equals the global sum bit for bit and
  // acc^q is monotone in q.
  ExactSum total;
  for (std::size_t i : worst_set(values, ids, q_percent)) total.add(values[i]);
  return total.value();
}

double quantile_accessibility(std::span<const double> values, double q_percent) {
  std::vector<int> ids(values.size());
  std::iota(ids.begin(), ids.end(), 0);
  return quantile_accessibility(values, ids, q_percent);
}

double AccessibilityReport::total() const { return exact_sum(per_centroid); }

AccessibilityReport make_report(const Scenario& scenario, std::vector<double> per_centroid,
                                std::span<const double> quantiles) {
  AccessibilityReport report;
  for (const auto& c : scenario.centroids) report.centroid_ids.push_back(c.id);
  if (per_centroid.size() != report.centroid_ids.size())
    throw ValidationError("per-centroid vector does not match the scenario");
  report.per_centroid = std::move(per_centroid);
  for (double q : quantiles) {
    report.acc_q[q] = quantile_accessibility(report.per_centroid, report.centroid_ids, q);
    std::vector<int> worst;
    for (std::size_t i : worst_set(report.per_centroid, report.centroid_ids, q))
      worst.push_back(report.centroid_ids[i]);
    report.worst_ids[q] = std::move(worst);
  }
  return report;
}

AccessibilityReport evaluate_report(const Scenario& scenario, const RouterGraph& graph,
                                    std::span<const double> quantiles, unsigned threads) {
  return make_report(scenario, per_centroid_accessibility(scenario, graph, threads), quantiles);
}

}  // namespace tnd
