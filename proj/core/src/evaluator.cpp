#include "tnd/evaluator.hpp"

#include "tnd/error.hpp"

namespace tnd {

Evaluator::Evaluator(const Scenario& scenario, EvaluatorOptions options)
    : scenario_(scenario), options_(options) {
  quantile_count(scenario.centroids.size(), options_.q_percent);  // validates q
}

double Evaluator::operator()(const LineAssignment& state) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(state);
    if (it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  const auto realized = realize_state(scenario_, state, options_.graph);
  const auto acc = per_centroid_accessibility(scenario_, realized.graph, options_.threads);
  std::vector<int> ids;
  ids.reserve(scenario_.centroids.size());
  for (const auto& c : scenario_.centroids) ids.push_back(c.id);
  const double value = quantile_accessibility(acc, ids, options_.q_percent);
  ++evaluations_;

  std::lock_guard lock(mutex_);
  if (cache_.size() >= options_.cache_capacity) cache_.clear();
  cache_.emplace(state, value);
  return value;
}

AccessibilityReport Evaluator::report(const LineAssignment& state,
                                      std::span<const double> quantiles) const {
  const auto realized = realize_state(scenario_, state, options_.graph);
  return evaluate_report(scenario_, realized.graph, quantiles, options_.threads);
}

}  // namespace tnd
