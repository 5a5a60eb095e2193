#pragma once

#include <atomic>
#include <cstddef>
#include <mutex>
#include <span>
#include <unordered_map>

#include "tnd/accessibility.hpp"
#include "tnd/design_mdp.hpp"

namespace tnd {

struct EvaluatorOptions {
  double q_percent = 20.0;
  unsigned threads = 1;
  std::size_t cache_capacity = 1u << 16;
  GraphOptions graph;
};

/// Shared acc^q oracle for all optimizers so that identical assignments get
/// identical values. Results are memoised per assignment; the cache is
/// flushed wholesale when it reaches capacity.
class Evaluator {
 public:
  Evaluator(const Scenario& scenario, EvaluatorOptions options = {});

  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  /// acc^q of the realised state.
  double operator()(const LineAssignment& state);

  AccessibilityReport report(const LineAssignment& state, std::span<const double> quantiles) const;

  /// Number of acc^q computations performed (cache hits excluded).
  std::size_t evaluations() const { return evaluations_.load(); }
  std::size_t cache_hits() const { return hits_.load(); }

  const Scenario& scenario() const { return scenario_; }
  double q_percent() const { return options_.q_percent; }
  const EvaluatorOptions& options() const { return options_; }

 private:
  const Scenario& scenario_;
  EvaluatorOptions options_;
  std::unordered_map<LineAssignment, double, LineAssignmentHash> cache_;
  std::mutex mutex_;
  std::atomic<std::size_t> evaluations_{0};
  std::atomic<std::size_t> hits_{0};
};

}  // namespace tnd
