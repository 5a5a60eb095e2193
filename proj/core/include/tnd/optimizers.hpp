#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tnd/design_mdp.hpp"
#include "tnd/evaluator.hpp"
#include "tnd/qnet.hpp"

namespace tnd {

/// Stop condition shared by all optimizers: wall-clock seconds and, when
/// set, a cap on acc^q computations. The cap makes runs reproducible
/// independent of machine speed.
struct Budget {
  double seconds = 60.0;
  std::optional<std::size_t> max_evaluations;
};

struct TrajectoryPoint {
  double seconds = 0.0;
  std::size_t evaluations = 0;
  double best_value = 0.0;
};

struct OptimizerResult {
  double best_value = 0.0;
  std::optional<LineAssignment> best_assignment;
  std::vector<TrajectoryPoint> trajectory;  // appended on every improvement
  std::size_t evaluations = 0;
  std::size_t episodes = 0;
};

/// Tracks elapsed time, evaluation count, and the best state seen.
class SearchRecorder {
 public:
  SearchRecorder(Evaluator& evaluator, const Budget& budget);

  /// Evaluates and records; returns acc^q.
  double evaluate(const LineAssignment& state);
  bool exhausted() const;
  double elapsed_seconds() const;

  OptimizerResult& result() { return result_; }
  OptimizerResult finish();

 private:
  Evaluator& evaluator_;
  Budget budget_;
  std::size_t start_evaluations_;
  std::chrono::steady_clock::time_point start_;
  OptimizerResult result_;
};

OptimizerResult random_search(Evaluator& evaluator, const Budget& budget, std::uint64_t seed);

struct GaConfig {
  int population = 50;    // n_pop
  int parents = 10;       // n_par
  double p_mutation = 0.05;
  int tournament_size = 3;
};

void validate(const GaConfig& config);

OptimizerResult genetic_search(Evaluator& evaluator, const Budget& budget, const GaConfig& config,
                               std::uint64_t seed);

struct RlConfig {
  int stall_limit = 5;
};

struct RlTrainingOutput {
  std::vector<OptimizerResult> per_scenario;
  QNetworkParams params;
  long steps = 0;
  long updates = 0;
};

/// Online Q-learning over episodes. Each episode starts from a random
/// partition of the next scenario (round-robin), then takes epsilon-greedy
/// actions; whenever acc^q beats the episode's best so far the best is
/// raised and one SGD step on the one-step Q-learning loss is taken. An
/// episode ends after `stall_limit` consecutive non-improving steps; the
/// run ends when the budget of the first evaluator is spent. Every
/// evaluator's scenario must have the same number of lines.
RlTrainingOutput train_rl(std::span<Evaluator* const> evaluators, const Budget& budget,
                          const RlConfig& config, QNetworkParams params, std::uint64_t seed);

std::pair<OptimizerResult, QNetworkParams> train_rl(Evaluator& evaluator, const Budget& budget,
                                                    const RlConfig& config, QNetworkParams params,
                                                    std::uint64_t seed);

struct PolicyRunInfo {
  std::optional<LineAssignment> initial_state;
  /// Q-values of the admissible actions in the first state.
  QValues initial_q;
  long greedy_steps = 0;
  long random_steps = 0;
};

/// Greedy rollout with frozen weights. From the current state, admissible
/// actions are tried in decreasing Q order and the first one that raises
/// acc^q is taken. If none does (a local optimum), one uniformly random
/// admissible action is taken instead.
OptimizerResult test_policy(Evaluator& evaluator, const Budget& budget, const QNetworkParams& params,
                            std::uint64_t seed, PolicyRunInfo* info = nullptr);

struct RlSearchOptions {
  /// Share of the budget spent in train_rl before the greedy rollout.
  double train_fraction = 0.3;
  RlConfig rl;
};

struct RlSearchOutput {
  OptimizerResult result;  // best over both phases
  QNetworkParams params;   // weights used by the rollout
  PolicyRunInfo policy;
  long train_steps = 0;
  long train_updates = 0;
};

/// The RL optimizer as used for matched-budget comparisons: train_rl on the
/// scenario for `train_fraction` of the budget, then test_policy with the
/// learned weights for the remainder.
RlSearchOutput rl_search(Evaluator& evaluator, const Budget& budget, const RlSearchOptions& options,
                         QNetworkParams params, std::uint64_t seed);

/// Untrained network for a scenario, sized for its number of lines.
QNetworkParams initial_params(const Scenario& scenario, QNetConfig config, std::uint64_t seed);

}  // namespace tnd
