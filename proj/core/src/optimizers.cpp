#include "tnd/optimizers.hpp"

#include <algorithm>
#include <numeric>

#include "tnd/error.hpp"
#include "tnd/features.hpp"
#include "tnd/genome.hpp"

namespace tnd {

SearchRecorder::SearchRecorder(Evaluator& evaluator, const Budget& budget)
    : evaluator_(evaluator),
      budget_(budget),
      start_evaluations_(evaluator.evaluations()),
      start_(std::chrono::steady_clock::now()) {}

double SearchRecorder::elapsed_seconds() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool SearchRecorder::exhausted() const {
  if (budget_.max_evaluations &&
      evaluator_.evaluations() - start_evaluations_ >= *budget_.max_evaluations)
    return true;
  return elapsed_seconds() >= budget_.seconds;
}

double SearchRecorder::evaluate(const LineAssignment& state) {
  const double value = evaluator_(state);
  if (!result_.best_assignment || value > result_.best_value) {
    result_.best_value = value;
    result_.best_assignment = state;
    result_.trajectory.push_back({elapsed_seconds(), evaluator_.evaluations() - start_evaluations_, value});
  }
  return value;
}

OptimizerResult SearchRecorder::finish() {
  result_.evaluations = evaluator_.evaluations() - start_evaluations_;
  return std::move(result_);
}

OptimizerResult random_search(Evaluator& evaluator, const Budget& budget, std::uint64_t seed) {
  SearchRecorder rec(evaluator, budget);
  Rng rng = Rng(seed).derive("random-search");
  do {
    rec.evaluate(random_state(evaluator.scenario(), rng));
    ++rec.result().episodes;
  } while (!rec.exhausted());
  return rec.finish();
}

// --- genetic algorithm ----------------------------------------------------

void validate(const GaConfig& c) {
  if (c.population < 2) throw ValidationError("GA population must be >= 2");
  if (c.parents < 2 || c.parents > c.population)
    throw ValidationError("GA parents must satisfy 2 <= n_par <= n_pop");
  if (!(c.p_mutation >= 0.0 && c.p_mutation <= 1.0)) throw ValidationError("P_mut must be in [0, 1]");
  if (c.tournament_size < 1) throw ValidationError("tournament size must be >= 1");
}

namespace {

struct Individual {
  Genome genome;
  double fitness = 0.0;
};

// Decodes, sorts each line into riding order and writes that order back.
LineAssignment normalise(const Scenario& scenario, Genome& genome, int num_lines) {
  auto state = decode(genome, num_lines);
  const auto lines = realize_lines(scenario, state);
  std::vector<std::vector<int>> sorted;
  sorted.reserve(lines.size());
  for (const auto& l : lines) sorted.push_back(l.ordered_stops);
  sort_segments(genome, sorted);
  return state;
}

}  // namespace

OptimizerResult genetic_search(Evaluator& evaluator, const Budget& budget, const GaConfig& cfg,
                               std::uint64_t seed) {
  validate(cfg);
  const Scenario& scenario = evaluator.scenario();
  const int k = scenario.params.num_lines;
  SearchRecorder rec(evaluator, budget);
  const Rng root = Rng(seed).derive("genetic-search");

  std::vector<Individual> population;
  Rng init_rng = root.derive("init");
  for (int i = 0; i < cfg.population && (i == 0 || !rec.exhausted()); ++i) {
    Individual ind;
    ind.genome = genome_from_state(random_state(scenario, init_rng));
    const auto state = normalise(scenario, ind.genome, k);
    ind.fitness = rec.evaluate(state);
    population.push_back(std::move(ind));
  }

  for (std::uint64_t generation = 1; !rec.exhausted(); ++generation) {
    ++rec.result().episodes;
    Rng select_rng = root.derive("select", generation);
    std::vector<const Individual*> parents;
    for (int p = 0; p < cfg.parents; ++p) {
      const Individual* best = nullptr;
      for (int t = 0; t < cfg.tournament_size; ++t) {
        const auto& contender = population[select_rng.index(population.size())];
        if (!best || contender.fitness > best->fitness) best = &contender;
      }
      parents.push_back(best);
    }

    std::vector<Individual> children;
    children.reserve(static_cast<std::size_t>(cfg.population));
    for (int c = 0; c < cfg.population && !rec.exhausted(); ++c) {
      Rng child_rng = root.derive("child", generation * 1000003ULL + static_cast<std::uint64_t>(c));
      const std::size_t i = child_rng.index(parents.size());
      std::size_t j = child_rng.index(parents.size() - 1);
      if (j >= i) ++j;
      Individual child;
      child.genome = crossover(parents[i]->genome, parents[j]->genome, child_rng);
      mutate(child.genome, cfg.p_mutation, child_rng);
      const auto state = normalise(scenario, child.genome, k);
      child.fitness = rec.evaluate(state);
      children.push_back(std::move(child));
    }
    if (static_cast<int>(children.size()) == cfg.population) population = std::move(children);
  }
  return rec.finish();
}

// --- reinforcement learning -------------------------------------------------

QNetworkParams initial_params(const Scenario& scenario, QNetConfig config, std::uint64_t seed) {
  config.feature_dim = feature_dim_for(scenario.params.num_lines);
  Rng rng = Rng(seed).derive("qnet-init");
  return QNetworkParams::random(config, rng);
}

namespace {

struct Env {
  Evaluator* evaluator;
  FeatureBuilder features;
  SearchRecorder recorder;
};

GraphInput encode(const Env& env, const LineAssignment& state) {
  const auto lines = realize_lines(env.evaluator->scenario(), state);
  return env.features.build(state, lines);
}

}  // namespace

RlTrainingOutput train_rl(std::span<Evaluator* const> evaluators, const Budget& budget,
                          const RlConfig& config, QNetworkParams params, std::uint64_t seed) {
  if (evaluators.empty()) throw ValidationError("train_rl needs at least one scenario");
  if (config.stall_limit < 1) throw ValidationError("stall_limit must be >= 1");
  const int k = evaluators.front()->scenario().params.num_lines;
  for (auto* e : evaluators)
    if (e->scenario().params.num_lines != k)
      throw ConfigurationError("all training scenarios must have the same number of lines");
  if (params.config.feature_dim != feature_dim_for(k))
    throw ConfigurationError("network feature_dim does not match " + std::to_string(k) + " lines");

  std::vector<Env> envs;
  envs.reserve(evaluators.size());
  for (auto* e : evaluators) envs.push_back({e, FeatureBuilder(e->scenario()), SearchRecorder(*e, budget)});
  SearchRecorder& clock = envs.front().recorder;

  const Rng root = Rng(seed).derive("train-rl");
  RlTrainingOutput out;
  for (std::uint64_t episode = 0;; ++episode) {
    Env& env = envs[episode % envs.size()];
    if (episode > 0 && clock.exhausted()) break;
    Rng rng = root.derive("episode", episode);
    ++env.recorder.result().episodes;

    LineAssignment state = random_state(env.evaluator->scenario(), rng);
    double value = env.recorder.evaluate(state);
    double episode_best = value;
    if (enumerate_actions(state).empty()) {
      // Frozen MDP: nothing to learn, every episode is the same state.
      if (clock.exhausted()) break;
      continue;
    }

    GraphInput input = encode(env, state);
    int stall = 0;
    while (stall < config.stall_limit && !clock.exhausted()) {
      const QValues q = forward(params, input);
      const double eps = params.config.epsilon(out.steps);
      const std::size_t pick = rng.bernoulli(eps) ? rng.index(q.actions.size())
                                                  : static_cast<std::size_t>(q.argmax());
      const Action action = q.actions[pick];
      LineAssignment next = apply_action(state, action);
      const double next_value = env.recorder.evaluate(next);
      GraphInput next_input = encode(env, next);
      ++out.steps;

      if (next_value > episode_best) {
        episode_best = next_value;
        const Transition tr{input, action, next_value - value, next_input};
        const auto loss = loss_and_grads(params, tr, params.config.gamma);
        params = sgd_step(params, loss.gradients, params.config.learning_rate);
        ++out.updates;
        stall = 0;
      } else {
        ++stall;
      }
      state = std::move(next);
      input = std::move(next_input);
      value = next_value;
    }
  }

  for (auto& env : envs) out.per_scenario.push_back(env.recorder.finish());
  out.params = std::move(params);
  return out;
}

std::pair<OptimizerResult, QNetworkParams> train_rl(Evaluator& evaluator, const Budget& budget,
                                                    const RlConfig& config, QNetworkParams params,
                                                    std::uint64_t seed) {
  Evaluator* list[] = {&evaluator};
  auto out = train_rl(std::span<Evaluator* const>(list), budget, config, std::move(params), seed);
  return {std::move(out.per_scenario.front()), std::move(out.params)};
}

OptimizerResult test_policy(Evaluator& evaluator, const Budget& budget, const QNetworkParams& params,
                            std::uint64_t seed, PolicyRunInfo* info) {
  const Scenario& scenario = evaluator.scenario();
  if (params.config.feature_dim != feature_dim_for(scenario.params.num_lines))
    throw ConfigurationError("network feature_dim does not match the scenario's line count");
  const FeatureBuilder features(scenario);
  SearchRecorder rec(evaluator, budget);
  Rng rng = Rng(seed).derive("test-policy");
  PolicyRunInfo local;
  PolicyRunInfo& stats = info ? *info : local;

  LineAssignment state = random_state(scenario, rng);
  double value = rec.evaluate(state);
  rec.result().episodes = 1;
  stats.initial_state = state;
  stats.initial_q = forward(params, features.build(state, realize_lines(scenario, state)));
  bool first = true;
  while (!rec.exhausted()) {
    const QValues q = first ? stats.initial_q
                            : forward(params, features.build(state, realize_lines(scenario, state)));
    first = false;
    if (q.actions.empty()) break;

    std::vector<std::size_t> order(q.actions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return q.values(static_cast<Eigen::Index>(a)) >
                                                                q.values(static_cast<Eigen::Index>(b)); });
    bool moved = false;
    for (std::size_t idx : order) {
      if (rec.exhausted()) break;
      LineAssignment next = apply_action(state, q.actions[idx]);
      const double next_value = rec.evaluate(next);
      if (next_value > value) {
        state = std::move(next);
        value = next_value;
        moved = true;
        ++stats.greedy_steps;
        break;
      }
    }
    if (!moved && !rec.exhausted()) {
      const Action kick = q.actions[rng.index(q.actions.size())];
      state = apply_action(state, kick);
      value = rec.evaluate(state);
      ++stats.random_steps;
    }
  }
  return rec.finish();
}

RlSearchOutput rl_search(Evaluator& evaluator, const Budget& budget, const RlSearchOptions& options,
                         QNetworkParams params, std::uint64_t seed) {
  const double f = options.train_fraction;
  if (!(f >= 0.0 && f < 1.0)) throw ValidationError("train_fraction must be in [0, 1)");
  RlSearchOutput out;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t start_evals = evaluator.evaluations();

  std::optional<OptimizerResult> trained;
  if (f > 0.0) {
    Budget train_budget{budget.seconds * f, std::nullopt};
    if (budget.max_evaluations)
      train_budget.max_evaluations = static_cast<std::size_t>(f * static_cast<double>(*budget.max_evaluations));
    Evaluator* list[] = {&evaluator};
    auto t = train_rl(std::span<Evaluator* const>(list), train_budget, options.rl, std::move(params),
                      Rng(seed).derive("rl-train").next_u64());
    out.train_steps = t.steps;
    out.train_updates = t.updates;
    params = std::move(t.params);
    trained = std::move(t.per_scenario.front());
  }

  const double used_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::size_t used_evals = evaluator.evaluations() - start_evals;
  Budget rest{std::max(0.0, budget.seconds - used_s), std::nullopt};
  if (budget.max_evaluations)
    rest.max_evaluations = *budget.max_evaluations > used_evals ? *budget.max_evaluations - used_evals : 0;
  OptimizerResult tested = test_policy(evaluator, rest, params, Rng(seed).derive("rl-test").next_u64(),
                                       &out.policy);

  OptimizerResult merged = trained ? std::move(*trained) : OptimizerResult{};
  const bool have_best = merged.best_assignment.has_value();
  for (const auto& p : tested.trajectory) {
    if (have_best && p.best_value <= merged.best_value) continue;
    merged.trajectory.push_back({p.seconds + used_s, p.evaluations + used_evals, p.best_value});
  }
  if (!have_best || tested.best_value > merged.best_value) {
    merged.best_value = tested.best_value;
    merged.best_assignment = tested.best_assignment;
  }
  merged.evaluations = used_evals + tested.evaluations;
  merged.episodes += tested.episodes;
  out.result = std::move(merged);
  out.params = std::move(params);
  return out;
}

}  // namespace tnd
