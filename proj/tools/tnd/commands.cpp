#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>

#include "output.hpp"
#include "tnd/accessibility.hpp"
#include "tnd/error.hpp"
#include "tnd/eval_stats.hpp"
#include "tnd/evaluator.hpp"
#include "tnd/territory.hpp"

namespace tnd::cli {

namespace {

constexpr double kReportQuantiles[] = {20.0, 50.0, 100.0};

Budget budget_of(const RunConfig& c) { return {c.budget_s, c.max_evals}; }

EvaluatorOptions evaluator_options(const RunConfig& c) {
  EvaluatorOptions o;
  o.q_percent = c.q;
  o.threads = c.threads;
  return o;
}

const std::filesystem::path& single_scenario(const RunConfig& c) {
  if (c.scenarios.size() != 1) throw ValidationError("exactly one --scenario is required");
  return c.scenarios.front();
}

std::vector<double> report_quantiles(double q) {
  std::vector<double> qs(std::begin(kReportQuantiles), std::end(kReportQuantiles));
  if (std::find(qs.begin(), qs.end(), q) == qs.end()) qs.push_back(q);
  std::sort(qs.begin(), qs.end());
  return qs;
}

std::string q_key(double q) { return format_double(q); }

json run_json(const RunConfig& c) {
  json j = {{"q", c.q}, {"budget_s", c.budget_s}, {"seed", c.seed}, {"threads", c.threads}};
  j["max_evals"] = c.max_evals ? json(*c.max_evals) : json(nullptr);
  return j;
}

json qnet_json(const QNetConfig& q) {
  return {{"feature_dim", q.feature_dim}, {"node_dim", q.node_dim},     {"edge_dim", q.edge_dim},
          {"message_dim", q.message_dim}, {"rounds", q.rounds},         {"learning_rate", q.learning_rate},
          {"gamma", q.gamma},             {"epsilon_start", q.epsilon_start},
          {"epsilon_end", q.epsilon_end}, {"epsilon_decay_steps", q.epsilon_decay_steps}};
}

AccessibilityReport metro_only_report(const Scenario& s, std::span<const double> qs, unsigned threads) {
  return evaluate_report(s, build_router_graph(s, {}), qs, threads);
}

AccessibilityReport design_report(const Scenario& s, const std::optional<std::filesystem::path>& result,
                                  std::span<const double> qs, unsigned threads) {
  if (!result) return metro_only_report(s, qs, threads);
  const auto state = assignment_from_result(*result);
  return evaluate_report(s, realize_state(s, state).graph, qs, threads);
}

QNetworkParams network_for(const RunConfig& c, const Scenario& s, std::uint64_t seed) {
  if (c.checkpoint) {
    auto params = load_checkpoint(*c.checkpoint);
    if (params.config.feature_dim != feature_dim_for(s.params.num_lines))
      throw ConfigurationError("checkpoint was trained for a different number of lines");
    return params;
  }
  return initial_params(s, c.qnet, seed);
}

void print_report(const AccessibilityReport& r) {
  const auto [lo, hi] = std::minmax_element(r.per_centroid.begin(), r.per_centroid.end());
  std::cout << "centroids " << r.per_centroid.size() << "  min " << format_double(*lo) << "  mean "
            << format_double(r.total() / static_cast<double>(r.per_centroid.size())) << "  max "
            << format_double(*hi) << "\n";
  for (const auto& [q, v] : r.acc_q) std::cout << "acc^" << format_double(q) << " " << format_double(v) << "\n";
}

}  // namespace

void validate(const RunConfig& c) {
  if (!(c.q > 0.0 && c.q <= 100.0)) throw ValidationError("--q must be in (0, 100]");
  if (!(c.budget_s > 0.0)) throw ValidationError("--budget-s must be > 0");
  if (c.max_evals && *c.max_evals == 0) throw ValidationError("--max-evals must be > 0");
  if (c.threads < 1) throw ValidationError("--threads must be >= 1");
  if (c.seeds < 1) throw ValidationError("--seeds must be >= 1");
  if (!(c.rl.train_fraction >= 0.0 && c.rl.train_fraction < 1.0))
    throw ValidationError("--train-fraction must be in [0, 1)");
  if (c.rl.rl.stall_limit < 1) throw ValidationError("--stall-limit must be >= 1");
  if (c.num_lines && *c.num_lines < 1) throw ValidationError("--lines must be >= 1");
  validate(c.ga);
  QNetConfig q = c.qnet;
  validate(q);
}

void cmd_generate(const RunConfig& c) {
  GridSpec spec;
  if (c.preset == "reference")
    spec = reference_grid_spec(c.seed);
  else if (c.preset == "desk")
    spec = desk_grid_spec(c.seed);
  else
    throw ValidationError("unknown preset '" + c.preset + "' (expected reference or desk)");
  if (c.num_lines) spec.params.num_lines = *c.num_lines;
  const Scenario s = generate_grid_scenario(spec);
  validate(s);
  ensure_directory(c.out_dir);
  const auto path = c.out_dir / "scenario.json";
  save_scenario(s, path);
  std::cout << "wrote " << path.string() << ": " << s.centroids.size() << " centroids, " << s.pois.size()
            << " PoIs, " << s.num_candidates() << " candidate stops, " << s.metro_lines.size()
            << " metro lines, k = " << s.params.num_lines << "\n";
}

void cmd_evaluate(const RunConfig& c) {
  const Scenario s = load_scenario(single_scenario(c));
  const auto qs = report_quantiles(c.q);
  const auto report = design_report(s, c.assignment, qs, c.threads);

  json acc_q = json::object();
  for (const auto& [q, v] : report.acc_q) acc_q[q_key(q)] = v;
  json per = json::array();
  for (std::size_t i = 0; i < report.per_centroid.size(); ++i)
    per.push_back({{"centroid_id", report.centroid_ids[i]}, {"acc", report.per_centroid[i]}});
  json doc = {{"command", "evaluate"},
              {"design", c.assignment ? "assignment" : "metro_only"},
              {"acc_q", std::move(acc_q)},
              {"total", report.total()},
              {"per_centroid", std::move(per)}};
  ensure_directory(c.out_dir);
  write_json(c.out_dir / "evaluation.json", doc);
  print_report(report);
}

void cmd_train(const RunConfig& c) {
  if (c.scenarios.empty()) throw ValidationError("at least one --scenario is required");
  std::vector<Scenario> scenarios;
  for (const auto& p : c.scenarios) scenarios.push_back(load_scenario(p));
  std::vector<std::unique_ptr<Evaluator>> evaluators;
  std::vector<Evaluator*> ptrs;
  for (const auto& s : scenarios) {
    evaluators.push_back(std::make_unique<Evaluator>(s, evaluator_options(c)));
    ptrs.push_back(evaluators.back().get());
  }
  QNetConfig qnet = c.qnet;
  qnet.feature_dim = feature_dim_for(scenarios.front().params.num_lines);
  auto params = initial_params(scenarios.front(), qnet, c.seed);
  auto out = train_rl(ptrs, budget_of(c), c.rl.rl, std::move(params), c.seed);

  ensure_directory(c.out_dir);
  const auto ckpt = c.checkpoint.value_or(c.out_dir / "checkpoint.json");
  save_checkpoint(out.params, ckpt);
  write_text(c.out_dir / "trajectory.jsonl", trajectory_jsonl(out.per_scenario.front().trajectory));
  json per = json::array();
  for (std::size_t i = 0; i < scenarios.size(); ++i) per.push_back(result_json(scenarios[i], out.per_scenario[i]));
  write_json(c.out_dir / "result.json", {{"command", "train"},
                                         {"run", run_json(c)},
                                         {"qnet", qnet_json(out.params.config)},
                                         {"stall_limit", c.rl.rl.stall_limit},
                                         {"steps", out.steps},
                                         {"updates", out.updates},
                                         {"per_scenario", std::move(per)}});
  std::cout << "trained " << out.steps << " steps, " << out.updates << " updates; best acc^"
            << format_double(c.q) << " " << format_double(out.per_scenario.front().best_value) << "\n"
            << "checkpoint " << ckpt.string() << "\n";
}

void cmd_optimize(const RunConfig& c) {
  const Scenario s = load_scenario(single_scenario(c));
  Evaluator evaluator(s, evaluator_options(c));
  const Budget budget = budget_of(c);
  json doc = {{"command", "optimize"}, {"optimizer", c.optimizer}, {"run", run_json(c)}};
  OptimizerResult result;
  if (c.optimizer == "random") {
    result = random_search(evaluator, budget, c.seed);
  } else if (c.optimizer == "ga") {
    result = genetic_search(evaluator, budget, c.ga, c.seed);
    doc["ga"] = {{"population", c.ga.population}, {"parents", c.ga.parents},
                 {"p_mutation", c.ga.p_mutation}, {"tournament_size", c.ga.tournament_size}};
  } else if (c.optimizer == "rl") {
    RlSearchOptions options = c.rl;
    // A supplied checkpoint is used as a frozen policy.
    if (c.checkpoint) options.train_fraction = 0.0;
    auto out = rl_search(evaluator, budget, options, network_for(c, s, c.seed), c.seed);
    result = std::move(out.result);
    doc["rl"] = {{"train_fraction", options.train_fraction}, {"stall_limit", options.rl.stall_limit},
                 {"train_steps", out.train_steps},           {"train_updates", out.train_updates},
                 {"greedy_steps", out.policy.greedy_steps},  {"random_steps", out.policy.random_steps}};
    doc["initial_lines"] = out.policy.initial_state ? assignment_json(s, *out.policy.initial_state) : json::array();
    doc["initial_q_values"] = q_values_json(out.policy.initial_q);
  } else {
    throw ValidationError("unknown optimizer '" + c.optimizer + "' (expected rl, ga or random)");
  }
  doc["result"] = result_json(s, result);

  ensure_directory(c.out_dir);
  write_json(c.out_dir / "result.json", doc);
  write_text(c.out_dir / "trajectory.jsonl", trajectory_jsonl(result.trajectory));
  std::cout << c.optimizer << ": best acc^" << format_double(c.q) << " " << format_double(result.best_value)
            << " after " << result.evaluations << " evaluations\n";
}

void cmd_compare(const RunConfig& c) {
  const Scenario s = load_scenario(single_scenario(c));
  const Budget budget = budget_of(c);
  const Rng root = Rng(c.seed).derive("compare");
  std::vector<double> random_values, ga_values, rl_values;
  json trials = json::array();
  for (int i = 0; i < c.seeds; ++i) {
    const std::uint64_t trial_seed = root.derive("trial", static_cast<std::uint64_t>(i)).next_u64();
    Evaluator eval_random(s, evaluator_options(c));
    Evaluator eval_ga(s, evaluator_options(c));
    Evaluator eval_rl(s, evaluator_options(c));
    const auto r = random_search(eval_random, budget, trial_seed);
    const auto g = genetic_search(eval_ga, budget, c.ga, trial_seed);
    const auto l = rl_search(eval_rl, budget, c.rl, network_for(c, s, trial_seed), trial_seed).result;
    random_values.push_back(r.best_value);
    ga_values.push_back(g.best_value);
    rl_values.push_back(l.best_value);
    trials.push_back({{"trial", i},
                      {"seed", trial_seed},
                      {"random", r.best_value},
                      {"ga", g.best_value},
                      {"rl", l.best_value},
                      {"evaluations", {{"random", r.evaluations}, {"ga", g.evaluations}, {"rl", l.evaluations}}}});
    std::cout << "trial " << i << ": random " << format_double(r.best_value) << "  ga "
              << format_double(g.best_value) << "  rl " << format_double(l.best_value) << "\n";
  }
  const auto rl_report = compare_runs("rl", rl_values, random_values);
  const auto ga_report = compare_runs("ga", ga_values, random_values);
  ensure_directory(c.out_dir);
  write_json(c.out_dir / "comparison.json", {{"command", "compare"},
                                             {"run", run_json(c)},
                                             {"seeds", c.seeds},
                                             {"train_fraction", c.rl.train_fraction},
                                             {"trials", std::move(trials)},
                                             {"reports", {comparison_json(rl_report), comparison_json(ga_report)}}});
  for (const auto* rep : {&rl_report, &ga_report}) {
    std::cout << rep->algorithm << " vs random: mean R " << format_double(rep->ttest.mean);
    if (rep->ttest.n >= 2 && std::isfinite(rep->ttest.t_statistic))
      std::cout << "  t " << format_double(rep->ttest.t_statistic) << "  p(one-sided) "
                << format_double(rep->ttest.p_greater);
    std::cout << "\n";
  }
}

void cmd_export(const RunConfig& c) {
  if (!c.assignment) throw ValidationError("export needs --assignment (a result.json with lines)");
  const Scenario s = load_scenario(single_scenario(c));
  const double qs[] = {c.q};
  const auto baseline = design_report(s, c.baseline, qs, c.threads);
  const auto improved = design_report(s, c.assignment, qs, c.threads);
  ensure_directory(c.out_dir);
  const auto csv = c.out_dir / "heatmap.csv";
  std::optional<std::filesystem::path> geo;
  if (c.geojson) geo = c.out_dir / "heatmap.geojson";
  export_heatmap(s, baseline, improved, c.q, csv, geo);
  std::cout << "wrote " << csv.string() << (geo ? " and " + geo->string() : std::string()) << "\n";
}

}  // namespace tnd::cli
