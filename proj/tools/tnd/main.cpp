#include <cstdlib>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "tnd/error.hpp"

namespace {

using tnd::cli::RunConfig;

enum ExitCode { kOk = 0, kValidation = 2, kIo = 3, kInternal = 4 };

int fail(const char* kind, const std::string& message, int code) {
  std::cerr << "error kind=" << kind << " message=" << nlohmann::json(message).dump() << "\n";
  return code;
}

void add_common(CLI::App& sub, RunConfig& c) {
  sub.add_option("--out", c.out_dir, "Output directory")->envname("TND_OUT_DIR");
  sub.add_option("--seed", c.seed, "Master random seed");
  sub.add_option("--threads", c.threads, "Worker threads for accessibility evaluation");
}

void add_scenario(CLI::App& sub, RunConfig& c, bool many = false) {
  auto* opt = sub.add_option("--scenario", c.scenarios, many ? "Scenario file (repeatable)" : "Scenario file");
  opt->required();
  if (!many) opt->expected(1);
}

void add_search(CLI::App& sub, RunConfig& c) {
  sub.add_option("--q", c.q, "Quantile percent of the objective acc^q");
  sub.add_option("--budget-s", c.budget_s, "Wall-clock budget in seconds");
  sub.add_option("--max-evals", c.max_evals, "Cap on acc^q evaluations (deterministic stop)");
  sub.add_option("--stall-limit", c.rl.rl.stall_limit, "Non-improving steps before an episode ends");
  sub.add_option("--train-fraction", c.rl.train_fraction, "Budget share spent training in the rl optimizer");
  sub.add_option("--lr", c.qnet.learning_rate, "SGD learning rate");
  sub.add_option("--gamma", c.qnet.gamma, "Discount factor");
  sub.add_option("--node-dim", c.qnet.node_dim, "Node embedding width");
  sub.add_option("--edge-dim", c.qnet.edge_dim, "Edge embedding width");
  sub.add_option("--message-dim", c.qnet.message_dim, "Message width");
  sub.add_option("--rounds", c.qnet.rounds, "Message-passing rounds");
  sub.add_option("--population", c.ga.population, "GA population size");
  sub.add_option("--parents", c.ga.parents, "GA parents per generation");
  sub.add_option("--p-mutation", c.ga.p_mutation, "GA mutation probability");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  CLI::App app{"Bus line design for equitable public-transport accessibility"};
  app.set_config("--config", "", "TOML or INI file with one [section] per subcommand; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  std::function<void(const RunConfig&)> command;
  auto bind = [&](CLI::App* sub, void (*fn)(const RunConfig&)) {
    sub->callback([&command, fn] { command = fn; });
  };

  auto* generate = app.add_subcommand("generate", "Write a synthetic grid scenario");
  add_common(*generate, config);
  generate->add_option("--preset", config.preset, "reference (12x6, k=3) or desk (6x6, k=2)")
      ->check(CLI::IsMember({"reference", "desk"}));
  generate->add_option("--lines", config.num_lines, "Override the number of bus lines");
  bind(generate, tnd::cli::cmd_generate);

  auto* evaluate = app.add_subcommand("evaluate", "Accessibility of the metro network or a design");
  add_common(*evaluate, config);
  add_scenario(*evaluate, config);
  evaluate->add_option("--q", config.q, "Extra quantile to report besides 20, 50, 100");
  evaluate->add_option("--assignment", config.assignment, "result.json whose lines are evaluated");
  bind(evaluate, tnd::cli::cmd_evaluate);

  auto* train = app.add_subcommand("train", "Train the Q-network and write a checkpoint");
  add_common(*train, config);
  add_scenario(*train, config, true);
  add_search(*train, config);
  train->add_option("--checkpoint", config.checkpoint, "Checkpoint path to write");
  bind(train, tnd::cli::cmd_train);

  auto* optimize = app.add_subcommand("optimize", "Run one optimizer on a scenario");
  add_common(*optimize, config);
  add_scenario(*optimize, config);
  add_search(*optimize, config);
  optimize->add_option("--optimizer", config.optimizer, "rl, ga or random")
      ->check(CLI::IsMember({"rl", "ga", "random"}));
  optimize->add_option("--checkpoint", config.checkpoint, "Trained weights for the rl optimizer");
  bind(optimize, tnd::cli::cmd_optimize);

  auto* compare = app.add_subcommand("compare", "RL, GA and random search with matched budgets");
  add_common(*compare, config);
  add_scenario(*compare, config);
  add_search(*compare, config);
  compare->add_option("--seeds", config.seeds, "Number of independent trials");
  compare->add_option("--checkpoint", config.checkpoint, "Start the rl arm from these weights");
  bind(compare, tnd::cli::cmd_compare);

  auto* exporter = app.add_subcommand("export", "Write the per-centroid improvement heatmap");
  add_common(*exporter, config);
  add_scenario(*exporter, config);
  exporter->add_option("--q", config.q, "Quantile defining the flagged worst set");
  exporter->add_option("--assignment", config.assignment, "result.json of the improved design")->required();
  exporter->add_option("--baseline", config.baseline, "result.json of the baseline (default: metro only)");
  exporter->add_flag("--geojson", config.geojson, "Also write heatmap.geojson");
  bind(exporter, tnd::cli::cmd_export);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kValidation);
  }

  try {
    tnd::cli::validate(config);
    if (config.threads > 1)
      std::cerr << "note: --threads > 1 only parallelises per-centroid searches; results do not depend on it\n";
    command(config);
  } catch (const tnd::Error& e) {
    return fail(tnd::to_string(e.kind()), e.what(), e.kind() == tnd::ErrorKind::io ? kIo : kValidation);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kInternal);
  }
  return kOk;
}
