#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tnd/optimizers.hpp"
#include "tnd/qnet.hpp"

namespace tnd::cli {

struct RunConfig {
  std::vector<std::filesystem::path> scenarios;
  std::filesystem::path out_dir = "tnd_out";
  double q = 20.0;
  double budget_s = 60.0;
  std::optional<std::size_t> max_evals;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string optimizer = "rl";
  std::optional<std::filesystem::path> checkpoint;

  // generate
  std::string preset = "reference";
  std::optional<int> num_lines;

  // evaluate / export
  std::optional<std::filesystem::path> assignment;
  std::optional<std::filesystem::path> baseline;
  bool geojson = false;

  // optimizers
  RlSearchOptions rl;
  QNetConfig qnet;
  GaConfig ga;
  int seeds = 10;
};

/// Throws ValidationError for out-of-range values.
void validate(const RunConfig& config);

void cmd_generate(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_optimize(const RunConfig& config);
void cmd_compare(const RunConfig& config);
void cmd_export(const RunConfig& config);

}  // namespace tnd::cli
