#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tnd/design_mdp.hpp"
#include "tnd/features.hpp"
#include "tnd/qnet.hpp"
#include "tnd/territory.hpp"

using namespace tnd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunOutput {
  int exit_code = -1;
  std::string stderr_text;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tnd_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunOutput run(const std::string& args) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + TND_BINARY + "\" " + args + " > \"" + (dir_ / "stdout.txt").string() +
                            "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    RunOutput out;
#ifdef _WIN32
    out.exit_code = status;
#else
    out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    out.stderr_text = ss.str();
    return out;
  }

  json load(const fs::path& p) const {
    std::ifstream in(p);
    return json::parse(in);
  }

  fs::path dir_;
};

Scenario co_located() {
  Scenario s;
  s.centroids = {{1, {0.5, 0.5}}};
  s.pois = {{1, {0.5, 0.5}, 1.0}};
  s.stops = {{1, {0.5, 0.5}, StopKind::bus_candidate}};
  s.params.num_lines = 1;
  return s;
}

}  // namespace

TEST_F(CliTest, EvaluateCoLocatedScenario) {
  save_scenario(co_located(), dir_ / "s.json");
  const auto r = run("evaluate --scenario \"" + (dir_ / "s.json").string() + "\" --out \"" + (dir_ / "out").string() + "\"");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  const json doc = load(dir_ / "out" / "evaluation.json");
  EXPECT_EQ(doc["acc_q"]["100"].get<double>(), 1.0);
  EXPECT_EQ(doc["acc_q"]["20"].get<double>(), 1.0);
  EXPECT_EQ(doc["total"].get<double>(), 1.0);
}

TEST_F(CliTest, GenerateThenCompareWithTinyBudget) {
  ASSERT_EQ(run("generate --preset desk --seed 3 --out \"" + dir_.string() + "\"").exit_code, 0);
  const auto r = run("compare --scenario \"" + (dir_ / "scenario.json").string() + "\" --budget-s 1 --seeds 2 --out \"" +
                     dir_.string() + "\"");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  const json doc = load(dir_ / "comparison.json");
  ASSERT_EQ(doc["reports"].size(), 2u);
  for (const auto& rep : doc["reports"]) EXPECT_EQ(rep["ratios"].size(), 2u);
  EXPECT_EQ(doc["trials"].size(), 2u);
}

TEST_F(CliTest, OptimizeInitialQMatchesCheckpoint) {
  ASSERT_EQ(run("generate --preset desk --seed 1 --out \"" + dir_.string() + "\"").exit_code, 0);
  const std::string scen = "\"" + (dir_ / "scenario.json").string() + "\"";
  const std::string small = " --node-dim 6 --edge-dim 4 --message-dim 6 --rounds 2";
  auto r = run("train --scenario " + scen + " --budget-s 30 --max-evals 60 --seed 2" + small + " --out \"" +
               (dir_ / "train").string() + "\"");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  r = run("optimize --optimizer rl --scenario " + scen + " --checkpoint \"" + (dir_ / "train" / "checkpoint.json").string() +
          "\" --budget-s 30 --max-evals 20 --seed 5 --out \"" + (dir_ / "opt").string() + "\"");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;

  const Scenario s = load_scenario(dir_ / "scenario.json");
  const QNetworkParams params = load_checkpoint(dir_ / "train" / "checkpoint.json");
  const json doc = load(dir_ / "opt" / "result.json");
  std::vector<std::vector<int>> lines;
  for (const auto& l : doc["initial_lines"]) lines.push_back(l["stops"].get<std::vector<int>>());
  const auto state = LineAssignment::from_lines(lines);
  const QValues q = forward(params, build_features(s, state, realize_lines(s, state)));
  const auto& recorded = doc["initial_q_values"];
  ASSERT_EQ(recorded.size(), q.actions.size());
  for (std::size_t i = 0; i < q.actions.size(); ++i) {
    EXPECT_EQ(recorded[i]["stop_id"].get<int>(), q.actions[i].stop_id);
    EXPECT_EQ(recorded[i]["target_line"].get<int>(), q.actions[i].target_line + 1);
    EXPECT_EQ(recorded[i]["q"].get<double>(), q.values(static_cast<Eigen::Index>(i)));
  }
}

TEST_F(CliTest, ExportWritesHeatmap) {
  ASSERT_EQ(run("generate --preset desk --out \"" + dir_.string() + "\"").exit_code, 0);
  const std::string scen = "\"" + (dir_ / "scenario.json").string() + "\"";
  ASSERT_EQ(run("optimize --optimizer random --scenario " + scen + " --max-evals 5 --out \"" + dir_.string() + "\"").exit_code, 0);
  const auto r = run("export --scenario " + scen + " --assignment \"" + (dir_ / "result.json").string() +
                     "\" --geojson --out \"" + dir_.string() + "\"");
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  EXPECT_TRUE(fs::exists(dir_ / "heatmap.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "heatmap.geojson"));
}

TEST_F(CliTest, ExitCodes) {
  auto r = run("optimize --scenario \"" + (dir_ / "missing.json").string() + "\"");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.stderr_text.rfind("error kind=io ", 0), 0u) << r.stderr_text;

  save_scenario(co_located(), dir_ / "s.json");
  r = run("optimize --scenario \"" + (dir_ / "s.json").string() + "\" --q 150");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.stderr_text.find('\n'), r.stderr_text.size() - 1);

  r = run("optimize --no-such-flag");
  EXPECT_EQ(r.exit_code, 2);

  {
    std::ofstream out(dir_ / "broken.json");
    out << "{\"centroids\": [";
  }
  r = run("evaluate --scenario \"" + (dir_ / "broken.json").string() + "\"");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.stderr_text.rfind("error kind=parse ", 0), 0u) << r.stderr_text;
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  save_scenario(co_located(), dir_ / "s.json");
  {
    std::ofstream out(dir_ / "run.toml");
    out << "[evaluate]\nscenario = \"" << (dir_ / "s.json").generic_string() << "\"\nq = 150\n";
  }
  EXPECT_EQ(run("evaluate --config \"" + (dir_ / "run.toml").string() + "\"").exit_code, 2);
  const auto r = run("evaluate --config \"" + (dir_ / "run.toml").string() + "\" --q 50 --out \"" + dir_.string() + "\"");
  EXPECT_EQ(r.exit_code, 0) << r.stderr_text;
}
