#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tnd/error.hpp"
#include "tnd/features.hpp"
#include "tnd/qnet.hpp"

using namespace tnd;
using namespace tnd::fixtures;

namespace {

Scenario collinear_scenario() {
  Scenario s;
  s.params.num_lines = 1;
  s.centroids = {{0, {0.0, 0.0}}};
  s.pois = {{0, {1.0, 1.0}, 1.0}};
  s.stops = {{1, {0.0, 0.0}, StopKind::bus_candidate},
             {2, {1.0, 0.0}, StopKind::bus_candidate},
             {3, {2.0, 0.0}, StopKind::bus_candidate},
             {50, {2.0, 0.0}, StopKind::metro},
             {51, {4.0, 2.0}, StopKind::metro}};
  s.metro_lines = {{1, {50, 51}, 5.0}};
  return s;
}

}  // namespace

TEST(Features, AdjacencyFollowsSortedOrder) {
  const Scenario s = collinear_scenario();
  const auto in = input_for(s, LineAssignment::from_lines({{1, 2, 3}}));
  AdjacencyMatrix expected = AdjacencyMatrix::Zero(3, 3);
  const auto order = realize_lines(s, in.state)[0].ordered_stops;
  for (std::size_t k = 1; k < order.size(); ++k)
    expected(in.state.index_of(order[k - 1]), in.state.index_of(order[k])) = 1;
  EXPECT_EQ(in.adjacency, expected);
  EXPECT_EQ(in.adjacency.diagonal().cast<int>().sum(), 0);
  EXPECT_EQ(in.adjacency.cast<int>().sum(), 2);
  // A -> B -> C or the reverse.
  EXPECT_EQ(in.adjacency(0, 1) + in.adjacency(1, 0), 1);
  EXPECT_EQ(in.adjacency(1, 2) + in.adjacency(2, 1), 1);
  EXPECT_EQ(in.neighbors[1], (std::vector<int>{0, 2}));
}

TEST(Features, ContractOnRandomStates) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = oracle::random_small_scenario(gen, 6, 10, 5, 2);
    const auto st = random_state(s, static_cast<std::uint64_t>(trial));
    const auto in = input_for(s, st);
    ASSERT_EQ(in.features.rows(), feature_dim_for(2));
    ASSERT_EQ(in.features.cols(), static_cast<Eigen::Index>(st.num_stops()));
    EXPECT_TRUE(in.features.allFinite());
    for (Eigen::Index i = 0; i < in.features.cols(); ++i) {
      EXPECT_EQ(in.features(2, i) + in.features(3, i), 1.0);
      for (int r : {0, 1, 4}) {
        EXPECT_GE(in.features(r, i), 0.0);
        EXPECT_LE(in.features(r, i), 1.0);
      }
    }
  }
}

TEST(Features, ColocatedMetroDistanceIsZero) {
  const Scenario s = collinear_scenario();
  const auto in = input_for(s, LineAssignment::from_lines({{1, 2, 3}}));
  EXPECT_EQ(in.features(2 + 1, 2), 0.0);  // stop 3 sits on station 50
  EXPECT_GT(in.features(2 + 1, 0), 0.0);
}

TEST(Features, RejectsForeignStates) {
  const Scenario s = collinear_scenario();
  const auto st = LineAssignment::from_lines({{1, 2}});
  EXPECT_THROW(build_features(s, st, realize_lines(s, st)), ConfigurationError);
}

TEST(Forward, ZeroWeightsGiveZeroQ) {
  std::mt19937_64 gen(1);
  const Scenario s = oracle::random_small_scenario(gen, 5, 10, 5, 2);
  const auto st = random_state(s, 1u);
  QNetConfig c;
  c.feature_dim = feature_dim_for(2);
  const auto q = forward(QNetworkParams::zeros(c), input_for(s, st));
  EXPECT_EQ(q.actions, enumerate_actions(st));
  for (Eigen::Index i = 0; i < q.values.size(); ++i) EXPECT_EQ(q.values(i), 0.0);
}

TEST(Forward, OutputSizeMatchesAdmissibleActions) {
  std::mt19937_64 gen(2);
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario s = oracle::random_small_scenario(gen, 5, 10, 5, 2);
    const auto st = random_state(s, rng);
    QNetConfig c;
    c.feature_dim = feature_dim_for(2);
    const auto q = forward(QNetworkParams::random(c, rng), input_for(s, st));
    EXPECT_EQ(q.actions, enumerate_actions(st));
    EXPECT_EQ(static_cast<std::size_t>(q.values.size()), q.actions.size());
    EXPECT_TRUE(q.values.allFinite());
  }
}

TEST(Forward, DimensionMismatchIsConfigurationError) {
  const Scenario s = collinear_scenario();
  QNetConfig c;
  c.feature_dim = feature_dim_for(3);
  Rng rng(0);
  EXPECT_THROW(forward(QNetworkParams::random(c, rng), input_for(s, LineAssignment::from_lines({{1, 2, 3}}))),
               ConfigurationError);
}

TEST(Forward, IsolatedStopsStayFinite) {
  // k = 3 with single-stop lines: stops without neighbours.
  Scenario s = collinear_scenario();
  s.params.num_lines = 3;
  const auto st = LineAssignment::from_lines({{1}, {2}, {3}});
  const auto in = input_for(s, st);
  for (const auto& n : in.neighbors) EXPECT_TRUE(n.empty());
  QNetConfig c;
  c.feature_dim = feature_dim_for(3);
  Rng rng(5);
  ForwardTrace tr;
  forward(QNetworkParams::random(c, rng), in, &tr);
  for (const auto& mu : tr.mu) EXPECT_TRUE(mu.allFinite());
  EXPECT_TRUE(enumerate_actions(st).empty());
}

TEST(Forward, EquivariantUnderStopRelabeling) {
  std::mt19937_64 gen(9);
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario s = oracle::random_small_scenario(gen, 6, 10, 5, 2);
    const auto ids = s.candidate_stop_ids();
    std::vector<int> perm(ids.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::map<int, int> relabel;
    for (std::size_t i = 0; i < ids.size(); ++i) relabel[ids[i]] = 500 + perm[i];

    Scenario t = s;
    for (auto& st : t.stops)
      if (st.kind == StopKind::bus_candidate) st.id = relabel.at(st.id);

    const auto state = random_state(s, rng);
    auto lines = state.lines();
    for (auto& l : lines)
      for (auto& id : l) id = relabel.at(id);
    const auto state_t = LineAssignment::from_lines(lines);

    QNetConfig c;
    c.feature_dim = feature_dim_for(2);
    const auto params = QNetworkParams::random(c, rng);
    const auto q = forward(params, input_for(s, state));
    const auto qt = forward(params, input_for(t, state_t));
    ASSERT_EQ(q.actions.size(), qt.actions.size());
    for (std::size_t i = 0; i < q.actions.size(); ++i) {
      const Action mapped{relabel.at(q.actions[i].stop_id), q.actions[i].target_line};
      const double a = q.values(static_cast<Eigen::Index>(i));
      const double b = qt.values(static_cast<Eigen::Index>(action_index(qt, mapped)));
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::fabs(a)));
    }
  }
}

TEST(Gradients, QValueMatchesFiniteDifferences) {
  std::mt19937_64 gen(21);
  Rng rng(21);
  std::uniform_int_distribution<int> dim(1, 8), rounds(0, 3);
  for (int draw = 0; draw < 5; ++draw) {
    const Scenario s = oracle::random_small_scenario(gen, 5, 10, 5, 2);
    const auto st = random_state(s, rng);
    const auto acts = enumerate_actions(st);
    if (acts.empty()) continue;
    QNetConfig c;
    c.feature_dim = feature_dim_for(2);
    c.node_dim = dim(gen);
    c.edge_dim = dim(gen);
    c.message_dim = dim(gen);
    c.rounds = rounds(gen);
    const auto in = input_for(s, st);
    QNetworkParams p = smooth_params(c, in, rng);
    const Action a = acts[rng.index(acts.size())];
    const auto grads = q_value_gradient(p, in, a);
    const auto g = grad_data(grads);
    auto refs = tensors(p);
    const std::size_t ai = action_index(forward(p, in), a);
    for (std::size_t k = 0; k < refs.size(); ++k) {
      for (Eigen::Index i = 0; i < refs[k].size; ++i) {
        const double orig = refs[k].data[i];
        refs[k].data[i] = orig + 1e-5;
        const double up = forward(p, in).values(static_cast<Eigen::Index>(ai));
        refs[k].data[i] = orig - 1e-5;
        const double down = forward(p, in).values(static_cast<Eigen::Index>(ai));
        refs[k].data[i] = orig;
        const double numeric = (up - down) / 2e-5;
        EXPECT_TRUE(grad_close(g[k][i], numeric))
            << refs[k].name << "[" << i << "] analytic " << g[k][i] << " numeric " << numeric;
      }
    }
  }
}

TEST(Gradients, LossMatchesFiniteDifferences) {
  std::mt19937_64 gen(22);
  Rng rng(22);
  for (int draw = 0; draw < 3; ++draw) {
    const Scenario s = oracle::random_small_scenario(gen, 5, 10, 5, 2);
    const auto st = random_state(s, rng);
    const auto acts = enumerate_actions(st);
    if (acts.empty()) continue;
    QNetConfig c;
    c.feature_dim = feature_dim_for(2);
    c.node_dim = 5;
    c.edge_dim = 4;
    c.message_dim = 6;
    c.rounds = 2;
    const auto in = input_for(s, st);
    QNetworkParams p = smooth_params(c, in, rng);
    const Action a = acts.front();
    const auto next = apply_action(st, a);
    const Transition tr{in, a, 0.7, input_for(s, next)};
    const auto loss = loss_and_grads(p, tr, 0.9);
    EXPECT_NEAR(loss.loss, squared_error(p, in, a, loss.target), 1e-15);
    const auto g = grad_data(loss.gradients);
    auto refs = tensors(p);
    for (std::size_t k = 0; k < refs.size(); ++k)
      for (Eigen::Index i = 0; i < refs[k].size; ++i) {
        const double orig = refs[k].data[i];
        refs[k].data[i] = orig + 1e-5;
        const double up = squared_error(p, in, a, loss.target);
        refs[k].data[i] = orig - 1e-5;
        const double down = squared_error(p, in, a, loss.target);
        refs[k].data[i] = orig;
        EXPECT_TRUE(grad_close(g[k][i], (up - down) / 2e-5)) << refs[k].name << "[" << i << "]";
      }
  }
}

TEST(Loss, Arithmetic) {
  EXPECT_EQ(q_learning_target(2.0, 1.0, 0.95), 0.95 * 2.0 + 1.0);
  EXPECT_EQ(q_learning_loss(3.0, 2.0, 1.0, 0.95), (0.95 * 2.0 + 1.0 - 3.0) * (0.95 * 2.0 + 1.0 - 3.0));
  EXPECT_NEAR(q_learning_loss(3.0, 2.0, 1.0, 0.95), 0.01, 1e-15);
  EXPECT_NEAR(q_learning_loss(3.0, 2.0, 0.0, 0.95), 1.21, 1e-15);
  EXPECT_EQ(q_learning_loss(2.9, 2.0, 1.0, 0.95), 0.0);
}

TEST(Loss, StationaryPointHasZeroGradient) {
  std::mt19937_64 gen(4);
  const Scenario s = oracle::random_small_scenario(gen, 5, 10, 5, 2);
  const auto ids = s.candidate_stop_ids();
  const auto st = LineAssignment::from_lines({{ids.front()}, {ids.begin() + 1, ids.end()}});
  QNetConfig c;
  c.feature_dim = feature_dim_for(2);
  auto p = QNetworkParams::zeros(c);
  p.readout.bias(0) = 2.0;  // every Q equals 2
  const auto acts = enumerate_actions(st);
  ASSERT_FALSE(acts.empty());
  const auto in = input_for(s, st);
  // Target gamma * 2 + r equals Q = 2 for r = 2 * (1 - gamma).
  const Transition tr{in, acts.front(), 2.0 * (1.0 - 0.5), input_for(s, apply_action(st, acts.front()))};
  const auto loss = loss_and_grads(p, tr, 0.5);
  EXPECT_EQ(loss.loss, 0.0);
  loss.gradients.for_each_tensor([](const std::string& name, const auto& t) {
    EXPECT_EQ(t.cwiseAbs().sum(), 0.0) << name;
  });
}

TEST(Loss, TerminalSuccessorContributesZero) {
  // A successor with one stop per line has no admissible action.
  Scenario four = collinear_scenario();
  four.params.num_lines = 3;
  four.stops.push_back({4, {3.0, 0.0}, StopKind::bus_candidate});
  const Scenario three = [] {
    Scenario s = collinear_scenario();
    s.params.num_lines = 3;
    return s;
  }();
  const auto st = LineAssignment::from_lines({{1, 2}, {3}, {4}});
  const auto terminal = LineAssignment::from_lines({{1}, {2}, {3}});
  ASSERT_TRUE(enumerate_actions(terminal).empty());
  QNetConfig c;
  c.feature_dim = feature_dim_for(3);
  auto p = QNetworkParams::zeros(c);
  p.readout.bias(0) = 1.0;
  const auto loss = loss_and_grads(p, {input_for(four, st), {1, 1}, 0.25, input_for(three, terminal)}, 0.5);
  EXPECT_EQ(loss.target, 0.25);
  EXPECT_EQ(loss.q_value, 1.0);
  EXPECT_EQ(loss.loss, 0.75 * 0.75);
}

TEST(Sgd, Updates) {
  QNetConfig c;
  c.feature_dim = 3;
  c.node_dim = 1;
  c.edge_dim = 1;
  c.message_dim = 1;
  c.rounds = 1;
  Rng rng(1);
  const auto p = QNetworkParams::random(c, rng);
  auto zero = QNetworkParams::zeros(c);
  EXPECT_EQ(sgd_step(p, zero, 0.5), p);
  auto g = QNetworkParams::random(c, rng);
  EXPECT_EQ(sgd_step(p, g, 0.0), p);

  auto scalar = QNetworkParams::zeros(c);
  scalar.readout.bias(0) = 1.0;
  auto grad = QNetworkParams::zeros(c);
  grad.readout.bias(0) = 2.0;
  EXPECT_DOUBLE_EQ(sgd_step(scalar, grad, 0.1).readout.bias(0), 0.8);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  QNetConfig c;
  c.feature_dim = feature_dim_for(3);
  c.learning_rate = 0.0123;
  c.gamma = 0.9;
  Rng rng(8);
  auto p = QNetworkParams::random(c, rng);
  p.readout.bias(0) = 0.1 + 0.2;  // not representable in short decimal
  const auto path = std::filesystem::temp_directory_path() / "tnd_qnet_ckpt.json";
  save_checkpoint(p, path);
  EXPECT_EQ(load_checkpoint(path), p);
  EXPECT_EQ(load_checkpoint(path, &c), p);
}

TEST(Checkpoint, DimensionGuard) {
  QNetConfig c;
  c.feature_dim = feature_dim_for(2);
  c.rounds = 4;
  Rng rng(8);
  const auto text = checkpoint_to_json(QNetworkParams::random(c, rng));
  QNetConfig expect = c;
  expect.rounds = 2;
  EXPECT_THROW(checkpoint_from_json(text, &expect), ConfigurationError);
}

TEST(Checkpoint, TruncatedFileIsParseError) {
  QNetConfig c;
  c.feature_dim = feature_dim_for(2);
  Rng rng(8);
  const auto text = checkpoint_to_json(QNetworkParams::random(c, rng));
  EXPECT_THROW(checkpoint_from_json(text.substr(0, text.size() / 2)), ParseError);
  EXPECT_THROW(checkpoint_from_json("{\"format\": \"other\"}"), ParseError);
}

TEST(Config, Validation) {
  QNetConfig c;
  EXPECT_NO_THROW(validate(c));
  c.gamma = 1.0;
  EXPECT_THROW(validate(c), ConfigurationError);
  c = {};
  c.node_dim = 0;
  EXPECT_THROW(validate(c), ConfigurationError);
  c = {};
  EXPECT_DOUBLE_EQ(c.epsilon(0), 1.0);
  EXPECT_DOUBLE_EQ(c.epsilon(100), 0.525);
  EXPECT_DOUBLE_EQ(c.epsilon(200), 0.05);
  EXPECT_DOUBLE_EQ(c.epsilon(5000), 0.05);
}
