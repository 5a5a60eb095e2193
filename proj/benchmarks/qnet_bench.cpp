#include <benchmark/benchmark.h>

#include "tnd/design_mdp.hpp"
#include "tnd/features.hpp"
#include "tnd/optimizers.hpp"
#include "tnd/qnet.hpp"

using namespace tnd;

namespace {

struct Fixture {
  Scenario scenario = generate_grid_scenario(reference_grid_spec(1));
  LineAssignment state = random_state(scenario, 2u);
  GraphInput input = build_features(scenario, state, realize_lines(scenario, state));
  QNetworkParams params = initial_params(scenario, QNetConfig{}, 3);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_Features(benchmark::State& state) {
  const auto& f = fixture();
  const FeatureBuilder builder(f.scenario);
  const auto lines = realize_lines(f.scenario, f.state);
  for (auto _ : state) benchmark::DoNotOptimize(builder.build(f.state, lines));
}
BENCHMARK(BM_Features);

void BM_Forward(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(forward(f.params, f.input));
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMicrosecond);

void BM_LossAndGradients(benchmark::State& state) {
  const auto& f = fixture();
  const auto actions = enumerate_actions(f.state);
  const auto next = apply_action(f.state, actions.front());
  const Transition tr{f.input, actions.front(), 0.1,
                      build_features(f.scenario, next, realize_lines(f.scenario, next))};
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grads(f.params, tr, 0.95));
}
BENCHMARK(BM_LossAndGradients)->Unit(benchmark::kMicrosecond);

}  // namespace
