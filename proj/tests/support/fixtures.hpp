#pragma once

// Helpers shared by the unit and acceptance tests. Unlike oracles.hpp these
// call into the library.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnd/design_mdp.hpp"
#include "tnd/features.hpp"
#include "tnd/qnet.hpp"
#include "tnd/transit_graph.hpp"

namespace tnd::fixtures {

/// Up to `max_lines` disjoint bus lines over a random subset of candidates.
inline std::vector<std::vector<int>> random_bus_lines(const Scenario& s, std::mt19937_64& gen, int max_lines) {
  auto ids = s.candidate_stop_ids();
  std::shuffle(ids.begin(), ids.end(), gen);
  const int k = std::uniform_int_distribution<int>(0, std::min<int>(max_lines, static_cast<int>(ids.size())))(gen);
  std::vector<std::vector<int>> lines(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < ids.size() && k > 0; ++i) {
    // Some candidates stay unused.
    if (std::uniform_int_distribution<int>(0, 4)(gen) == 0) continue;
    lines[i % static_cast<std::size_t>(k)].push_back(ids[i]);
  }
  std::erase_if(lines, [](const auto& l) { return l.empty(); });
  return lines;
}

inline std::vector<BusLine> to_bus_lines(const Scenario& s, const std::vector<std::vector<int>>& lines) {
  std::vector<BusLine> out;
  for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(make_bus_line(s, static_cast<int>(i) + 1, lines[i]));
  return out;
}

inline GraphInput input_for(const Scenario& s, const LineAssignment& st) {
  return build_features(s, st, realize_lines(s, st));
}

struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index size;
};

inline std::vector<TensorRef> tensors(QNetworkParams& p) {
  std::vector<TensorRef> out;
  p.for_each_tensor([&](const std::string& name, auto& t) { out.push_back({name, t.data(), t.size()}); });
  return out;
}

inline std::vector<const double*> grad_data(const QGradients& g) {
  std::vector<const double*> out;
  g.for_each_tensor([&](const std::string&, const auto& t) { out.push_back(t.data()); });
  return out;
}
std::vector<const double*> grad_data(QGradients&&) = delete;

// Random weights and biases whose pre-activations all stay clear of the
// ReLU kink, so central differences are valid.
inline QNetworkParams smooth_params(const QNetConfig& c, const GraphInput& in, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    QNetworkParams p = QNetworkParams::random(c, rng);
    for (auto& t : tensors(p))
      if (t.name.ends_with(".bias"))
        for (Eigen::Index i = 0; i < t.size; ++i) t.data[i] = rng.uniform(-0.5, 0.5);
    ForwardTrace tr;
    forward(p, in, &tr);
    double closest = tr.node_pre.size() ? tr.node_pre.cwiseAbs().minCoeff() : 1.0;
    if (tr.edge_pre.size()) closest = std::min(closest, tr.edge_pre.cwiseAbs().minCoeff());
    for (const auto& m : tr.msg_pre) closest = std::min(closest, m.cwiseAbs().minCoeff());
    for (const auto& u : tr.upd_pre) closest = std::min(closest, u.cwiseAbs().minCoeff());
    if (closest > 1e-3) return p;
  }
  throw std::runtime_error("could not draw kink-free parameters");
}

/// 1e-4 relative error with a 1e-7 absolute floor.
inline bool grad_close(double analytic, double numeric) {
  const double diff = std::fabs(analytic - numeric);
  return diff <= 1e-7 || diff / std::max(std::fabs(analytic), std::fabs(numeric)) <= 1e-4;
}

inline std::size_t action_index(const QValues& q, const Action& a) {
  for (std::size_t i = 0; i < q.actions.size(); ++i)
    if (q.actions[i] == a) return i;
  throw std::logic_error("action not found");
}

}  // namespace tnd::fixtures
