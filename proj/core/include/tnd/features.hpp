#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tnd/design_mdp.hpp"
#include "tnd/territory.hpp"
#include "tnd/transit_graph.hpp"

namespace tnd {

using AdjacencyMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Feature width for k lines: x, y, one-hot line (k), distance to the nearest
/// metro station, walk-only PoI proximity, headway of the stop's line.
constexpr int feature_dim_for(int num_lines) { return num_lines + 5; }

/// Network input for one state. Columns of `features` and rows/columns of
/// `adjacency` follow state.stop_ids().
struct GraphInput {
  Eigen::MatrixXd features;  // feature_dim x n_b
  AdjacencyMatrix adjacency; // (i, j) = 1 iff stop i directly precedes stop j on a line
  std::vector<std::vector<int>> neighbors;  // union of in- and out-neighbours
  LineAssignment state;
};

/// Precomputes the assignment-independent part of the features.
class FeatureBuilder {
 public:
  explicit FeatureBuilder(const Scenario& scenario);

  /// `lines` must be the realised (sorted) lines of `state`.
  GraphInput build(const LineAssignment& state, std::span<const BusLine> lines) const;

  int feature_dim() const { return feature_dim_for(num_lines_); }

 private:
  std::vector<int> stop_ids_;
  std::vector<double> x_norm_, y_norm_, metro_norm_, proximity_;
  double t_max_min_ = 1.0;
  int num_lines_ = 1;
};

GraphInput build_features(const Scenario& scenario, const LineAssignment& state,
                          std::span<const BusLine> lines);

/// Neighbour lists from a directed adjacency matrix (both directions).
std::vector<std::vector<int>> neighbors_from_adjacency(const AdjacencyMatrix& adjacency);

}  // namespace tnd
