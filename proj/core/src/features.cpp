#include "tnd/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "tnd/error.hpp"

namespace tnd {

FeatureBuilder::FeatureBuilder(const Scenario& s)
    : stop_ids_(s.candidate_stop_ids()),
      t_max_min_(s.params.t_max_min),
      num_lines_(s.params.num_lines) {
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  auto extend = [&](const Point& p) {
    min_x = std::min(min_x, p.x_km);
    max_x = std::max(max_x, p.x_km);
    min_y = std::min(min_y, p.y_km);
    max_y = std::max(max_y, p.y_km);
  };
  for (const auto& c : s.centroids) extend(c.location);
  for (const auto& p : s.pois) extend(p.location);
  for (const auto& st : s.stops) extend(st.location);
  const double span_x = max_x - min_x;
  const double span_y = max_y - min_y;
  const double diagonal = std::hypot(span_x, span_y);

  std::unordered_map<int, Point> where;
  std::vector<Point> metro;
  for (const auto& st : s.stops) {
    where.emplace(st.id, st.location);
    if (st.kind == StopKind::metro) metro.push_back(st.location);
  }
  const double total_weight = s.total_poi_weight();

  for (int id : stop_ids_) {
    const Point p = where.at(id);
    x_norm_.push_back(span_x > 0 ? (p.x_km - min_x) / span_x : 0.0);
    y_norm_.push_back(span_y > 0 ? (p.y_km - min_y) / span_y : 0.0);

    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& m : metro) nearest = std::min(nearest, distance_km(p, m));
    metro_norm_.push_back(metro.empty() || diagonal <= 0 ? 1.0 : std::min(1.0, nearest / diagonal));

    double proximity = 0.0;
    for (const auto& poi : s.pois)
      proximity += poi.weight *
                   std::max(0.0, 1.0 - euclidean_minutes(p, poi.location, s.params.walk_speed_kmh) /
                                           s.params.t_max_min);
    proximity_.push_back(total_weight > 0 ? proximity / total_weight : 0.0);
  }
}

GraphInput FeatureBuilder::build(const LineAssignment& state, std::span<const BusLine> lines) const {
  if (state.num_lines() != num_lines_)
    throw ConfigurationError("state has " + std::to_string(state.num_lines()) +
                             " lines, features expect " + std::to_string(num_lines_));
  const auto ids = state.stop_ids();
  if (!std::equal(ids.begin(), ids.end(), stop_ids_.begin(), stop_ids_.end()))
    throw ConfigurationError("state does not cover the scenario's candidate stops");

  const auto n = static_cast<Eigen::Index>(ids.size());
  GraphInput in{Eigen::MatrixXd::Zero(feature_dim(), n), AdjacencyMatrix::Zero(n, n), {}, state};

  std::vector<double> headway(static_cast<std::size_t>(num_lines_), 0.0);
  for (const auto& line : lines) {
    if (line.id < 1 || line.id > num_lines_) throw ConfigurationError("bus line id out of range");
    headway[static_cast<std::size_t>(line.id - 1)] = line.headway_min;
    for (std::size_t k = 1; k < line.ordered_stops.size(); ++k) {
      const auto a = static_cast<Eigen::Index>(state.index_of(line.ordered_stops[k - 1]));
      const auto b = static_cast<Eigen::Index>(state.index_of(line.ordered_stops[k]));
      in.adjacency(a, b) = 1;
    }
  }

  const auto line_of = state.line_of();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const int l = line_of[u];
    in.features(0, i) = x_norm_[u];
    in.features(1, i) = y_norm_[u];
    in.features(2 + l, i) = 1.0;
    in.features(2 + num_lines_, i) = metro_norm_[u];
    in.features(3 + num_lines_, i) = proximity_[u];
    in.features(4 + num_lines_, i) = headway[static_cast<std::size_t>(l)] / t_max_min_;
  }
  in.neighbors = neighbors_from_adjacency(in.adjacency);
  return in;
}

GraphInput build_features(const Scenario& scenario, const LineAssignment& state,
                          std::span<const BusLine> lines) {
  return FeatureBuilder(scenario).build(state, lines);
}

std::vector<std::vector<int>> neighbors_from_adjacency(const AdjacencyMatrix& adjacency) {
  const auto n = adjacency.rows();
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index u = 0; u < n; ++u)
      if (u != b && (adjacency(u, b) != 0 || adjacency(b, u) != 0))
        out[static_cast<std::size_t>(b)].push_back(static_cast<int>(u));
  return out;
}

}  // namespace tnd
