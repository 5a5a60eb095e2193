#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tnd/territory.hpp"

namespace tnd {

/// Headway in minutes of a line of length `length_km` served by `fleet`
/// vehicles at `speed_kmh`: the time one vehicle needs to cover the line,
/// divided among the fleet.
double compute_headway(double length_km, double speed_kmh, int fleet);

/// A designed bus line. `id` is 1-based; stops are in riding order.
struct BusLine {
  int id = 0;
  std::vector<int> ordered_stops;
  double length_km = 0.0;
  double headway_min = 0.0;

  friend bool operator==(const BusLine&, const BusLine&) = default;
};

/// Computes length and headway (plus the scenario's terminal time) for an
/// ordered list of candidate stops.
BusLine make_bus_line(const Scenario& scenario, int id, std::vector<int> ordered_stops);

enum class NodeKind : std::uint8_t { centroid, poi, stop, line_stop };
enum class EdgeKind : std::uint8_t { walk, board, ride, alight };

struct Edge {
  int to = 0;
  double minutes = 0.0;
  EdgeKind kind = EdgeKind::walk;
};

struct GraphOptions {
  /// Drop walking edges longer than this. Off by default: the full walking
  /// graph guarantees every PoI is reachable.
  std::optional<double> max_walk_km;
};

/// Multi-modal, time-weighted, directed graph.
///
/// Node layout: centroids, then PoIs, then physical stops (all in scenario
/// order), then one line-node per (stop, line) pair, metro lines first.
/// Waiting is paid on the board edge (stop -> line-node, half the headway),
/// so transfers between lines at a shared stop cost the next line's wait.
class RouterGraph {
 public:
  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_centroids() const { return num_centroids_; }
  std::size_t num_pois() const { return num_pois_; }
  std::size_t num_stops() const { return num_stops_; }
  std::size_t num_line_nodes() const { return line_node_stop_.size(); }

  std::span<const Edge> out_edges(int node) const {
    const auto b = offsets_[static_cast<std::size_t>(node)];
    const auto e = offsets_[static_cast<std::size_t>(node) + 1];
    return {edges_.data() + b, e - b};
  }

  int centroid_node(std::size_t i) const { return static_cast<int>(i); }
  int poi_node(std::size_t i) const { return static_cast<int>(num_centroids_ + i); }
  int stop_node(std::size_t i) const { return static_cast<int>(num_centroids_ + num_pois_ + i); }
  int first_line_node() const { return static_cast<int>(num_centroids_ + num_pois_ + num_stops_); }

  NodeKind kind(int node) const;

  /// For a line-node: the scenario stop index it belongs to.
  std::size_t line_node_stop(int node) const {
    return line_node_stop_[static_cast<std::size_t>(node - first_line_node())];
  }
  /// For a line-node: metro lines are 0..M-1, bus lines follow.
  int line_node_line(int node) const {
    return line_node_line_[static_cast<std::size_t>(node - first_line_node())];
  }

 private:
  friend RouterGraph build_router_graph(const Scenario&, std::span<const BusLine>,
                                        const GraphOptions&);

  std::size_t num_centroids_ = 0;
  std::size_t num_pois_ = 0;
  std::size_t num_stops_ = 0;
  std::vector<std::size_t> line_node_stop_;
  std::vector<int> line_node_line_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Edge> edges_;
};

/// Builds G(S) for the scenario's metro network plus `lines`.
/// Throws InvalidAssignmentError if a stop is on two bus lines, twice on one
/// line, or is not a bus-candidate stop.
RouterGraph build_router_graph(const Scenario& scenario, std::span<const BusLine> lines,
                               const GraphOptions& options = {});

}  // namespace tnd
