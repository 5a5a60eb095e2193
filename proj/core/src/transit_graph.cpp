#include "tnd/transit_graph.hpp"

#include <string>
#include <unordered_map>

#include "tnd/error.hpp"

namespace tnd {

double compute_headway(double length_km, double speed_kmh, int fleet) {
  return 60.0 * length_km / (speed_kmh * fleet);
}

namespace {

std::unordered_map<int, std::size_t> stop_index_map(const Scenario& s) {
  std::unordered_map<int, std::size_t> index;
  index.reserve(s.stops.size());
  for (std::size_t i = 0; i < s.stops.size(); ++i) index.emplace(s.stops[i].id, i);
  return index;
}

}  // namespace

BusLine make_bus_line(const Scenario& scenario, int id, std::vector<int> ordered_stops) {
  const auto index = stop_index_map(scenario);
  double length = 0.0;
  for (std::size_t i = 1; i < ordered_stops.size(); ++i) {
    auto a = index.find(ordered_stops[i - 1]);
    auto b = index.find(ordered_stops[i]);
    if (a == index.end() || b == index.end())
      throw InvalidAssignmentError("bus line " + std::to_string(id) + " references unknown stop");
    length += distance_km(scenario.stops[a->second].location, scenario.stops[b->second].location);
  }
  BusLine line;
  line.id = id;
  line.ordered_stops = std::move(ordered_stops);
  line.length_km = length;
  line.headway_min =
      compute_headway(length, scenario.params.bus_speed_kmh, scenario.params.fleet_per_line) +
      scenario.params.terminal_time_min;
  return line;
}

NodeKind RouterGraph::kind(int node) const {
  const auto n = static_cast<std::size_t>(node);
  if (n < num_centroids_) return NodeKind::centroid;
  if (n < num_centroids_ + num_pois_) return NodeKind::poi;
  if (n < num_centroids_ + num_pois_ + num_stops_) return NodeKind::stop;
  return NodeKind::line_stop;
}

RouterGraph build_router_graph(const Scenario& s, std::span<const BusLine> lines,
                               const GraphOptions& options) {
  const auto index = stop_index_map(s);

  // Validate bus lines before touching the graph.
  std::vector<int> owner(s.stops.size(), 0);
  for (const auto& line : lines) {
    if (line.ordered_stops.empty())
      throw InvalidAssignmentError("bus line " + std::to_string(line.id) + " has no stops");
    for (int id : line.ordered_stops) {
      auto it = index.find(id);
      if (it == index.end())
        throw InvalidAssignmentError("bus line " + std::to_string(line.id) +
                                     " references unknown stop " + std::to_string(id));
      if (s.stops[it->second].kind != StopKind::bus_candidate)
        throw InvalidAssignmentError("stop " + std::to_string(id) + " is not a bus candidate");
      if (owner[it->second] != 0)
        throw InvalidAssignmentError("stop " + std::to_string(id) + " is on bus lines " +
                                     std::to_string(owner[it->second]) + " and " +
                                     std::to_string(line.id));
      owner[it->second] = line.id == 0 ? -1 : line.id;
    }
  }

  RouterGraph g;
  g.num_centroids_ = s.centroids.size();
  g.num_pois_ = s.pois.size();
  g.num_stops_ = s.stops.size();

  struct LineView {
    std::vector<std::size_t> stops;  // scenario stop indices
    double speed_kmh;
    double headway_min;
    bool operating;
  };
  std::vector<LineView> views;
  views.reserve(s.metro_lines.size() + lines.size());
  for (const auto& m : s.metro_lines) {
    LineView v{{}, s.params.metro_speed_kmh, m.headway_min, m.stops.size() >= 2};
    for (int id : m.stops) v.stops.push_back(index.at(id));
    views.push_back(std::move(v));
  }
  for (const auto& b : lines) {
    LineView v{{}, s.params.bus_speed_kmh, b.headway_min, b.ordered_stops.size() >= 2};
    for (int id : b.ordered_stops) v.stops.push_back(index.at(id));
    views.push_back(std::move(v));
  }

  const int first_line_node = g.first_line_node();
  std::vector<std::vector<std::size_t>> line_nodes(views.size());
  for (std::size_t l = 0; l < views.size(); ++l) {
    for (std::size_t stop : views[l].stops) {
      line_nodes[l].push_back(g.line_node_stop_.size());
      g.line_node_stop_.push_back(stop);
      g.line_node_line_.push_back(static_cast<int>(l));
    }
  }

  const std::size_t n_nodes = g.num_centroids_ + g.num_pois_ + g.num_stops_ + g.line_node_stop_.size();
  std::vector<std::vector<Edge>> adj(n_nodes);

  const double walk = s.params.walk_speed_kmh;
  auto walk_ok = [&](const Point& a, const Point& b) {
    return !options.max_walk_km || distance_km(a, b) <= *options.max_walk_km;
  };

  for (std::size_t c = 0; c < s.centroids.size(); ++c) {
    auto& out = adj[static_cast<std::size_t>(g.centroid_node(c))];
    const Point& from = s.centroids[c].location;
    out.reserve(s.stops.size() + s.pois.size());
    for (std::size_t i = 0; i < s.stops.size(); ++i)
      if (walk_ok(from, s.stops[i].location))
        out.push_back({g.stop_node(i), euclidean_minutes(from, s.stops[i].location, walk), EdgeKind::walk});
    for (std::size_t p = 0; p < s.pois.size(); ++p)
      if (walk_ok(from, s.pois[p].location))
        out.push_back({g.poi_node(p), euclidean_minutes(from, s.pois[p].location, walk), EdgeKind::walk});
  }
  for (std::size_t i = 0; i < s.stops.size(); ++i) {
    auto& out = adj[static_cast<std::size_t>(g.stop_node(i))];
    const Point& from = s.stops[i].location;
    out.reserve(s.pois.size());
    for (std::size_t p = 0; p < s.pois.size(); ++p)
      if (walk_ok(from, s.pois[p].location))
        out.push_back({g.poi_node(p), euclidean_minutes(from, s.pois[p].location, walk), EdgeKind::walk});
  }

  for (std::size_t l = 0; l < views.size(); ++l) {
    const auto& v = views[l];
    if (!v.operating) continue;
    const double wait = 0.5 * v.headway_min;
    for (std::size_t k = 0; k < v.stops.size(); ++k) {
      const int ln = first_line_node + static_cast<int>(line_nodes[l][k]);
      const int street = g.stop_node(v.stops[k]);
      adj[static_cast<std::size_t>(street)].push_back({ln, wait, EdgeKind::board});
      adj[static_cast<std::size_t>(ln)].push_back({street, 0.0, EdgeKind::alight});
      if (k + 1 < v.stops.size()) {
        const int next = first_line_node + static_cast<int>(line_nodes[l][k + 1]);
        const double ride = euclidean_minutes(s.stops[v.stops[k]].location,
                                              s.stops[v.stops[k + 1]].location, v.speed_kmh);
        adj[static_cast<std::size_t>(ln)].push_back({next, ride, EdgeKind::ride});
        adj[static_cast<std::size_t>(next)].push_back({ln, ride, EdgeKind::ride});
      }
    }
  }

  g.offsets_.assign(n_nodes + 1, 0);
  for (std::size_t n = 0; n < n_nodes; ++n) g.offsets_[n + 1] = g.offsets_[n] + adj[n].size();
  g.edges_.reserve(g.offsets_.back());
  for (auto& out : adj) g.edges_.insert(g.edges_.end(), out.begin(), out.end());
  return g;
}

}  // namespace tnd
