#include "tnd/design_mdp.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

#include "tnd/accessibility.hpp"
#include "tnd/error.hpp"

namespace tnd {

LineAssignment::LineAssignment(std::vector<int> stop_ids, std::vector<int> line_of, int num_lines)
    : line_of_(std::move(line_of)), num_lines_(num_lines) {
  if (num_lines < 1) throw ValidationError("assignment needs at least one line");
  if (stop_ids.size() != line_of_.size())
    throw ValidationError("assignment: stop ids and line indices differ in length");
  for (std::size_t i = 1; i < stop_ids.size(); ++i)
    if (stop_ids[i - 1] >= stop_ids[i])
      throw ValidationError("assignment: stop ids must be strictly ascending");
  std::vector<int> sizes(static_cast<std::size_t>(num_lines), 0);
  for (int l : line_of_) {
    if (l < 0 || l >= num_lines)
      throw ValidationError("assignment: line index " + std::to_string(l) + " out of range");
    ++sizes[static_cast<std::size_t>(l)];
  }
  for (std::size_t l = 0; l < sizes.size(); ++l)
    if (sizes[l] == 0) throw ValidationError("assignment: line " + std::to_string(l + 1) + " is empty");
  stop_ids_ = std::make_shared<const std::vector<int>>(std::move(stop_ids));
}

LineAssignment LineAssignment::from_lines(const std::vector<std::vector<int>>& lines) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t l = 0; l < lines.size(); ++l)
    for (int id : lines[l]) pairs.emplace_back(id, static_cast<int>(l));
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> ids, line_of;
  for (const auto& [id, l] : pairs) {
    if (!ids.empty() && ids.back() == id)
      throw ValidationError("assignment: stop " + std::to_string(id) + " appears twice");
    ids.push_back(id);
    line_of.push_back(l);
  }
  return LineAssignment(std::move(ids), std::move(line_of), static_cast<int>(lines.size()));
}

std::size_t LineAssignment::index_of(int stop_id) const {
  const auto& ids = *stop_ids_;
  auto it = std::lower_bound(ids.begin(), ids.end(), stop_id);
  if (it == ids.end() || *it != stop_id)
    throw ValidationError("stop " + std::to_string(stop_id) + " is not a candidate stop");
  return static_cast<std::size_t>(it - ids.begin());
}

std::vector<int> LineAssignment::line_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(num_lines_), 0);
  for (int l : line_of_) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

std::vector<std::vector<int>> LineAssignment::lines() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_lines_));
  for (std::size_t i = 0; i < line_of_.size(); ++i)
    out[static_cast<std::size_t>(line_of_[i])].push_back((*stop_ids_)[i]);
  return out;
}

std::uint64_t LineAssignment::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(num_lines_);
  for (int l : line_of_) {
    h ^= static_cast<std::uint64_t>(l) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_admissible(const LineAssignment& state, const Action& action) {
  if (action.target_line < 0 || action.target_line >= state.num_lines()) return false;
  const auto ids = state.stop_ids();
  auto it = std::lower_bound(ids.begin(), ids.end(), action.stop_id);
  if (it == ids.end() || *it != action.stop_id) return false;
  const int current = state.line_of()[static_cast<std::size_t>(it - ids.begin())];
  if (current == action.target_line) return false;
  return state.line_sizes()[static_cast<std::size_t>(current)] > 1;
}

LineAssignment apply_action(const LineAssignment& state, const Action& action) {
  if (action.target_line < 0 || action.target_line >= state.num_lines())
    throw InadmissibleActionError("target line " + std::to_string(action.target_line + 1) +
                                  " does not exist");
  const std::size_t i = state.index_of(action.stop_id);
  const int current = state.line_of_[i];
  if (current == action.target_line)
    throw InadmissibleActionError("stop " + std::to_string(action.stop_id) +
                                  " is already on line " + std::to_string(current + 1));
  if (state.line_sizes()[static_cast<std::size_t>(current)] == 1)
    throw InadmissibleActionError("moving stop " + std::to_string(action.stop_id) +
                                  " would empty line " + std::to_string(current + 1));
  LineAssignment next;
  next.stop_ids_ = state.stop_ids_;
  next.line_of_ = state.line_of_;
  next.num_lines_ = state.num_lines_;
  next.line_of_[i] = action.target_line;
  return next;
}

std::vector<Action> enumerate_actions(const LineAssignment& state) {
  std::vector<Action> actions;
  const auto sizes = state.line_sizes();
  const auto ids = state.stop_ids();
  const auto line_of = state.line_of();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int current = line_of[i];
    if (sizes[static_cast<std::size_t>(current)] <= 1) continue;
    for (int t = 0; t < state.num_lines(); ++t)
      if (t != current) actions.push_back({ids[i], t});
  }
  return actions;
}

LineAssignment random_state(std::span<const int> stop_ids, int num_lines, Rng& rng) {
  const std::size_t n = stop_ids.size();
  const auto k = static_cast<std::size_t>(num_lines);
  if (num_lines < 1 || n < k) throw ValidationError("random_state needs at least one stop per line");

  // cover[r][e]: probability that r uniformly assigned stops hit all of e
  // specific lines. Sampling each stop proportionally to the coverage
  // probability of what remains yields the uniform law conditioned on no
  // empty line, without rejection.
  std::vector<std::vector<double>> cover(n + 1, std::vector<double>(k + 1, 0.0));
  cover[0][0] = 1.0;
  for (std::size_t r = 1; r <= n; ++r)
    for (std::size_t e = 0; e <= k; ++e)
      cover[r][e] = (static_cast<double>(k - e) / k) * cover[r - 1][e] +
                    (e > 0 ? (static_cast<double>(e) / k) * cover[r - 1][e - 1] : 0.0);

  std::vector<bool> used(k, false);
  std::size_t empty = k;
  std::vector<int> line_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t remaining = n - i - 1;
    const double w_used = cover[remaining][empty];
    const double w_empty = empty > 0 ? cover[remaining][empty - 1] : 0.0;
    std::vector<double> weight(k);
    double total = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      weight[l] = used[l] ? w_used : w_empty;
      total += weight[l];
    }
    double u = rng.uniform01() * total;
    std::size_t pick = k;
    for (std::size_t l = 0; l < k; ++l) {
      if (weight[l] <= 0.0) continue;
      pick = l;
      if (u < weight[l]) break;
      u -= weight[l];
    }
    if (!used[pick]) {
      used[pick] = true;
      --empty;
    }
    line_of[i] = static_cast<int>(pick);
  }
  return LineAssignment(std::vector<int>(stop_ids.begin(), stop_ids.end()), std::move(line_of), num_lines);
}

LineAssignment random_state(const Scenario& scenario, Rng& rng) {
  const auto ids = scenario.candidate_stop_ids();
  return random_state(ids, scenario.params.num_lines, rng);
}

LineAssignment random_state(const Scenario& scenario, std::uint64_t seed) {
  Rng rng(seed);
  return random_state(scenario, rng);
}

double path_length_km(std::span<const LocatedStop> ordered) {
  double length = 0.0;
  for (std::size_t i = 1; i < ordered.size(); ++i)
    length += distance_km(ordered[i - 1].location, ordered[i].location);
  return length;
}

std::vector<int> sort_line(std::span<const LocatedStop> input) {
  if (input.empty()) throw ValidationError("sort_line: no stops");
  std::vector<LocatedStop> stops(input.begin(), input.end());
  std::sort(stops.begin(), stops.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const std::size_t n = stops.size();
  if (n <= 2) {
    std::vector<int> ids;
    for (const auto& s : stops) ids.push_back(s.id);
    return ids;
  }

  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = distance_km(stops[i].location, stops[j].location);

  std::vector<std::size_t> best_order;
  double best_length = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order;
  std::vector<bool> visited(n);
  for (std::size_t start = 0; start < n; ++start) {
    order.assign(1, start);
    std::fill(visited.begin(), visited.end(), false);
    visited[start] = true;
    double length = 0.0;
    std::size_t current = start;
    for (std::size_t step = 1; step < n; ++step) {
      std::size_t next = n;
      double next_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (visited[j]) continue;
        const double d = dist[current * n + j];
        if (d < next_d) {
          next_d = d;
          next = j;
        }
      }
      visited[next] = true;
      order.push_back(next);
      length += next_d;
      current = next;
      if (length >= best_length) break;
    }
    if (order.size() == n && length < best_length) {
      best_length = length;
      best_order = order;
    }
  }

  std::vector<int> ids;
  ids.reserve(n);
  for (std::size_t i : best_order) ids.push_back(stops[i].id);
  return ids;
}

std::vector<BusLine> realize_lines(const Scenario& scenario, const LineAssignment& state) {
  std::unordered_map<int, Point> where;
  where.reserve(scenario.stops.size());
  for (const auto& s : scenario.stops) where.emplace(s.id, s.location);

  std::vector<BusLine> lines;
  lines.reserve(static_cast<std::size_t>(state.num_lines()));
  const auto members = state.lines();
  for (std::size_t l = 0; l < members.size(); ++l) {
    std::vector<LocatedStop> located;
    located.reserve(members[l].size());
    for (int id : members[l]) {
      auto it = where.find(id);
      if (it == where.end()) throw InvalidAssignmentError("unknown stop " + std::to_string(id));
      located.push_back({id, it->second});
    }
    lines.push_back(make_bus_line(scenario, static_cast<int>(l) + 1, sort_line(located)));
  }
  return lines;
}

RealizedState realize_state(const Scenario& scenario, const LineAssignment& state,
                            const GraphOptions& options) {
  RealizedState out;
  out.lines = realize_lines(scenario, state);
  out.graph = build_router_graph(scenario, out.lines, options);
  return out;
}

double state_value(const Scenario& scenario, const LineAssignment& state, double q_percent,
                   unsigned threads) {
  const auto realized = realize_state(scenario, state);
  const auto acc = per_centroid_accessibility(scenario, realized.graph, threads);
  std::vector<int> ids;
  ids.reserve(scenario.centroids.size());
  for (const auto& c : scenario.centroids) ids.push_back(c.id);
  return quantile_accessibility(acc, ids, q_percent);
}

double reward(const Scenario& scenario, const LineAssignment& state, const Action& action,
              double q_percent) {
  const auto next = apply_action(state, action);
  return state_value(scenario, next, q_percent) - state_value(scenario, state, q_percent);
}

}  // namespace tnd
