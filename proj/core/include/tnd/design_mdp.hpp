#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "tnd/rng.hpp"
#include "tnd/territory.hpp"
#include "tnd/transit_graph.hpp"

namespace tnd {

struct Action;

/// MDP state: every candidate stop is assigned to exactly one of k lines and
/// no line is empty. Lines are 0-based here; BusLine ids are line + 1.
class LineAssignment {
 public:
  /// `stop_ids` must be strictly ascending; `line_of[i]` is the line of
  /// stop_ids[i]. Throws ValidationError on any invariant violation.
  LineAssignment(std::vector<int> stop_ids, std::vector<int> line_of, int num_lines);

  /// Builds from explicit per-line stop sets (any order inside a line).
  static LineAssignment from_lines(const std::vector<std::vector<int>>& lines);

  int num_lines() const { return num_lines_; }
  std::size_t num_stops() const { return line_of_.size(); }
  std::span<const int> stop_ids() const { return *stop_ids_; }
  std::span<const int> line_of() const { return line_of_; }

  /// Position of `stop_id` in stop_ids(); throws if it is not a candidate.
  std::size_t index_of(int stop_id) const;
  int line_of_stop(int stop_id) const { return line_of_[index_of(stop_id)]; }
  std::vector<int> line_sizes() const;
  /// Stop ids per line, ascending.
  std::vector<std::vector<int>> lines() const;

  std::uint64_t hash() const;

  friend bool operator==(const LineAssignment& a, const LineAssignment& b) {
    return a.num_lines_ == b.num_lines_ && a.line_of_ == b.line_of_ &&
           (a.stop_ids_ == b.stop_ids_ || *a.stop_ids_ == *b.stop_ids_);
  }

 private:
  LineAssignment() = default;
  friend LineAssignment apply_action(const LineAssignment&, const Action&);

  std::shared_ptr<const std::vector<int>> stop_ids_;
  std::vector<int> line_of_;
  int num_lines_ = 0;
};

struct LineAssignmentHash {
  std::size_t operator()(const LineAssignment& a) const { return static_cast<std::size_t>(a.hash()); }
};

/// Move `stop_id` onto `target_line` (0-based).
struct Action {
  int stop_id = 0;
  int target_line = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

bool is_admissible(const LineAssignment& state, const Action& action);

/// Throws InadmissibleActionError for own-line moves and for moves that
/// would leave a line empty.
LineAssignment apply_action(const LineAssignment& state, const Action& action);

/// All admissible actions, ordered by stop position then target line.
std::vector<Action> enumerate_actions(const LineAssignment& state);

/// Uniform over all assignments of the scenario's candidates to
/// params.num_lines lines with no empty line.
LineAssignment random_state(const Scenario& scenario, Rng& rng);
LineAssignment random_state(const Scenario& scenario, std::uint64_t seed);
LineAssignment random_state(std::span<const int> stop_ids, int num_lines, Rng& rng);

struct LocatedStop {
  int id = 0;
  Point location;
};

double path_length_km(std::span<const LocatedStop> ordered);

/// Visiting order for one line: nearest-neighbour from every possible start,
/// keeping the shortest open path. Ties go to the smaller stop id.
std::vector<int> sort_line(std::span<const LocatedStop> stops);

struct RealizedState {
  std::vector<BusLine> lines;
  RouterGraph graph;
};

/// Sorts each line, computes lengths and headways, builds G(S).
RealizedState realize_state(const Scenario& scenario, const LineAssignment& state,
                            const GraphOptions& options = {});

/// Sorted bus lines without building the graph.
std::vector<BusLine> realize_lines(const Scenario& scenario, const LineAssignment& state);

/// acc^q(G(S')) - acc^q(G(S)), recomputed from scratch on both states.
double reward(const Scenario& scenario, const LineAssignment& state, const Action& action,
              double q_percent);

/// acc^q(G(S)).
double state_value(const Scenario& scenario, const LineAssignment& state, double q_percent,
                   unsigned threads = 1);

}  // namespace tnd
