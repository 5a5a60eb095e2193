#pragma once

#include <vector>

#include "tnd/design_mdp.hpp"
#include "tnd/rng.hpp"

namespace tnd {

/// GA individual: a permutation of candidate stop ids cut into k
/// consecutive segments, one per line. cuts holds the k-1 interior
/// boundaries; segment j spans [cuts[j-1], cuts[j]).
struct Genome {
  std::vector<int> order;
  std::vector<int> cuts;

  friend bool operator==(const Genome&, const Genome&) = default;
};

/// Segments in the order they appear, lines concatenated.
Genome genome_from_state(const LineAssignment& state);

/// Throws ValidationError if the genome does not decode to a valid partition.
LineAssignment decode(const Genome& genome, int num_lines);

/// Validity check used by property tests: order is a permutation of
/// `stop_ids` and every segment is non-empty.
bool is_valid_genome(const Genome& genome, std::span<const int> stop_ids, int num_lines);

/// Order crossover (OX1) on permutations: the child keeps parent_a's slice
/// [first, last] in place and fills the remaining slots, starting after
/// `last` and wrapping around, with parent_b's genes in parent_b's cyclic
/// order starting after `last`.
std::vector<int> order_crossover(std::span<const int> parent_a, std::span<const int> parent_b,
                                 std::size_t first, std::size_t last);

/// OX1 with a random slice; cut points are inherited from parent_a.
Genome crossover(const Genome& parent_a, const Genome& parent_b, Rng& rng);

/// Each position swaps with a random other position with probability
/// p_mutation; each cut moves by +-1 with probability p_mutation. The result
/// is repaired.
void mutate(Genome& genome, double p_mutation, Rng& rng);

/// Restores non-empty segments. An empty segment takes one stop from its
/// larger adjacent segment (left on ties); if neither neighbour can spare a
/// stop, cuts are clamped to the nearest strictly increasing sequence.
void repair(Genome& genome);

/// Rewrites each segment in its sorted riding order.
void sort_segments(Genome& genome, const std::vector<std::vector<int>>& sorted_lines);

}  // namespace tnd
