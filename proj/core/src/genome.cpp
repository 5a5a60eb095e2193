#include "tnd/genome.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "tnd/error.hpp"

namespace tnd {

Genome genome_from_state(const LineAssignment& state) {
  Genome g;
  const auto lines = state.lines();
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (l > 0) g.cuts.push_back(static_cast<int>(g.order.size()));
    g.order.insert(g.order.end(), lines[l].begin(), lines[l].end());
  }
  return g;
}

namespace {

std::vector<int> segment_bounds(const Genome& g) {
  std::vector<int> bounds{0};
  bounds.insert(bounds.end(), g.cuts.begin(), g.cuts.end());
  bounds.push_back(static_cast<int>(g.order.size()));
  return bounds;
}

}  // namespace

LineAssignment decode(const Genome& genome, int num_lines) {
  if (static_cast<int>(genome.cuts.size()) != num_lines - 1)
    throw ValidationError("genome has " + std::to_string(genome.cuts.size()) + " cuts for " +
                          std::to_string(num_lines) + " lines");
  const auto bounds = segment_bounds(genome);
  std::vector<std::vector<int>> lines(static_cast<std::size_t>(num_lines));
  for (int l = 0; l < num_lines; ++l) {
    const int lo = bounds[static_cast<std::size_t>(l)];
    const int hi = bounds[static_cast<std::size_t>(l) + 1];
    if (lo < 0 || hi > static_cast<int>(genome.order.size()) || lo >= hi)
      throw ValidationError("genome segment " + std::to_string(l + 1) + " is empty");
    lines[static_cast<std::size_t>(l)].assign(genome.order.begin() + lo, genome.order.begin() + hi);
  }
  return LineAssignment::from_lines(lines);
}

bool is_valid_genome(const Genome& genome, std::span<const int> stop_ids, int num_lines) {
  if (genome.order.size() != stop_ids.size()) return false;
  std::vector<int> sorted = genome.order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(stop_ids.begin(), stop_ids.end());
  std::sort(expected.begin(), expected.end());
  if (sorted != expected) return false;
  if (static_cast<int>(genome.cuts.size()) != num_lines - 1) return false;
  const auto bounds = segment_bounds(genome);
  for (std::size_t i = 1; i < bounds.size(); ++i)
    if (bounds[i - 1] >= bounds[i]) return false;
  return true;
}

std::vector<int> order_crossover(std::span<const int> a, std::span<const int> b, std::size_t first,
                                 std::size_t last) {
  const std::size_t n = a.size();
  if (b.size() != n || first > last || last >= n)
    throw ValidationError("order_crossover: bad parents or slice");
  std::vector<int> child(n);
  std::unordered_set<int> kept;
  for (std::size_t i = first; i <= last; ++i) {
    child[i] = a[i];
    kept.insert(a[i]);
  }
  std::size_t write = (last + 1) % n;
  for (std::size_t step = 0; step < n; ++step) {
    const int gene = b[(last + 1 + step) % n];
    if (kept.count(gene)) continue;
    child[write] = gene;
    write = (write + 1) % n;
  }
  return child;
}

Genome crossover(const Genome& a, const Genome& b, Rng& rng) {
  const std::size_t n = a.order.size();
  std::size_t i = rng.index(n);
  std::size_t j = rng.index(n);
  if (i > j) std::swap(i, j);
  return {order_crossover(a.order, b.order, i, j), a.cuts};
}

void mutate(Genome& g, double p_mutation, Rng& rng) {
  const std::size_t n = g.order.size();
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!rng.bernoulli(p_mutation)) continue;
      std::size_t j = rng.index(n - 1);
      if (j >= i) ++j;
      std::swap(g.order[i], g.order[j]);
    }
  }
  for (auto& cut : g.cuts)
    if (rng.bernoulli(p_mutation)) cut += rng.bernoulli(0.5) ? 1 : -1;
  std::sort(g.cuts.begin(), g.cuts.end());
  repair(g);
}

void repair(Genome& g) {
  const int n = static_cast<int>(g.order.size());
  const int k = static_cast<int>(g.cuts.size()) + 1;
  if (n < k) throw ValidationError("genome has fewer stops than lines");
  for (auto& cut : g.cuts) cut = std::clamp(cut, 0, n);
  std::sort(g.cuts.begin(), g.cuts.end());

  auto size_of = [&](int seg) {
    const int lo = seg == 0 ? 0 : g.cuts[static_cast<std::size_t>(seg - 1)];
    const int hi = seg == k - 1 ? n : g.cuts[static_cast<std::size_t>(seg)];
    return hi - lo;
  };

  for (int guard = 0; guard < 2 * k; ++guard) {
    int empty = -1;
    for (int s = 0; s < k; ++s)
      if (size_of(s) == 0) {
        empty = s;
        break;
      }
    if (empty < 0) return;
    const int left = empty > 0 ? size_of(empty - 1) : -1;
    const int right = empty < k - 1 ? size_of(empty + 1) : -1;
    if (std::max(left, right) < 2) break;
    if (left >= right)
      --g.cuts[static_cast<std::size_t>(empty - 1)];  // take the last stop of the left segment
    else
      ++g.cuts[static_cast<std::size_t>(empty)];      // take the first stop of the right segment
  }

  // Fallback: nearest strictly increasing cuts within [1, n-1].
  for (int j = 0; j < k - 1; ++j) {
    const int lo = j == 0 ? 1 : g.cuts[static_cast<std::size_t>(j - 1)] + 1;
    g.cuts[static_cast<std::size_t>(j)] = std::max(g.cuts[static_cast<std::size_t>(j)], lo);
  }
  for (int j = k - 2; j >= 0; --j) {
    const int hi = j == k - 2 ? n - 1 : g.cuts[static_cast<std::size_t>(j + 1)] - 1;
    g.cuts[static_cast<std::size_t>(j)] = std::min(g.cuts[static_cast<std::size_t>(j)], hi);
  }
}

void sort_segments(Genome& g, const std::vector<std::vector<int>>& sorted_lines) {
  std::vector<int> order;
  std::vector<int> cuts;
  for (std::size_t l = 0; l < sorted_lines.size(); ++l) {
    if (l > 0) cuts.push_back(static_cast<int>(order.size()));
    order.insert(order.end(), sorted_lines[l].begin(), sorted_lines[l].end());
  }
  if (order.size() != g.order.size()) throw ValidationError("sorted lines do not match genome");
  g.order = std::move(order);
  g.cuts = std::move(cuts);
}

}  // namespace tnd
