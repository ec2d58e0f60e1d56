#pragma once

// Recursive-refinement primitives: condition-set search at a fixed order,
// orientation, and autonomous-set splitting. The recursive drivers (single
// CPDAG and bootstrap tree) live in ggt.hpp.

#include <atomic>
#include <cstdint>
#include <vector>

#include "brai/citest.hpp"
#include "brai/common.hpp"
#include "brai/dataset.hpp"
#include "brai/graph.hpp"
#include "brai/score.hpp"

namespace brai {

// One recursion frame: endogenous variables under study, exogenous context
// (their learned ancestors), the condition-set order, and the working graph.
struct RaiScope {
  std::vector<int> endo;  // sorted
  std::vector<int> exo;   // sorted, disjoint from endo
  int order = 0;
  ChainGraph graph;
};

// Shared state across a whole learning run. Caches are keyed by dataset id,
// so tests on a bootstrap sample never leak into another sample or the full
// data. Orientation conflicts are counted, not fatal.
struct LearnContext {
  CiCache ci_cache;
  ScoreCache score_cache;
  CiBudget budget;
  std::atomic<int64_t> orientation_conflicts{0};
};

namespace detail {

// Condition-set candidates for tests anchored at x, and the per-node count
// behind the exit test: the adjacency pool of x within the scope. Children
// are included; under finite-sample noise edges get oriented off wobbly
// sepsets, and a pool of potential parents only would strand pairs whose
// separating sets sit behind such an orientation.
inline std::vector<int> candidate_pool(const ChainGraph& g, int x,
                                       const std::vector<int>& scope_sorted) {
  std::vector<int> pool;
  for (int u : g.adjacent_nodes(x))
    if (set_contains(scope_sorted, u)) pool.push_back(u);
  return pool;
}

// Visits size-k subsets of `pool` in lexicographic order until fn returns true.
template <typename Fn>
inline bool for_each_subset(const std::vector<int>& pool, int k, Fn&& fn) {
  const int m = static_cast<int>(pool.size());
  if (k > m) return false;
  if (k == 0) {
    return fn(std::vector<int>{});
  }
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    std::vector<int> subset(k);
    for (int i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    if (fn(subset)) return true;
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Searches the candidate pool of `tested` (excluding `other`) for a size-n
// separating set; on success removes the edge and records the sepset.
inline bool try_separate(ChainGraph& g, int tested, int other, int order, const Dataset& data,
                         const std::vector<int>& scope_sorted, LearnContext& ctx,
                         SepsetMap& sepsets) {
  std::vector<int> pool = candidate_pool(g, tested, scope_sorted);
  pool.erase(std::remove(pool.begin(), pool.end(), other), pool.end());
  bool separated = for_each_subset(pool, order, [&](const std::vector<int>& s) {
    CiQuery q = CiQuery::normalized(tested, other, s, data.id());
    CiVerdict v = ci_test(data, q, ctx.ci_cache, ctx.budget);
    if (!v.independent) return false;
    sepsets.set(tested, other, s);
    return true;
  });
  if (separated) g.remove_edge(tested, other);
  return separated;
}

inline EdgePredicate freeze_exo_pairs(const std::vector<int>& exo_sorted) {
  if (exo_sorted.empty()) return nullptr;
  std::vector<int> exo = exo_sorted;
  return [exo](int u, int v) { return !(set_contains(exo, u) && set_contains(exo, v)); };
}

}  // namespace detail

// Exit test of the recursion: no endogenous node retains enough potential
// parents to supply a condition set of the requested order.
inline bool resolution_exhausted(const ChainGraph& g, const std::vector<int>& endo,
                                 const std::vector<int>& exo, int order) {
  const std::vector<int> scope = set_union(endo, exo);
  int max_pool = 0;
  for (int x : endo) {
    int p = static_cast<int>(detail::candidate_pool(g, x, scope).size());
    max_pool = std::max(max_pool, p);
  }
  return max_pool - 1 < order;
}

// Removes edges that a size-`order` condition set renders independent, first
// between exogenous and endogenous nodes, then within the endogenous set,
// then orients v-structures and closes under the Meek rules. Edges between
// two exogenous nodes are never tested or oriented.
inline ChainGraph increase_resolution(const RaiScope& scope, const Dataset& data,
                                      LearnContext& ctx, SepsetMap& sepsets) {
  ChainGraph g = scope.graph;
  const std::vector<int> scope_nodes = set_union(scope.endo, scope.exo);
  const int n = scope.order;

  // Step 1: exogenous-endogenous pairs.
  for (int x : scope.endo) {
    for (int w : scope.exo) {
      if (!g.adjacent(x, w)) continue;
      detail::try_separate(g, x, w, n, data, scope_nodes, ctx, sepsets);
    }
  }
  // Step 2: endogenous pairs; either endpoint's pool may separate.
  for (std::size_t i = 0; i < scope.endo.size(); ++i) {
    for (std::size_t j = i + 1; j < scope.endo.size(); ++j) {
      int xi = scope.endo[i];
      int xj = scope.endo[j];
      if (!g.adjacent(xi, xj)) continue;
      if (detail::try_separate(g, xi, xj, n, data, scope_nodes, ctx, sepsets)) continue;
      detail::try_separate(g, xj, xi, n, data, scope_nodes, ctx, sepsets);
    }
  }

  int conflicts = 0;
  EdgePredicate orientable = detail::freeze_exo_pairs(scope.exo);
  g = orient_v_structures(g, sepsets, &conflicts, orientable);
  g = apply_meek_rules(g, &conflicts, orientable);
  ctx.orientation_conflicts += conflicts;
  return g;
}

// Partitions the endogenous set into the descendant group (sink chain
// components) and autonomous ancestor groups (connectivity after removing the
// descendants, which may pass through exogenous nodes).
inline std::pair<std::vector<int>, std::vector<std::vector<int>>> split_autonomous(
    const std::vector<int>& endo, const ChainGraph& g) {
  if (!g.directed_part_acyclic()) throw Error("split_autonomous: directed part has a cycle");
  std::vector<int> descendants = lowest_order_nodes(g.induced(endo), endo);
  std::vector<std::vector<int>> ancestors;
  for (const auto& comp : connected_components(g, descendants)) {
    std::vector<int> group;
    for (int v : comp)
      if (set_contains(endo, v)) group.push_back(v);
    if (!group.empty()) ancestors.push_back(std::move(group));
  }
  // Components are already produced in ascending order of their smallest node.
  return {std::move(descendants), std::move(ancestors)};
}

}  // namespace brai
