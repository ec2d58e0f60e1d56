#pragma once

// Partially directed graphs (PDAG/CPDAG/DAG), orientation rules,
// d-separation, equivalence-class enumeration, and the text format.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "brai/common.hpp"

namespace brai {

// Predicate limiting which edges the orientation rules may direct. Used to
// freeze edges between exogenous variables during recursive learning.
using EdgePredicate = std::function<bool(int, int)>;

class ChainGraph {
 public:
  ChainGraph() = default;
  explicit ChainGraph(int n) : n_(n), marks_(static_cast<std::size_t>(n) * n, 0) {}

  static ChainGraph complete_undirected(int n) {
    ChainGraph g(n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) g.add_undirected(u, v);
    return g;
  }

  int num_nodes() const { return n_; }

  bool adjacent(int u, int v) const { return mark(u, v) != kNone; }
  bool has_directed(int u, int v) const { return mark(u, v) == kOut; }
  bool has_undirected(int u, int v) const { return mark(u, v) == kUnd; }

  void add_undirected(int u, int v) {
    check_pair(u, v);
    if (adjacent(u, v)) throw Error("graph: pair already has an edge");
    set_mark(u, v, kUnd);
    set_mark(v, u, kUnd);
    ++n_undirected_;
  }

  void add_directed(int u, int v) {
    check_pair(u, v);
    if (adjacent(u, v)) throw Error("graph: pair already has an edge");
    set_mark(u, v, kOut);
    set_mark(v, u, kIn);
    ++n_directed_;
  }

  void remove_edge(int u, int v) {
    check_pair(u, v);
    uint8_t m = mark(u, v);
    if (m == kNone) throw Error("graph: removing a missing edge");
    if (m == kUnd) --n_undirected_; else --n_directed_;
    set_mark(u, v, kNone);
    set_mark(v, u, kNone);
  }

  // Turns the undirected edge u--v into u->v.
  void orient(int u, int v) {
    if (!has_undirected(u, v)) throw Error("graph: orient requires an undirected edge");
    set_mark(u, v, kOut);
    set_mark(v, u, kIn);
    --n_undirected_;
    ++n_directed_;
  }

  int64_t num_directed_edges() const { return n_directed_; }
  int64_t num_undirected_edges() const { return n_undirected_; }
  int64_t num_edges() const { return n_directed_ + n_undirected_; }

  std::vector<int> parents(int v) const { return collect(v, kIn); }
  std::vector<int> children(int u) const { return collect(u, kOut); }
  std::vector<int> undirected_neighbors(int v) const { return collect(v, kUnd); }
  std::vector<int> adjacent_nodes(int v) const {
    std::vector<int> out;
    for (int u = 0; u < n_; ++u)
      if (u != v && mark(v, u) != kNone) out.push_back(u);
    return out;
  }

  std::vector<std::pair<int, int>> directed_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < n_; ++u)
      for (int v = 0; v < n_; ++v)
        if (mark(u, v) == kOut) out.emplace_back(u, v);
    return out;
  }

  std::vector<std::pair<int, int>> undirected_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < n_; ++u)
      for (int v = u + 1; v < n_; ++v)
        if (mark(u, v) == kUnd) out.emplace_back(u, v);
    return out;
  }

  std::vector<std::pair<int, int>> skeleton() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < n_; ++u)
      for (int v = u + 1; v < n_; ++v)
        if (mark(u, v) != kNone) out.emplace_back(u, v);
    return out;
  }

  bool directed_part_acyclic() const {
    // Kahn over directed edges only.
    std::vector<int> indeg(n_, 0);
    for (int u = 0; u < n_; ++u)
      for (int v = 0; v < n_; ++v)
        if (mark(u, v) == kOut) ++indeg[v];
    std::deque<int> q;
    for (int v = 0; v < n_; ++v)
      if (indeg[v] == 0) q.push_back(v);
    int seen = 0;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      ++seen;
      for (int w = 0; w < n_; ++w)
        if (mark(v, w) == kOut && --indeg[w] == 0) q.push_back(w);
    }
    return seen == n_;
  }

  bool is_dag() const { return n_undirected_ == 0 && directed_part_acyclic(); }

  // True if adding u->v would close a directed cycle (a directed path v..u exists).
  bool creates_cycle(int u, int v) const {
    if (u == v) return true;
    std::vector<char> seen(n_, 0);
    std::deque<int> q{v};
    seen[v] = 1;
    while (!q.empty()) {
      int w = q.front();
      q.pop_front();
      if (w == u) return true;
      for (int x = 0; x < n_; ++x)
        if (mark(w, x) == kOut && !seen[x]) {
          seen[x] = 1;
          q.push_back(x);
        }
    }
    return false;
  }

  // Colliders x->z<-y with x,y non-adjacent; returned as (x, z, y) with x < y.
  std::vector<std::array<int, 3>> v_structures() const {
    std::vector<std::array<int, 3>> out;
    for (int z = 0; z < n_; ++z) {
      auto ps = parents(z);
      for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
          if (!adjacent(ps[i], ps[j])) out.push_back({ps[i], z, ps[j]});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Same node count; keeps only edges with both endpoints in `keep`.
  ChainGraph induced(const std::vector<int>& keep_sorted) const {
    ChainGraph g(n_);
    for (int u = 0; u < n_; ++u) {
      if (!set_contains(keep_sorted, u)) continue;
      for (int v = 0; v < n_; ++v) {
        if (v == u || !set_contains(keep_sorted, v)) continue;
        if (mark(u, v) == kOut) g.add_directed(u, v);
        else if (mark(u, v) == kUnd && u < v) g.add_undirected(u, v);
      }
    }
    return g;
  }

  // Keeps edges with at least one endpoint in `owners`.
  ChainGraph edges_incident_to(const std::vector<int>& owners_sorted) const {
    ChainGraph g(n_);
    for (int u = 0; u < n_; ++u) {
      for (int v = 0; v < n_; ++v) {
        if (v == u) continue;
        bool owned = set_contains(owners_sorted, u) || set_contains(owners_sorted, v);
        if (!owned) continue;
        if (mark(u, v) == kOut) g.add_directed(u, v);
        else if (mark(u, v) == kUnd && u < v) g.add_undirected(u, v);
      }
    }
    return g;
  }

  // Sorted edge codes; equal graphs produce equal keys.
  std::vector<uint64_t> canonical_key() const {
    std::vector<uint64_t> key;
    key.reserve(static_cast<std::size_t>(num_edges()));
    for (int u = 0; u < n_; ++u) {
      for (int v = 0; v < n_; ++v) {
        if (mark(u, v) == kOut) key.push_back(edge_code(u, v, false));
        else if (mark(u, v) == kUnd && u < v) key.push_back(edge_code(u, v, true));
      }
    }
    std::sort(key.begin(), key.end());
    return key;
  }

  uint64_t edge_code(int u, int v, bool undirected) const {
    return (static_cast<uint64_t>(u) * n_ + v) * 2 + (undirected ? 1 : 0);
  }

  void add_edge_code(uint64_t code) {
    bool und = code & 1;
    uint64_t uv = code >> 1;
    int u = static_cast<int>(uv / n_);
    int v = static_cast<int>(uv % n_);
    if (und) add_undirected(u, v); else add_directed(u, v);
  }

  bool operator==(const ChainGraph& o) const { return n_ == o.n_ && marks_ == o.marks_; }
  bool operator!=(const ChainGraph& o) const { return !(*this == o); }

 private:
  static constexpr uint8_t kNone = 0;
  static constexpr uint8_t kUnd = 1;
  static constexpr uint8_t kOut = 2;  // edge this->other
  static constexpr uint8_t kIn = 3;   // edge other->this

  void check_pair(int u, int v) const {
    if (u < 0 || v < 0 || u >= n_ || v >= n_ || u == v) throw Error("graph: bad node pair");
  }

  uint8_t mark(int u, int v) const { return marks_[static_cast<std::size_t>(u) * n_ + v]; }
  void set_mark(int u, int v, uint8_t m) { marks_[static_cast<std::size_t>(u) * n_ + v] = m; }

  std::vector<int> collect(int v, uint8_t m) const {
    std::vector<int> out;
    for (int u = 0; u < n_; ++u)
      if (u != v && mark(v, u) == m) out.push_back(u);
    return out;
  }

  int n_ = 0;
  std::vector<uint8_t> marks_;
  int64_t n_directed_ = 0;
  int64_t n_undirected_ = 0;
};

// Condition sets recorded when edges were removed, keyed by unordered pair.
class SepsetMap {
 public:
  void set(int x, int y, std::vector<int> s) { map_[key(x, y)] = std::move(s); }
  bool has(int x, int y) const { return map_.count(key(x, y)) != 0; }
  const std::vector<int>* find(int x, int y) const {
    auto it = map_.find(key(x, y));
    return it == map_.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return map_.size(); }

 private:
  static uint64_t key(int x, int y) {
    if (x > y) std::swap(x, y);
    return (static_cast<uint64_t>(x) << 32) | static_cast<uint32_t>(y);
  }
  std::unordered_map<uint64_t, std::vector<int>> map_;
};

// ---------------------------------------------------------------------------
// d-separation (reachability over active paths).

inline bool is_d_separated(const ChainGraph& g, int x, int y, const std::vector<int>& z) {
  if (!g.is_dag()) throw Error("is_d_separated: graph is not a DAG");
  if (x == y) throw Error("is_d_separated: x == y");
  std::vector<char> in_z(g.num_nodes(), 0);
  for (int v : z) in_z[v] = 1;
  if (in_z[x] || in_z[y]) throw Error("is_d_separated: endpoint inside condition set");

  // Ancestors of z (including z).
  std::vector<char> anc(g.num_nodes(), 0);
  std::deque<int> q;
  for (int v : z) {
    anc[v] = 1;
    q.push_back(v);
  }
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int p : g.parents(v))
      if (!anc[p]) {
        anc[p] = 1;
        q.push_back(p);
      }
  }

  // States: (node, direction); direction 0 = entered from a child (moving up),
  // 1 = entered from a parent (moving down).
  std::vector<std::array<char, 2>> visited(g.num_nodes(), {0, 0});
  std::deque<std::pair<int, int>> queue;
  queue.emplace_back(x, 0);
  while (!queue.empty()) {
    auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = 1;
    if (v == y) return false;
    if (dir == 0 && !in_z[v]) {
      for (int p : g.parents(v)) queue.emplace_back(p, 0);
      for (int c : g.children(v)) queue.emplace_back(c, 1);
    } else if (dir == 1) {
      if (!in_z[v])
        for (int c : g.children(v)) queue.emplace_back(c, 1);
      if (anc[v])
        for (int p : g.parents(v)) queue.emplace_back(p, 0);
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Orientation.

namespace detail {

inline bool may_orient(const EdgePredicate& ok, int u, int v) {
  return !ok || ok(u, v);
}

// Orients u->v if legal under the predicate and acyclicity; returns success.
inline bool try_orient(ChainGraph& g, int u, int v, const EdgePredicate& ok, int* conflicts) {
  if (!g.has_undirected(u, v)) return false;
  if (!may_orient(ok, u, v)) return false;
  if (g.creates_cycle(u, v)) {
    if (conflicts) ++*conflicts;
    return false;
  }
  g.orient(u, v);
  return true;
}

}  // namespace detail

// For every x-z-y with x,y non-adjacent and z outside the recorded sepset of
// (x,y), demand x->z and y->z. Demands that would reverse an existing edge or
// close a cycle are skipped and counted as conflicts.
inline ChainGraph orient_v_structures(const ChainGraph& g, const SepsetMap& sepsets,
                                      int* conflicts = nullptr,
                                      const EdgePredicate& orientable = nullptr) {
  ChainGraph out = g;
  const int n = out.num_nodes();
  for (int z = 0; z < n; ++z) {
    for (int x = 0; x < n; ++x) {
      if (x == z || !out.adjacent(x, z)) continue;
      for (int y = x + 1; y < n; ++y) {
        if (y == z || !out.adjacent(y, z)) continue;
        if (out.adjacent(x, y)) continue;
        const std::vector<int>* s = sepsets.find(x, y);
        if (!s || set_contains(*s, z)) continue;
        for (int parent : {x, y}) {
          if (out.has_directed(parent, z)) continue;
          if (out.has_directed(z, parent)) {
            if (conflicts) ++*conflicts;
            continue;
          }
          detail::try_orient(out, parent, z, orientable, conflicts);
        }
      }
    }
  }
  return out;
}

// Meek's four orientation rules applied to a fixed point. Orientations that
// would close a directed cycle are skipped (counted as conflicts), so the
// result is always a valid PDAG even on inconsistent inputs.
inline ChainGraph apply_meek_rules(const ChainGraph& g, int* conflicts = nullptr,
                                   const EdgePredicate& orientable = nullptr) {
  if (!g.directed_part_acyclic()) throw Error("apply_meek_rules: directed part has a cycle");
  ChainGraph out = g;
  const int n = out.num_nodes();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b || !out.has_undirected(a, b)) continue;
        bool fire = false;
        // R1: c->a, a-b, c and b non-adjacent  =>  a->b.
        for (int c = 0; c < n && !fire; ++c) {
          if (c == a || c == b) continue;
          if (out.has_directed(c, a) && !out.adjacent(c, b)) fire = true;
        }
        // R2: a->c->b with a-b  =>  a->b.
        for (int c = 0; c < n && !fire; ++c) {
          if (c == a || c == b) continue;
          if (out.has_directed(a, c) && out.has_directed(c, b)) fire = true;
        }
        // R3: a-c, a-d, c->b, d->b, c and d non-adjacent  =>  a->b.
        for (int c = 0; c < n && !fire; ++c) {
          if (c == a || c == b) continue;
          if (!out.has_undirected(a, c) || !out.has_directed(c, b)) continue;
          for (int d = c + 1; d < n && !fire; ++d) {
            if (d == a || d == b) continue;
            if (out.has_undirected(a, d) && out.has_directed(d, b) && !out.adjacent(c, d))
              fire = true;
          }
        }
        // R4: a-d, d->c, c->b, b and d non-adjacent  =>  a->b.
        for (int d = 0; d < n && !fire; ++d) {
          if (d == a || d == b) continue;
          if (!out.has_undirected(a, d) || out.adjacent(b, d)) continue;
          for (int c = 0; c < n && !fire; ++c) {
            if (c == a || c == b || c == d) continue;
            if (out.has_directed(d, c) && out.has_directed(c, b)) fire = true;
          }
        }
        if (fire && detail::try_orient(out, a, b, orientable, conflicts)) changed = true;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Consistent extension (Dor & Tarsi): orient all undirected edges without
// introducing new v-structures or cycles. Deterministic: lowest-index sink
// first.

inline ChainGraph consistent_extension(const ChainGraph& g) {
  if (!g.directed_part_acyclic()) throw Error("consistent_extension: directed part has a cycle");
  const int n = g.num_nodes();
  ChainGraph work = g;
  ChainGraph out = g;
  std::vector<char> alive(n, 1);
  int remaining = n;
  while (remaining > 0) {
    int pick = -1;
    for (int x = 0; x < n && pick < 0; ++x) {
      if (!alive[x]) continue;
      bool sink = true;
      for (int c : work.children(x))
        if (alive[c]) {
          sink = false;
          break;
        }
      if (!sink) continue;
      // Every undirected neighbor of x must be adjacent to all other nodes
      // adjacent to x, so pointing it at x creates no new v-structure.
      bool ok = true;
      auto adj = work.adjacent_nodes(x);
      for (int y : work.undirected_neighbors(x)) {
        if (!alive[y]) continue;
        for (int w : adj) {
          if (w == y || !alive[w]) continue;
          if (!work.adjacent(y, w)) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
      }
      if (ok) pick = x;
    }
    if (pick < 0) {
      std::string stuck;
      for (int x = 0; x < n; ++x)
        if (alive[x] && !work.adjacent_nodes(x).empty()) stuck += " " + std::to_string(x);
      throw Error("consistent_extension: PDAG admits no extension; stuck at nodes{" + stuck + " }");
    }
    for (int y : work.undirected_neighbors(pick)) {
      if (!alive[y]) continue;
      out.orient(y, pick);
    }
    alive[pick] = 0;
    --remaining;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equivalence-class enumeration: all DAGs sharing skeleton and v-structures
// with the given CPDAG.

namespace detail {

inline void enumerate_dags_rec(const ChainGraph& g,
                               const std::vector<std::array<int, 3>>& target_vs,
                               std::size_t cap, std::set<std::vector<uint64_t>>& seen,
                               std::vector<ChainGraph>& out) {
  auto und = g.undirected_edges();
  if (und.empty()) {
    if (!g.directed_part_acyclic()) return;
    if (g.v_structures() != target_vs) return;
    auto key = g.canonical_key();
    if (!seen.insert(std::move(key)).second) return;
    if (out.size() >= cap)
      throw CapExceeded("enumerate_dags: equivalence class exceeds cap " + std::to_string(cap), cap);
    out.push_back(g);
    return;
  }
  auto [u, v] = und.front();
  for (auto [a, b] : {std::pair{u, v}, std::pair{v, u}}) {
    ChainGraph branch = g;
    if (branch.creates_cycle(a, b)) continue;
    branch.orient(a, b);
    branch = apply_meek_rules(branch);
    enumerate_dags_rec(branch, target_vs, cap, seen, out);
  }
}

}  // namespace detail

inline std::vector<ChainGraph> enumerate_dags(const ChainGraph& g, std::size_t cap = 10000) {
  if (cap < 1) throw Error("enumerate_dags: cap must be >= 1");
  std::vector<ChainGraph> out;
  std::set<std::vector<uint64_t>> seen;
  detail::enumerate_dags_rec(g, g.v_structures(), cap, seen, out);
  return out;
}

// ---------------------------------------------------------------------------
// Chain components and autonomy support.

// Maximal sets connected by undirected edges, restricted to `universe`.
inline std::vector<std::vector<int>> chain_components(const ChainGraph& g,
                                                      const std::vector<int>& universe_sorted) {
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<std::vector<int>> comps;
  for (int start : universe_sorted) {
    if (seen[start]) continue;
    std::vector<int> comp;
    std::deque<int> q{start};
    seen[start] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      comp.push_back(v);
      for (int u : g.undirected_neighbors(v)) {
        if (!seen[u] && set_contains(universe_sorted, u)) {
          seen[u] = 1;
          q.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

// Union of chain components with no directed edge leaving them toward another
// component of the universe ("lowest topological order" nodes).
inline std::vector<int> lowest_order_nodes(const ChainGraph& g,
                                           const std::vector<int>& universe_sorted) {
  if (!g.directed_part_acyclic()) throw Error("lowest_order_nodes: directed part has a cycle");
  auto comps = chain_components(g, universe_sorted);
  std::vector<int> out;
  for (const auto& comp : comps) {
    bool sink = true;
    for (int v : comp) {
      for (int c : g.children(v)) {
        if (set_contains(universe_sorted, c) && !set_contains(comp, c)) {
          sink = false;
          break;
        }
      }
      if (!sink) break;
    }
    if (sink)
      for (int v : comp) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<int> lowest_order_nodes(const ChainGraph& g) {
  std::vector<int> all(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) all[i] = i;
  return lowest_order_nodes(g, all);
}

// Connectivity ignoring edge direction over all nodes minus `exclude`.
inline std::vector<std::vector<int>> connected_components(const ChainGraph& g,
                                                          const std::vector<int>& exclude_sorted) {
  const int n = g.num_nodes();
  std::vector<char> blocked(n, 0);
  for (int v : exclude_sorted) blocked[v] = 1;
  std::vector<char> seen(n, 0);
  std::vector<std::vector<int>> comps;
  for (int start = 0; start < n; ++start) {
    if (blocked[start] || seen[start]) continue;
    std::vector<int> comp;
    std::deque<int> q{start};
    seen[start] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      comp.push_back(v);
      for (int u : g.adjacent_nodes(v)) {
        if (!blocked[u] && !seen[u]) {
          seen[u] = 1;
          q.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

// ---------------------------------------------------------------------------
// DAG utilities.

inline std::vector<int> topological_order(const ChainGraph& g) {
  if (!g.is_dag()) throw Error("topological_order: graph is not a DAG");
  const int n = g.num_nodes();
  std::vector<int> indeg(n, 0);
  for (auto [u, v] : g.directed_edges()) {
    (void)u;
    ++indeg[v];
  }
  std::vector<int> order;
  std::deque<int> q;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) q.push_back(v);
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    order.push_back(v);
    for (int c : g.children(v))
      if (--indeg[c] == 0) q.push_back(c);
  }
  return order;
}

// CPDAG of a DAG: skeleton plus compelled orientations (v-structures closed
// under the Meek rules).
inline ChainGraph cpdag_of_dag(const ChainGraph& dag) {
  if (!dag.is_dag()) throw Error("cpdag_of_dag: input is not a DAG");
  ChainGraph out(dag.num_nodes());
  for (auto [u, v] : dag.directed_edges()) {
    if (u < v) out.add_undirected(u, v);
    else if (!out.adjacent(u, v)) out.add_undirected(v, u);
  }
  for (auto [x, z, y] : dag.v_structures()) {
    if (out.has_undirected(x, z)) out.orient(x, z);
    if (out.has_undirected(y, z)) out.orient(y, z);
  }
  return apply_meek_rules(out);
}

// ---------------------------------------------------------------------------
// Text format: header "n=<count>", then one line per edge, "u -> v" or
// "u -- v", using variable names. Directed edges first, each group sorted.

inline std::string graph_to_text(const ChainGraph& g, const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != g.num_nodes())
    throw Error("graph_to_text: name count does not match node count");
  std::ostringstream out;
  out << "n=" << g.num_nodes() << "\n";
  for (auto [u, v] : g.directed_edges()) out << names[u] << " -> " << names[v] << "\n";
  for (auto [u, v] : g.undirected_edges()) out << names[u] << " -- " << names[v] << "\n";
  return out.str();
}

inline ChainGraph graph_from_text(const std::string& text, const std::vector<std::string>& names) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError("graph text: empty document");
  ++lineno;
  if (line.rfind("n=", 0) != 0) throw ParseError("graph text: missing n= header");
  int n = 0;
  try {
    n = std::stoi(line.substr(2));
  } catch (const std::exception&) {
    throw ParseError("graph text: bad node count '" + line + "'");
  }
  if (n != static_cast<int>(names.size()))
    throw ParseError("graph text: node count does not match provided names");
  ChainGraph g(n);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, op, b;
    if (!(ls >> a >> op >> b) || (op != "->" && op != "--"))
      throw ParseError("graph text: bad edge at line " + std::to_string(lineno));
    auto ia = index.find(a);
    auto ib = index.find(b);
    if (ia == index.end() || ib == index.end())
      throw ParseError("graph text: unknown variable at line " + std::to_string(lineno));
    if (op == "->") g.add_directed(ia->second, ib->second);
    else g.add_undirected(std::min(ia->second, ib->second), std::max(ia->second, ib->second));
  }
  return g;
}

}  // namespace brai
