#pragma once

// Drawing CPDAGs from a graph generative tree: Boltzmann selection over
// branch scores, the argmax (MAP) variant, and exact top-k extraction via
// per-group merging of the decomposable scores.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "brai/common.hpp"
#include "brai/ggt.hpp"
#include "brai/rng.hpp"

namespace brai {

struct Temperature {
  double gamma = 1.0;
};

struct ScoredCpdag {
  ChainGraph cpdag;
  double score = 0.0;
};

// Selection probabilities exp(sc_t / gamma) / sum_t' exp(sc_t' / gamma),
// computed with a max shift so scores of any magnitude are safe.
inline std::vector<double> boltzmann_probabilities(const std::vector<double>& scores,
                                                   Temperature temp) {
  if (scores.empty()) throw Error("boltzmann: empty score list");
  if (!(temp.gamma > 0.0)) throw Error("boltzmann: gamma must be positive");
  double max_score = scores[0];
  for (double s : scores) {
    if (std::isnan(s)) throw Error("boltzmann: NaN score");
    max_score = std::max(max_score, s);
  }
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp((scores[i] - max_score) / temp.gamma);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

inline int boltzmann_select(const std::vector<double>& scores, Temperature temp, SplitRng& rng) {
  std::vector<double> p = boltzmann_probabilities(scores, temp);
  double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

// ---------------------------------------------------------------------------

namespace detail {

struct PartialResult {
  std::vector<uint64_t> edges;  // sorted edge codes
  double score = 0.0;
};

inline PartialResult merge_partials(const PartialResult& a, const PartialResult& b) {
  PartialResult out;
  out.edges.reserve(a.edges.size() + b.edges.size());
  std::merge(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(),
             std::back_inserter(out.edges));
  out.score = a.score + b.score;
  return out;
}

// One post-order traversal per draw: every group at every bootstrap node
// samples one of its s sub-results proportionally to exp(score / gamma).
inline PartialResult sample_rec(const GgtNode& node, Temperature temp, SplitRng& rng) {
  if (node.is_leaf()) return {node.leaf.graph.canonical_key(), node.leaf.score};
  GroupedChildren grouped = group_children(node);
  PartialResult acc;
  for (const auto& group : grouped.groups) {
    std::vector<PartialResult> results;
    std::vector<double> scores;
    results.reserve(group.size());
    for (const GgtNode* child : group) {
      results.push_back(sample_rec(*child, temp, rng));
      scores.push_back(results.back().score);
    }
    int pick = boltzmann_select(scores, temp, rng);
    acc = merge_partials(acc, results[pick]);
  }
  return acc;
}

// Argmax variant; ties break toward the lowest branch index.
inline PartialResult map_rec(const GgtNode& node) {
  if (node.is_leaf()) return {node.leaf.graph.canonical_key(), node.leaf.score};
  GroupedChildren grouped = group_children(node);
  PartialResult acc;
  for (const auto& group : grouped.groups) {
    PartialResult best;
    bool first = true;
    for (const GgtNode* child : group) {
      PartialResult r = map_rec(*child);
      if (first || r.score > best.score) {
        best = std::move(r);
        first = false;
      }
    }
    acc = merge_partials(acc, best);
  }
  return acc;
}

// Distinct partial results ordered by descending score (ties by canonical
// edges), truncated to k.
using PartialList = std::vector<PartialResult>;

inline void sort_truncate(PartialList& list, std::size_t k) {
  std::sort(list.begin(), list.end(), [](const PartialResult& a, const PartialResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.edges < b.edges;
  });
  std::map<std::vector<uint64_t>, double> seen;
  PartialList dedup;
  for (auto& r : list) {
    auto it = seen.find(r.edges);
    if (it != seen.end()) continue;
    seen.emplace(r.edges, r.score);
    dedup.push_back(std::move(r));
    if (dedup.size() >= k) break;
  }
  list = std::move(dedup);
}

inline PartialList top_k_rec(const GgtNode& node, std::size_t k) {
  if (node.is_leaf()) return {{node.leaf.graph.canonical_key(), node.leaf.score}};
  GroupedChildren grouped = group_children(node);
  PartialList acc{{std::vector<uint64_t>{}, 0.0}};
  for (const auto& group : grouped.groups) {
    PartialList options;
    for (const GgtNode* child : group) {
      PartialList sub = top_k_rec(*child, k);
      options.insert(options.end(), sub.begin(), sub.end());
    }
    sort_truncate(options, k);
    PartialList next;
    next.reserve(acc.size() * options.size());
    for (const auto& a : acc)
      for (const auto& b : options) next.push_back(merge_partials(a, b));
    sort_truncate(next, k);
    acc = std::move(next);
  }
  return acc;
}

inline int tree_node_count(const GgtNode& node) {
  if (node.is_leaf()) return 1;
  int total = 1;
  for (const auto& [label, child] : node.children) {
    (void)label;
    total += tree_node_count(child);
  }
  return total;
}

}  // namespace detail

inline ScoredCpdag sample_cpdag(const GgtNode& root, Temperature temp, SplitRng& rng) {
  detail::PartialResult r = detail::sample_rec(root, temp, rng);
  int n = root.is_leaf() ? root.leaf.graph.num_nodes() : 0;
  if (n == 0) {
    // Non-leaf root: recover n from any leaf via a cheap walk.
    const GgtNode* cur = &root;
    while (!cur->is_leaf()) cur = &cur->children.front().second;
    n = cur->leaf.graph.num_nodes();
  }
  return {graph_from_codes(n, r.edges), r.score};
}

inline ScoredCpdag map_cpdag(const GgtNode& root) {
  detail::PartialResult r = detail::map_rec(root);
  const GgtNode* cur = &root;
  while (!cur->is_leaf()) cur = &cur->children.front().second;
  return {graph_from_codes(cur->leaf.graph.num_nodes(), r.edges), r.score};
}

struct TopKResult {
  std::vector<ScoredCpdag> models;  // descending by score
  bool shortfall = false;           // fewer than k distinct CPDAGs exist
};

inline TopKResult top_k_paths(const GgtNode& root, std::size_t k) {
  if (k < 1) throw Error("top_k_paths: k must be >= 1");
  detail::PartialList list = detail::top_k_rec(root, k);
  const GgtNode* cur = &root;
  while (!cur->is_leaf()) cur = &cur->children.front().second;
  const int n = cur->leaf.graph.num_nodes();
  TopKResult out;
  out.shortfall = list.size() < k;
  out.models.reserve(list.size());
  for (const auto& r : list) out.models.push_back({graph_from_codes(n, r.edges), r.score});
  return out;
}

}  // namespace brai
