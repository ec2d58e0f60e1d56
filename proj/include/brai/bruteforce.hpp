#pragma once

// Exhaustive oracles for testing: full DAG-space enumeration, exact MAP, and
// exact feature posteriors. Deliberately capped at five variables.

#include <cmath>
#include <vector>

#include "brai/averaging.hpp"
#include "brai/common.hpp"
#include "brai/dataset.hpp"
#include "brai/graph.hpp"
#include "brai/sampler.hpp"
#include "brai/score.hpp"

namespace brai {

struct DagSpace {
  int n = 0;
  int max_indegree = -1;  // negative: unbounded
};

// Every labeled DAG on n nodes, exactly once (brute force over all ordered
// edge patterns, filtered for acyclicity).
inline std::vector<ChainGraph> enumerate_all_dags(const DagSpace& space) {
  if (space.n < 1) throw Error("enumerate_all_dags: n must be >= 1");
  if (space.n > 5) throw Error("enumerate_all_dags: n > 5 unsupported (space blows up)");
  const int n = space.n;
  std::vector<std::pair<int, int>> slots;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) slots.emplace_back(u, v);
  std::vector<ChainGraph> out;
  const uint64_t patterns = 1ULL << slots.size();
  for (uint64_t bits = 0; bits < patterns; ++bits) {
    ChainGraph g(n);
    bool valid = true;
    for (std::size_t i = 0; i < slots.size() && valid; ++i) {
      if (!(bits & (1ULL << i))) continue;
      auto [u, v] = slots[i];
      if (g.adjacent(u, v)) valid = false;
      else g.add_directed(u, v);
    }
    if (!valid || !g.directed_part_acyclic()) continue;
    if (space.max_indegree >= 0) {
      for (int v = 0; v < n && valid; ++v)
        if (static_cast<int>(g.parents(v).size()) > space.max_indegree) valid = false;
      if (!valid) continue;
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Highest-BDeu DAG over the whole space, reported as its CPDAG.
inline ScoredCpdag exact_map(const Dataset& data, const DagSpace& space, const ScoreConfig& cfg,
                             ScoreCache* cache = nullptr) {
  if (data.n_vars() != space.n) throw Error("exact_map: dataset/space size mismatch");
  ScoredCpdag best;
  bool first = true;
  for (const ChainGraph& dag : enumerate_all_dags(space)) {
    double sc = graph_score(data, dag, cfg, cache);
    if (first || sc > best.score) {
      best = {dag, sc};
      first = false;
    }
  }
  best.cpdag = cpdag_of_dag(best.cpdag);
  return best;
}

// Eq.-5 style posterior with the model set equal to the full DAG space.
inline double exact_feature_posterior(const Dataset& data, const Feature& f, const DagSpace& space,
                                      const ScoreConfig& cfg, ScoreCache* cache = nullptr) {
  if (data.n_vars() != space.n) throw Error("exact_feature_posterior: size mismatch");
  std::vector<ChainGraph> dags = enumerate_all_dags(space);
  std::vector<double> scores;
  scores.reserve(dags.size());
  double max_score = -1e300;
  for (const ChainGraph& dag : dags) {
    scores.push_back(graph_score(data, dag, cfg, cache));
    max_score = std::max(max_score, scores.back());
  }
  double numer = 0.0;
  double denom = 0.0;
  for (std::size_t i = 0; i < dags.size(); ++i) {
    const double w = std::exp(scores[i] - max_score);
    denom += w;
    if (feature_holds(f, dags[i])) numer += w;
  }
  return numer / denom;
}

// Test oracle for equivalence-class enumeration: try all 2^u orientations of
// the undirected edges and keep those matching skeleton, v-structures, and
// acyclicity.
inline std::vector<ChainGraph> orientations_matching(const ChainGraph& cpdag) {
  auto und = cpdag.undirected_edges();
  if (und.size() > 22) throw Error("orientations_matching: too many undirected edges");
  const auto target = cpdag.v_structures();
  std::vector<ChainGraph> out;
  const uint64_t patterns = 1ULL << und.size();
  for (uint64_t bits = 0; bits < patterns; ++bits) {
    ChainGraph g = cpdag;
    for (std::size_t i = 0; i < und.size(); ++i) {
      auto [u, v] = und[i];
      if (bits & (1ULL << i)) g.orient(u, v);
      else g.orient(v, u);
    }
    if (!g.directed_part_acyclic()) continue;
    if (g.v_structures() != target) continue;
    out.push_back(std::move(g));
  }
  return out;
}

// Independent evaluation of the feature posterior over a fixed scored DAG
// set; long-double accumulation, no shared code with feature_posterior.
inline double posterior_of_fixed_set(const std::vector<ChainGraph>& dags,
                                     const std::vector<double>& scores, const Feature& f) {
  if (dags.size() != scores.size() || dags.empty())
    throw Error("posterior_of_fixed_set: bad input");
  long double shift = scores[0];
  for (double s : scores) shift = std::max<long double>(shift, s);
  long double numer = 0.0L;
  long double denom = 0.0L;
  for (std::size_t i = 0; i < dags.size(); ++i) {
    long double w = expl(static_cast<long double>(scores[i]) - shift);
    denom += w;
    if (feature_holds(f, dags[i])) numer += w;
  }
  return static_cast<double>(numer / denom);
}

}  // namespace brai
