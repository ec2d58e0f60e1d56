#pragma once

// BDeu scoring: decomposable log marginal likelihood with Dirichlet
// hyperparameters ess/(q*r) per cell. All arithmetic stays in the log domain.

#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "brai/common.hpp"
#include "brai/dataset.hpp"
#include "brai/graph.hpp"

namespace brai {

struct ScoreConfig {
  double ess = 1.0;  // equivalent sample size; structure prior is uniform
};

struct FamilyScoreKey {
  int child = -1;
  std::vector<int> parents;  // sorted
  uint64_t dataset_id = 0;

  std::string key(double ess) const {
    std::string k;
    k.reserve(24 + parents.size() * 4);
    k.append(reinterpret_cast<const char*>(&dataset_id), sizeof(dataset_id));
    k.append(reinterpret_cast<const char*>(&ess), sizeof(ess));
    uint32_t c = static_cast<uint32_t>(child);
    k.append(reinterpret_cast<const char*>(&c), sizeof(c));
    for (int p : parents) {
      uint32_t v = static_cast<uint32_t>(p);
      k.append(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    return k;
  }
};

class ScoreCache {
 public:
  bool lookup(const std::string& key, double* out) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return false;
    *out = it->second;
    return true;
  }

  double insert(const std::string& key, double v) {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = map_.emplace(key, v);
    (void)inserted;
    return it->second;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
  }

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, double> map_;
};

namespace detail {

inline double family_score_impl(const Dataset& data, int child, const std::vector<int>& parents,
                                double ess) {
  const int r = data.card(child);
  double q = 1.0;
  for (int p : parents) q *= static_cast<double>(data.card(p));
  const double alpha_j = ess / q;
  const double alpha_jk = ess / (q * static_cast<double>(r));

  // Joint counts over (parents, child); parent config packed little-endian.
  std::unordered_map<uint64_t, int64_t> njk;
  std::unordered_map<uint64_t, int64_t> nj;
  const int64_t rows = data.n_rows();
  for (int64_t row = 0; row < rows; ++row) {
    uint64_t jkey = 0;
    for (std::size_t i = parents.size(); i-- > 0;) {
      jkey = jkey * static_cast<uint64_t>(data.card(parents[i])) +
             static_cast<uint64_t>(data.cell(row, parents[i]));
    }
    ++nj[jkey];
    ++njk[jkey * static_cast<uint64_t>(r) + static_cast<uint64_t>(data.cell(row, child))];
  }

  // Sum in sorted-key order so the value is independent of map layout.
  std::vector<uint64_t> jkeys;
  jkeys.reserve(nj.size());
  for (const auto& [k, v] : nj) {
    (void)v;
    jkeys.push_back(k);
  }
  std::sort(jkeys.begin(), jkeys.end());
  double score = 0.0;
  for (uint64_t j : jkeys) {
    score += std::lgamma(alpha_j) - std::lgamma(alpha_j + static_cast<double>(nj[j]));
    for (int k = 0; k < r; ++k) {
      auto it = njk.find(j * static_cast<uint64_t>(r) + static_cast<uint64_t>(k));
      if (it == njk.end()) continue;
      score += std::lgamma(alpha_jk + static_cast<double>(it->second)) - std::lgamma(alpha_jk);
    }
  }
  return score;
}

}  // namespace detail

// BDeu local score of (child | parents). An empty dataset scores 0.
inline double family_score(const Dataset& data, int child, std::vector<int> parents,
                           const ScoreConfig& cfg, ScoreCache* cache = nullptr) {
  if (cfg.ess <= 0.0) throw Error("family_score: ess must be positive");
  if (child < 0 || child >= data.n_vars()) throw Error("family_score: bad child index");
  std::sort(parents.begin(), parents.end());
  for (int p : parents) {
    if (p < 0 || p >= data.n_vars()) throw Error("family_score: bad parent index");
    if (p == child) throw Error("family_score: child listed among parents");
  }
  if (data.n_rows() == 0) return 0.0;

  std::string key;
  if (cache) {
    key = FamilyScoreKey{child, parents, data.id()}.key(cfg.ess);
    double hit = 0.0;
    if (cache->lookup(key, &hit)) return hit;
  }
  double score = detail::family_score_impl(data, child, parents, cfg.ess);
  if (cache) return cache->insert(key, score);
  return score;
}

// Sum of family scores for the given children; undirected edges are resolved
// by the deterministic consistent extension first.
inline double graph_score_families(const Dataset& data, const ChainGraph& g,
                                   const std::vector<int>& children, const ScoreConfig& cfg,
                                   ScoreCache* cache = nullptr) {
  const ChainGraph dag = g.num_undirected_edges() == 0 ? g : consistent_extension(g);
  double total = 0.0;
  for (int child : children) total += family_score(data, child, dag.parents(child), cfg, cache);
  return total;
}

inline double graph_score(const Dataset& data, const ChainGraph& g, const ScoreConfig& cfg,
                          ScoreCache* cache = nullptr) {
  if (g.num_nodes() != data.n_vars()) throw Error("graph_score: node/variable count mismatch");
  std::vector<int> all(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) all[i] = i;
  return graph_score_families(data, g, all, cfg, cache);
}

}  // namespace brai
