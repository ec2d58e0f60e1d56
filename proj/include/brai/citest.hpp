#pragma once

// Conditional-independence decisions: plug-in CMI in bits, thresholded by the
// leading-order bias of the estimate, with a per-dataset verdict cache and a
// test-count budget.

#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "brai/common.hpp"
#include "brai/dataset.hpp"

namespace brai {

struct CiQuery {
  int x = -1;
  int y = -1;
  std::vector<int> z;  // sorted
  uint64_t dataset_id = 0;

  // Queries are symmetric in (x, y); normalization keeps x < y and z sorted.
  static CiQuery normalized(int x, int y, std::vector<int> z, uint64_t dataset_id) {
    if (x == y) throw Error("ci query: x == y");
    if (x > y) std::swap(x, y);
    std::sort(z.begin(), z.end());
    for (int v : z)
      if (v == x || v == y) throw Error("ci query: endpoint inside condition set");
    return CiQuery{x, y, std::move(z), dataset_id};
  }

  std::string key() const {
    std::string k;
    k.reserve(16 + z.size() * 4);
    auto push32 = [&k](uint32_t v) {
      k.append(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    uint64_t id = dataset_id;
    k.append(reinterpret_cast<const char*>(&id), sizeof(id));
    push32(static_cast<uint32_t>(x));
    push32(static_cast<uint32_t>(y));
    for (int v : z) push32(static_cast<uint32_t>(v));
    return k;
  }
};

struct CiVerdict {
  double cmi = 0.0;        // bits
  double threshold = 0.0;  // bits
  bool independent = false;
};

// Executed-test counter; cache hits do not count. by_order is keyed by |z|.
class CiBudget {
 public:
  void record(std::size_t order) {
    std::lock_guard<std::mutex> lock(mu_);
    if (by_order_.size() <= order) by_order_.resize(order + 1, 0);
    ++by_order_[order];
    ++total_;
  }

  int64_t total() const {
    std::lock_guard<std::mutex> lock(mu_);
    return total_;
  }

  std::vector<int64_t> by_order() const {
    std::lock_guard<std::mutex> lock(mu_);
    return by_order_;
  }

 private:
  mutable std::mutex mu_;
  int64_t total_ = 0;
  std::vector<int64_t> by_order_;
};

class CiCache {
 public:
  bool lookup(const std::string& key, CiVerdict* out) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return false;
    *out = it->second;
    return true;
  }

  // Insert-if-absent; returns the stored verdict (first writer wins).
  CiVerdict insert(const std::string& key, const CiVerdict& v) {
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
  std::unordered_map<std::string, CiVerdict> map_;
};

// Plug-in conditional mutual information in bits. The table must be ordered
// (x, y, z1, ..., zl). Cells with zero joint count contribute nothing; the
// result is clamped at zero.
inline double estimate_cmi(const ContingencyTable& table) {
  if (table.total() < 1) throw Error("estimate_cmi: empty table");
  if (table.variable_ids().size() < 2) throw Error("estimate_cmi: need at least (x, y)");
  const auto& cards = table.cardinalities();
  const uint64_t rx = static_cast<uint64_t>(cards[0]);
  const uint64_t ry = static_cast<uint64_t>(cards[1]);
  std::unordered_map<uint64_t, int64_t> nz, nxz, nyz;
  nz.reserve(table.cells().size());
  for (const auto& [key, c] : table.cells()) {
    uint64_t x = key % rx;
    uint64_t y = (key / rx) % ry;
    uint64_t zk = key / (rx * ry);
    nz[zk] += c;
    nxz[zk * rx + x] += c;
    nyz[zk * ry + y] += c;
  }
  const double n = static_cast<double>(table.total());
  double cmi = 0.0;
  for (const auto& [key, c] : table.cells()) {
    if (c == 0) continue;
    uint64_t x = key % rx;
    uint64_t y = (key / rx) % ry;
    uint64_t zk = key / (rx * ry);
    double num = static_cast<double>(c) * static_cast<double>(nz[zk]);
    double den = static_cast<double>(nxz[zk * rx + x]) * static_cast<double>(nyz[zk * ry + y]);
    cmi += (static_cast<double>(c) / n) * std::log2(num / den);
  }
  return cmi < 0.0 ? 0.0 : cmi;
}

// Leading-order bias of the plug-in CMI estimate, in bits:
// (|X|-1)(|Y|-1) * prod|Z_i| / (2 N ln 2).
inline double bias_threshold(int card_x, int card_y, const std::vector<int>& card_z, int64_t n) {
  if (n < 1) throw Error("bias_threshold: sample size must be >= 1");
  if (card_x < 1 || card_y < 1) throw Error("bias_threshold: cardinality < 1");
  double dof = static_cast<double>(card_x - 1) * static_cast<double>(card_y - 1);
  for (int c : card_z) {
    if (c < 1) throw Error("bias_threshold: cardinality < 1");
    dof *= static_cast<double>(c);
  }
  return dof / (2.0 * static_cast<double>(n) * 0.6931471805599453);
}

// Decision threshold: the accumulated bias plus two standard deviations of
// the estimation noise. Under independence, 2N ln2 * cmi is approximately
// chi-square with dof = (|X|-1)(|Y|-1)prod|Z|, so the bias C1 alone is the
// null MEAN and rejects a true independence about a third of the time at any
// sample size; the two-sigma margin puts the cut near the 95th percentile
// for every cardinality profile. Estimates from a resampled dataset carry
// the plug-in bias once per generation (the resample treats the empirical
// distribution, itself biased, as ground truth), so bias and noise scale
// with the dataset's bias generation.
inline double decision_threshold(int card_x, int card_y, const std::vector<int>& card_z,
                                 int64_t n, int bias_generation = 1) {
  const double c1 = bias_threshold(card_x, card_y, card_z, n);
  double dof = static_cast<double>(card_x - 1) * static_cast<double>(card_y - 1);
  for (int c : card_z) dof *= static_cast<double>(c);
  if (dof <= 0.0) return 0.0;
  return bias_generation * c1 * (1.0 + 2.0 * std::sqrt(2.0 / dof));
}

inline CiVerdict ci_test(const Dataset& data, const CiQuery& q, CiCache& cache, CiBudget& budget) {
  const std::string key = q.key();
  CiVerdict verdict;
  if (cache.lookup(key, &verdict)) return verdict;

  std::vector<int> vars;
  vars.reserve(2 + q.z.size());
  vars.push_back(q.x);
  vars.push_back(q.y);
  for (int v : q.z) vars.push_back(v);
  ContingencyTable table = counts(data, vars);
  verdict.cmi = estimate_cmi(table);
  std::vector<int> zcards;
  zcards.reserve(q.z.size());
  for (int v : q.z) zcards.push_back(data.card(v));
  verdict.threshold = decision_threshold(data.card(q.x), data.card(q.y), zcards, data.n_rows(),
                                         data.bias_generation());
  verdict.independent = verdict.cmi <= verdict.threshold;
  budget.record(q.z.size());
  return cache.insert(key, verdict);
}

}  // namespace brai
