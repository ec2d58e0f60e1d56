#pragma once

// Model-averaged posteriors of structural features over scored CPDAGs, and
// ROC-AUC evaluation against a ground-truth DAG.

#include <cmath>
#include <string>
#include <vector>

#include "brai/common.hpp"
#include "brai/graph.hpp"
#include "brai/sampler.hpp"

namespace brai {

enum class FeatureKind { Edge, MarkovBlanket, Path };

inline std::string feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Edge: return "edge";
    case FeatureKind::MarkovBlanket: return "markov_blanket";
    case FeatureKind::Path: return "path";
  }
  return "?";
}

struct Feature {
  FeatureKind kind = FeatureKind::Edge;
  int x = -1;
  int y = -1;
};

struct FeaturePosterior {
  Feature feature;
  double probability = 0.0;
};

// Indicator of the feature on a DAG: directed edge x->y, x in the Markov
// blanket of y (parent, child, or co-parent), or a directed path x~>y.
inline int feature_holds(const Feature& f, const ChainGraph& g) {
  if (!g.is_dag()) throw Error("feature_holds: graph is not a DAG");
  if (f.x == f.y) throw Error("feature_holds: x == y");
  switch (f.kind) {
    case FeatureKind::Edge:
      return g.has_directed(f.x, f.y) ? 1 : 0;
    case FeatureKind::MarkovBlanket: {
      if (g.has_directed(f.x, f.y) || g.has_directed(f.y, f.x)) return 1;
      for (int c : g.children(f.y))
        if (g.has_directed(f.x, c)) return 1;
      return 0;
    }
    case FeatureKind::Path: {
      std::vector<char> seen(g.num_nodes(), 0);
      std::vector<int> stack{f.x};
      seen[f.x] = 1;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int c : g.children(v)) {
          if (c == f.y) return 1;
          if (!seen[c]) {
            seen[c] = 1;
            stack.push_back(c);
          }
        }
      }
      return 0;
    }
  }
  return 0;
}

// Posterior of a feature over the pooled DAG expansion of the models: each
// CPDAG contributes every DAG in its equivalence class, each inheriting the
// CPDAG's score; duplicates across models are kept. Evaluated in the log
// domain with a uniform structure prior.
inline FeaturePosterior feature_posterior(const Feature& f, const std::vector<ScoredCpdag>& models,
                                          std::size_t cap = 10000) {
  if (models.empty()) throw Error("feature_posterior: no models");
  double max_score = models[0].score;
  for (const auto& m : models) max_score = std::max(max_score, m.score);
  double denom = 0.0;
  double numer = 0.0;
  for (const auto& m : models) {
    const double w = std::exp(m.score - max_score);
    for (const ChainGraph& dag : enumerate_dags(m.cpdag, cap)) {
      denom += w;
      if (feature_holds(f, dag)) numer += w;
    }
  }
  return {f, numer / denom};
}

// Rank-based AUC (Mann-Whitney with midranks for ties). Labels come from
// evaluating each feature on the truth DAG.
inline double auc(const std::vector<FeaturePosterior>& posteriors, const ChainGraph& truth_dag) {
  if (posteriors.empty()) throw Error("auc: no posteriors");
  struct Item {
    double p;
    int label;
  };
  std::vector<Item> items;
  items.reserve(posteriors.size());
  int64_t positives = 0;
  for (const auto& fp : posteriors) {
    int label = feature_holds(fp.feature, truth_dag);
    positives += label;
    items.push_back({fp.probability, label});
  }
  const int64_t negatives = static_cast<int64_t>(items.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw Error("auc: degenerate labels (need at least one positive and one negative)");
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.p < b.p; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].p == items[i].p) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (items[k].label) rank_sum += midrank;
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

}  // namespace brai
