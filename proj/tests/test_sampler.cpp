#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "brai/ggt.hpp"
#include "brai/network.hpp"
#include "brai/sampler.hpp"

using namespace brai;

namespace {

GgtNode leaf_node(const ChainGraph& g, std::vector<int> endo, double score) {
  GgtNode node;
  node.kind = GgtNode::Kind::Leaf;
  node.leaf = {g, std::move(endo), score};
  return node;
}

GgtNode bootstrap(std::vector<std::pair<std::string, GgtNode>> children) {
  GgtNode node;
  node.kind = GgtNode::Kind::Bootstrap;
  node.children = std::move(children);
  std::sort(node.children.begin(), node.children.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return node;
}

// Exact result distribution of the sampling recursion, by bottom-up
// enumeration over all joint child outcomes. Outcomes are keyed by canonical
// edges; probabilities include the effect of random subtree scores on the
// Boltzmann weights above them.
using Outcome = std::pair<std::vector<uint64_t>, double>;  // edges, score

std::map<std::vector<uint64_t>, std::pair<double, double>> exact_distribution(
    const GgtNode& node, Temperature temp) {
  std::map<std::vector<uint64_t>, std::pair<double, double>> out;  // edges -> (prob, score)
  if (node.is_leaf()) {
    out[node.leaf.graph.canonical_key()] = {1.0, node.leaf.score};
    return out;
  }
  GroupedChildren grouped = group_children(node);
  // Start with the empty partial outcome.
  std::map<std::vector<uint64_t>, std::pair<double, double>> acc;
  acc[{}] = {1.0, 0.0};
  for (const auto& group : grouped.groups) {
    // Distribution of each child of the group.
    std::vector<std::vector<Outcome>> child_outcomes;
    std::vector<std::vector<double>> child_probs;
    for (const GgtNode* child : group) {
      auto dist = exact_distribution(*child, temp);
      std::vector<Outcome> outs;
      std::vector<double> probs;
      for (const auto& [edges, ps] : dist) {
        outs.push_back({edges, ps.second});
        probs.push_back(ps.first);
      }
      child_outcomes.push_back(std::move(outs));
      child_probs.push_back(std::move(probs));
    }
    // Enumerate the joint outcome of all s children, then the selection.
    std::map<std::vector<uint64_t>, std::pair<double, double>> group_dist;
    std::vector<std::size_t> idx(group.size(), 0);
    for (;;) {
      double joint = 1.0;
      std::vector<double> scores;
      for (std::size_t c = 0; c < group.size(); ++c) {
        joint *= child_probs[c][idx[c]];
        scores.push_back(child_outcomes[c][idx[c]].second);
      }
      std::vector<double> sel = boltzmann_probabilities(scores, temp);
      for (std::size_t c = 0; c < group.size(); ++c) {
        const Outcome& o = child_outcomes[c][idx[c]];
        auto& slot = group_dist[o.first];
        slot.first += joint * sel[c];
        slot.second = o.second;
      }
      std::size_t pos = 0;
      while (pos < idx.size() && ++idx[pos] == child_outcomes[pos].size()) {
        idx[pos] = 0;
        ++pos;
      }
      if (pos == idx.size()) break;
    }
    // Cross with the accumulated groups (independent selections).
    std::map<std::vector<uint64_t>, std::pair<double, double>> next;
    for (const auto& [aedges, aps] : acc) {
      for (const auto& [gedges, gps] : group_dist) {
        std::vector<uint64_t> merged;
        std::merge(aedges.begin(), aedges.end(), gedges.begin(), gedges.end(),
                   std::back_inserter(merged));
        auto& slot = next[merged];
        slot.first += aps.first * gps.first;
        slot.second = aps.second + gps.second;
      }
    }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace

TEST_CASE("Boltzmann probabilities on symmetric and shifted scores") {
  auto p = boltzmann_probabilities({0.0, 0.0}, Temperature{1.0});
  REQUIRE_THAT(p[0], Catch::Matchers::WithinAbs(0.5, 1e-15));
  auto q = boltzmann_probabilities({std::log(2.0), 0.0}, Temperature{1.0});
  REQUIRE_THAT(q[0], Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
  REQUIRE_THAT(q[1], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("Boltzmann selection survives huge negative scores") {
  auto p = boltzmann_probabilities({-1e6, -1e6 + 5.0}, Temperature{1.0});
  REQUIRE_THAT(p[1], Catch::Matchers::WithinAbs(1.0 / (1.0 + std::exp(-5.0)), 1e-12));
  REQUIRE(std::isfinite(p[0]));
  SplitRng rng(1);
  int idx = boltzmann_select({-1e6, -1e6 + 5.0}, Temperature{1.0}, rng);
  REQUIRE((idx == 0 || idx == 1));
}

TEST_CASE("Boltzmann rejects empty and NaN input") {
  SplitRng rng(2);
  REQUIRE_THROWS_AS(boltzmann_probabilities({}, Temperature{1.0}), Error);
  REQUIRE_THROWS_AS(boltzmann_probabilities({0.0, std::nan("")}, Temperature{1.0}), Error);
  REQUIRE_THROWS_AS(boltzmann_probabilities({0.0}, Temperature{0.0}), Error);
}

TEST_CASE("selection probabilities normalize to one") {
  SplitRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores;
    int k = 2 + static_cast<int>(rng.next_below(6));
    for (int i = 0; i < k; ++i) scores.push_back(-1e6 + 2e5 * rng.next_double());
    auto p = boltzmann_probabilities(scores, Temperature{1.0});
    double total = 0.0;
    for (double v : p) total += v;
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("temperature limits: uniform at large gamma, argmax at small gamma") {
  std::vector<double> scores{0.0, 1.0, 2.0, 3.0};
  SplitRng rng(4);
  std::vector<int> hits(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++hits[boltzmann_select(scores, Temperature{1e6}, rng)];
  double chi2 = 0.0;
  for (int h : hits) {
    double e = draws / 4.0;
    chi2 += (h - e) * (h - e) / e;
  }
  REQUIRE(chi2 < 16.27);  // chi-square 99th percentile, 3 dof

  for (int i = 0; i < 1000; ++i)
    REQUIRE(boltzmann_select(scores, Temperature{1e-6}, rng) == 3);
}

TEST_CASE("sampling a leaf-only tree returns the leaf") {
  ChainGraph g(2);
  g.add_undirected(0, 1);
  GgtNode root = leaf_node(g, {0, 1}, -3.25);
  SplitRng rng(5);
  ScoredCpdag s = sample_cpdag(root, Temperature{1.0}, rng);
  REQUIRE(s.cpdag == g);
  REQUIRE(s.score == -3.25);
  ScoredCpdag m = map_cpdag(root);
  REQUIRE(m.cpdag == g);
  REQUIRE(m.score == -3.25);
}

TEST_CASE("two-branch tree samples at the Boltzmann rate") {
  ChainGraph g1(2);
  g1.add_undirected(0, 1);
  ChainGraph g2(2);
  GgtNode root = bootstrap({{dec_label(1), leaf_node(g1, {0, 1}, std::log(2.0))},
                            {dec_label(2), leaf_node(g2, {0, 1}, 0.0)}});
  SplitRng rng(6);
  const int draws = 100000;
  int g1_hits = 0;
  for (int i = 0; i < draws; ++i) {
    ScoredCpdag s = sample_cpdag(root, Temperature{1.0}, rng);
    g1_hits += (s.cpdag == g1) ? 1 : 0;
  }
  REQUIRE_THAT(static_cast<double>(g1_hits) / draws,
               Catch::Matchers::WithinAbs(2.0 / 3.0, 0.01));
}

TEST_CASE("an s=1 tree samples deterministically") {
  SplitRng rng(7);
  Dataset d = forward_sample(asia_network(), 300, rng);
  BraiConfig cfg;
  cfg.s = 1;
  cfg.seed = 3;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  SplitRng r1(1), r2(2);
  ScoredCpdag a = sample_cpdag(root, Temperature{1.0}, r1);
  ScoredCpdag b = sample_cpdag(root, Temperature{1.0}, r2);
  REQUIRE(a.cpdag == b.cpdag);
  REQUIRE(a.score == b.score);
  REQUIRE(a.cpdag == map_cpdag(root).cpdag);
}

TEST_CASE("the MAP selection dominates sampled scores") {
  SplitRng rng(8);
  Dataset d = forward_sample(asia_network(), 400, rng);
  BraiConfig cfg;
  cfg.s = 3;
  cfg.seed = 11;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  ScoredCpdag map = map_cpdag(root);
  SplitRng srng(9);
  for (int i = 0; i < 1000; ++i) {
    ScoredCpdag s = sample_cpdag(root, Temperature{1.0}, srng);
    REQUIRE(map.score >= s.score);
  }
}

TEST_CASE("argmax picks the best branch with ties to the lowest index") {
  ChainGraph a(2), b(2), c(2);
  a.add_undirected(0, 1);
  c.add_directed(0, 1);
  GgtNode root = bootstrap({{dec_label(1), leaf_node(a, {0, 1}, -5.0)},
                            {dec_label(2), leaf_node(b, {0, 1}, -3.0)},
                            {dec_label(3), leaf_node(c, {0, 1}, -4.0)}});
  REQUIRE(map_cpdag(root).cpdag == b);
  GgtNode tied = bootstrap({{dec_label(1), leaf_node(a, {0, 1}, -3.0)},
                            {dec_label(2), leaf_node(b, {0, 1}, -3.0)}});
  REQUIRE(map_cpdag(tied).cpdag == a);
}

TEST_CASE("top-k agrees with MAP at k=1 and flags shortfall") {
  ChainGraph a(2), b(2);
  a.add_undirected(0, 1);
  GgtNode root = bootstrap({{dec_label(1), leaf_node(a, {0, 1}, -5.0)},
                            {dec_label(2), leaf_node(b, {0, 1}, -3.0)}});
  TopKResult one = top_k_paths(root, 1);
  REQUIRE(one.models.size() == 1);
  REQUIRE_FALSE(one.shortfall);
  REQUIRE(one.models[0].cpdag == map_cpdag(root).cpdag);
  TopKResult five = top_k_paths(root, 5);
  REQUIRE(five.models.size() == 2);
  REQUIRE(five.shortfall);
  REQUIRE(five.models[0].score >= five.models[1].score);
}

TEST_CASE("top-k combines independent groups exactly") {
  ChainGraph a_hi(4), a_lo(4), d_hi(4), d_lo(4);
  a_lo.add_undirected(0, 1);
  d_lo.add_undirected(2, 3);
  GgtNode root = bootstrap({
      {anc_label(1, 1), leaf_node(a_hi, {0, 1}, -1.0)},
      {anc_label(1, 2), leaf_node(a_lo, {0, 1}, -2.0)},
      {dec_label(1), leaf_node(d_hi, {2, 3}, -1.0)},
      {dec_label(2), leaf_node(d_lo, {2, 3}, -3.0)},
  });
  TopKResult top = top_k_paths(root, 2);
  REQUIRE(top.models.size() == 2);
  REQUIRE_THAT(top.models[0].score, Catch::Matchers::WithinAbs(-2.0, 1e-12));
  REQUIRE_THAT(top.models[1].score, Catch::Matchers::WithinAbs(-3.0, 1e-12));
}

TEST_CASE("sampled scores equal the merged graph's full-data score") {
  SplitRng rng(10);
  Dataset d = forward_sample(asia_network(), 500, rng);
  BraiConfig cfg;
  cfg.s = 3;
  cfg.seed = 21;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  SplitRng srng(22);
  for (int i = 0; i < 20; ++i) {
    ScoredCpdag s = sample_cpdag(root, Temperature{1.0}, srng);
    double recomputed = graph_score(d, s.cpdag, cfg.score, &ctx.score_cache);
    REQUIRE_THAT(s.score, Catch::Matchers::WithinAbs(recomputed, 1e-6));
  }
  ScoredCpdag m = map_cpdag(root);
  REQUIRE_THAT(m.score,
               Catch::Matchers::WithinAbs(graph_score(d, m.cpdag, cfg.score, nullptr), 1e-6));
}

TEST_CASE("sampling frequencies match the exact tree distribution") {
  // Nested tree: the root chooses between a fixed leaf and a subtree whose
  // own random selection shifts the weights seen at the root.
  ChainGraph l1(2), l2(2), l3(2);
  l2.add_undirected(0, 1);
  l3.add_directed(0, 1);
  GgtNode inner = bootstrap({{dec_label(1), leaf_node(l2, {0, 1}, -1.2)},
                             {dec_label(2), leaf_node(l3, {0, 1}, -0.4)}});
  GgtNode root = bootstrap({{dec_label(1), leaf_node(l1, {0, 1}, -0.9)},
                            {dec_label(2), inner}});
  Temperature temp{1.0};
  auto exact = exact_distribution(root, temp);
  double total = 0.0;
  for (const auto& [edges, ps] : exact) total += ps.first;
  REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE(exact.size() == 3);

  std::map<std::vector<uint64_t>, int> hits;
  SplitRng rng(23);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    ScoredCpdag s = sample_cpdag(root, temp, rng);
    ++hits[s.cpdag.canonical_key()];
  }
  double tv = 0.0;
  for (const auto& [edges, ps] : exact) {
    double freq = static_cast<double>(hits[edges]) / draws;
    tv += std::fabs(freq - ps.first);
  }
  REQUIRE(tv / 2.0 <= 0.02);
}

TEST_CASE("sampling frequencies on a learned tree match enumeration") {
  SplitRng rng(24);
  Dataset d = forward_sample(asia_network(), 120, rng);
  BraiConfig cfg;
  cfg.s = 2;
  cfg.seed = 31;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  if (count_unique_cpdags(root) > 100) return;  // keep the oracle tractable
  Temperature temp{1.0};
  auto exact = exact_distribution(root, temp);
  std::map<std::vector<uint64_t>, int> hits;
  SplitRng srng(32);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++hits[sample_cpdag(root, temp, srng).cpdag.canonical_key()];
  double tv = 0.0;
  for (const auto& [edges, ps] : exact)
    tv += std::fabs(static_cast<double>(hits[edges]) / draws - ps.first);
  for (const auto& [edges, count] : hits)
    if (!exact.count(edges)) tv += static_cast<double>(count) / draws;
  REQUIRE(tv / 2.0 <= 0.02);
}
