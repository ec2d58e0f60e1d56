#include <catch2/catch_amalgamated.hpp>

#include "brai/averaging.hpp"
#include "brai/bruteforce.hpp"
#include "brai/network.hpp"

using namespace brai;

namespace {

ChainGraph chain_xyz() {
  ChainGraph g(3);
  g.add_directed(0, 1);
  g.add_directed(1, 2);
  return g;
}

}  // namespace

TEST_CASE("feature indicators on small DAGs") {
  ChainGraph chain = chain_xyz();
  REQUIRE(feature_holds({FeatureKind::Path, 0, 2}, chain) == 1);
  REQUIRE(feature_holds({FeatureKind::Edge, 0, 2}, chain) == 0);
  REQUIRE(feature_holds({FeatureKind::Edge, 0, 1}, chain) == 1);
  REQUIRE(feature_holds({FeatureKind::Path, 2, 0}, chain) == 0);

  ChainGraph collider(3);
  collider.add_directed(0, 2);
  collider.add_directed(1, 2);
  REQUIRE(feature_holds({FeatureKind::MarkovBlanket, 0, 1}, collider) == 1);  // co-parent
  REQUIRE(feature_holds({FeatureKind::MarkovBlanket, 0, 2}, collider) == 1);  // parent
  REQUIRE(feature_holds({FeatureKind::Edge, 0, 1}, collider) == 0);

  ChainGraph empty(3);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      if (x == y) continue;
      REQUIRE(feature_holds({FeatureKind::Edge, x, y}, empty) == 0);
      REQUIRE(feature_holds({FeatureKind::MarkovBlanket, x, y}, empty) == 0);
      REQUIRE(feature_holds({FeatureKind::Path, x, y}, empty) == 0);
    }
}

TEST_CASE("feature_holds rejects PDAG input") {
  ChainGraph g(2);
  g.add_undirected(0, 1);
  REQUIRE_THROWS_AS(feature_holds({FeatureKind::Edge, 0, 1}, g), Error);
}

TEST_CASE("posterior of equal-score models averages indicators") {
  ChainGraph with(2);
  with.add_directed(0, 1);
  ChainGraph without(2);
  std::vector<ScoredCpdag> models{{with, -10.0}, {without, -10.0}};
  FeaturePosterior p = feature_posterior({FeatureKind::Edge, 0, 1}, models);
  REQUIRE_THAT(p.probability, Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("a feature present everywhere has posterior one") {
  ChainGraph a(2);
  a.add_directed(0, 1);
  std::vector<ScoredCpdag> models{{a, -4.0}, {a, -2.0}};
  FeaturePosterior p = feature_posterior({FeatureKind::Edge, 0, 1}, models);
  REQUIRE(p.probability == 1.0);
}

TEST_CASE("posterior weights follow relative scores") {
  ChainGraph with(2);
  with.add_directed(0, 1);
  ChainGraph without(2);
  std::vector<ScoredCpdag> models{{with, std::log(2.0)}, {without, 0.0}};
  FeaturePosterior p = feature_posterior({FeatureKind::Edge, 0, 1}, models);
  REQUIRE_THAT(p.probability, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("CPDAG models expand into their equivalence classes") {
  ChainGraph und(2);
  und.add_undirected(0, 1);  // two DAGs, one contains 0->1
  std::vector<ScoredCpdag> models{{und, -1.0}};
  FeaturePosterior p = feature_posterior({FeatureKind::Edge, 0, 1}, models);
  REQUIRE_THAT(p.probability, Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("posterior matches the independent fixed-set evaluation") {
  SplitRng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    // Random DAG models with random scores on 4 nodes.
    std::vector<ScoredCpdag> models;
    std::vector<ChainGraph> dags;
    std::vector<double> scores;
    int m = 1 + static_cast<int>(rng.next_below(5));
    for (int i = 0; i < m; ++i) {
      ChainGraph dag(4);
      for (int u = 0; u < 4; ++u)
        for (int v = u + 1; v < 4; ++v)
          if (rng.next_double() < 0.4) dag.add_directed(u, v);
      double score = -1e6 + 30.0 * rng.next_double();
      models.push_back({dag, score});
      dags.push_back(dag);
      scores.push_back(score);
    }
    Feature f{FeatureKind::Path, static_cast<int>(rng.next_below(4)), 0};
    if (f.x == f.y) f.y = 1;
    else f.y = (f.x + 1) % 4;
    double fast = feature_posterior(f, models).probability;
    double slow = posterior_of_fixed_set(dags, scores, f);
    REQUIRE_THAT(fast, Catch::Matchers::WithinAbs(slow, 1e-12));
  }
}

TEST_CASE("posteriors are invariant to a constant score shift") {
  SplitRng rng(52);
  std::vector<ScoredCpdag> models;
  for (int i = 0; i < 4; ++i) {
    ChainGraph dag(3);
    for (int u = 0; u < 3; ++u)
      for (int v = u + 1; v < 3; ++v)
        if (rng.next_double() < 0.5) dag.add_directed(u, v);
    models.push_back({dag, -50.0 + 10.0 * rng.next_double()});
  }
  Feature f{FeatureKind::MarkovBlanket, 0, 2};
  double base = feature_posterior(f, models).probability;
  for (auto& m : models) m.score += 12345.0;
  REQUIRE_THAT(feature_posterior(f, models).probability,
               Catch::Matchers::WithinAbs(base, 1e-12));
}

TEST_CASE("duplicating a supporting model cannot lower the posterior") {
  ChainGraph with(2);
  with.add_directed(0, 1);
  ChainGraph without(2);
  std::vector<ScoredCpdag> models{{with, -2.0}, {without, -1.0}};
  Feature f{FeatureKind::Edge, 0, 1};
  double before = feature_posterior(f, models).probability;
  models.push_back({with, -2.0});
  REQUIRE(feature_posterior(f, models).probability >= before);
}

TEST_CASE("AUC of perfect, flat, and inverted rankings") {
  ChainGraph truth(3);
  truth.add_directed(0, 1);
  truth.add_directed(1, 2);
  std::vector<FeaturePosterior> perfect, flat, inverted;
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 3; ++y) {
      if (x == y) continue;
      Feature f{FeatureKind::Edge, x, y};
      double label = feature_holds(f, truth);
      perfect.push_back({f, label});
      flat.push_back({f, 0.5});
      inverted.push_back({f, 1.0 - label});
    }
  }
  REQUIRE_THAT(auc(perfect, truth), Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(auc(flat, truth), Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(auc(inverted, truth), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("AUC requires both label classes") {
  ChainGraph empty(3);
  std::vector<FeaturePosterior> ps{{{FeatureKind::Edge, 0, 1}, 0.2},
                                   {{FeatureKind::Edge, 1, 0}, 0.3}};
  REQUIRE_THROWS_AS(auc(ps, empty), Error);
}
