#include <catch2/catch_amalgamated.hpp>

#include "brai/network.hpp"

using namespace brai;

TEST_CASE("benchmark networks validate") {
  REQUIRE_NOTHROW(asia_network().validate());
  REQUIRE_NOTHROW(dense5_network().validate());
  SplitRng rng(61);
  REQUIRE_NOTHROW(child_network(rng).validate());
  REQUIRE(child_network(rng).n_vars() == 20);
  SplitRng rng2(62);
  REQUIRE_NOTHROW(random_network(4, rng2).validate());
}

TEST_CASE("network text round trip") {
  GroundTruthNetwork net = asia_network();
  std::string text = network_to_text(net);
  GroundTruthNetwork back = network_from_text(text);
  REQUIRE(back.names == net.names);
  REQUIRE(back.cards == net.cards);
  REQUIRE(back.graph == net.graph);
  for (int v = 0; v < net.n_vars(); ++v) {
    REQUIRE(back.cpts[v].size() == net.cpts[v].size());
    for (std::size_t i = 0; i < net.cpts[v].size(); ++i)
      REQUIRE_THAT(back.cpts[v][i], Catch::Matchers::WithinAbs(net.cpts[v][i], 1e-15));
  }
}

TEST_CASE("CPT rows must sum to one") {
  GroundTruthNetwork net;
  net.names = {"A"};
  net.cards = {2};
  net.graph = ChainGraph(1);
  net.cpts = {{0.6, 0.5}};
  REQUIRE_THROWS_WITH(net.validate(), Catch::Matchers::ContainsSubstring("sums to"));
}

TEST_CASE("CPT shapes must match parent sets") {
  GroundTruthNetwork net;
  net.names = {"A", "B"};
  net.cards = {2, 2};
  net.graph = ChainGraph(2);
  net.graph.add_directed(0, 1);
  net.cpts = {{0.5, 0.5}, {0.5, 0.5}};  // B needs 2 rows
  REQUIRE_THROWS_WITH(net.validate(), Catch::Matchers::ContainsSubstring("CPT size"));
}

TEST_CASE("fitting recovers strong dependence") {
  GroundTruthNetwork truth = asia_network();
  SplitRng rng(63);
  Dataset train = forward_sample(truth, 5000, rng);
  GroundTruthNetwork fitted = fit_parameters(train, truth.graph, 1.0);
  fitted.validate();
  SplitRng hrng(64);
  Dataset heldout = forward_sample(truth, 2000, hrng);
  double with_structure = log_likelihood(fitted, heldout);
  GroundTruthNetwork empty_fit = fit_parameters(train, ChainGraph(truth.n_vars()), 1.0);
  double without_structure = log_likelihood(empty_fit, heldout);
  REQUIRE(with_structure > without_structure);
}

TEST_CASE("fitted parameters are smoothed away from zero") {
  Dataset tiny({"A", "B"}, {2, 2}, {0, 0});
  ChainGraph g(2);
  g.add_directed(0, 1);
  GroundTruthNetwork fitted = fit_parameters(tiny, g, 1.0);
  for (int v = 0; v < 2; ++v)
    for (double p : fitted.cpts[v]) REQUIRE(p > 0.0);
  // Unseen configurations still get positive likelihood.
  Dataset unseen({"A", "B"}, {2, 2}, {1, 1});
  REQUIRE(std::isfinite(log_likelihood(fitted, unseen)));
}
