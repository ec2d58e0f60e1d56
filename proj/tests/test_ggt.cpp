#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "brai/ggt.hpp"
#include "brai/network.hpp"

using namespace brai;

namespace {

GgtNode make_leaf_node(const ChainGraph& g, std::vector<int> endo, double score) {
  GgtNode node;
  node.kind = GgtNode::Kind::Leaf;
  node.leaf = {g, std::move(endo), score};
  return node;
}

GgtNode make_bootstrap(std::vector<std::pair<std::string, GgtNode>> children) {
  GgtNode node;
  node.kind = GgtNode::Kind::Bootstrap;
  node.children = std::move(children);
  std::sort(node.children.begin(), node.children.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return node;
}

GroundTruthNetwork collider_net() {
  GroundTruthNetwork net;
  net.names = {"X", "Y", "Z"};
  net.cards = {2, 2, 2};
  net.graph = ChainGraph(3);
  net.graph.add_directed(0, 2);
  net.graph.add_directed(1, 2);
  net.cpts = {{0.5, 0.5}, {0.5, 0.5}, {0.92, 0.08, 0.3, 0.7, 0.3, 0.7, 0.08, 0.92}};
  return net;
}

}  // namespace

TEST_CASE("one variable yields an immediate scored leaf") {
  Dataset d({"X"}, {2}, {0, 1, 1, 1});
  BraiConfig cfg;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  REQUIRE(root.is_leaf());
  REQUIRE(root.leaf.endo == std::vector<int>{0});
  REQUIRE(root.leaf.score == family_score(d, 0, {}, cfg.score));
  REQUIRE(ctx.budget.total() == 0);
}

TEST_CASE("s=1 with identity resampling reduces to the single-run learner") {
  SplitRng rng(9);
  Dataset d = forward_sample(asia_network(), 400, rng);
  BraiConfig cfg;
  cfg.s = 1;
  cfg.resample = false;
  LearnContext tree_ctx;
  GgtNode root = brai_learn_tree(d, cfg, tree_ctx);
  LearnContext rai_ctx;
  ChainGraph single = rai_learn(d, rai_ctx);

  // The degenerate tree is a single path whose leaf union equals the CPDAG.
  std::vector<const ChainGraph*> leaves;
  detail::collect_leaf_graphs(root, leaves);
  REQUIRE(merge_leaf_graphs(d.n_vars(), leaves) == single);
  REQUIRE(count_unique_cpdags(root) == 1);
  // Identical CI budgets, including the per-order histogram.
  REQUIRE(tree_ctx.budget.total() == rai_ctx.budget.total());
  REQUIRE(tree_ctx.budget.by_order() == rai_ctx.budget.by_order());
}

TEST_CASE("a two-ancestor split fans out s*(K+1) children") {
  SplitRng rng(11);
  Dataset d = forward_sample(collider_net(), 20000, rng);
  BraiConfig cfg;
  cfg.s = 2;
  cfg.seed = 5;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  REQUIRE_FALSE(root.is_leaf());
  // The order-0 split of collider data gives K=2 ancestors plus descendants.
  REQUIRE(root.children.size() == 6);
  GroupedChildren grouped = group_children(root);
  REQUIRE(grouped.K == 2);
  REQUIRE(grouped.s == 2);
}

TEST_CASE("unique CPDAG counts on hand-built trees") {
  ChainGraph empty2(2);
  ChainGraph edge2(2);
  edge2.add_undirected(0, 1);

  SECTION("identical leaves collapse to one") {
    GgtNode root = make_bootstrap({{dec_label(1), make_leaf_node(empty2, {0, 1}, -1.0)},
                                   {dec_label(2), make_leaf_node(empty2, {0, 1}, -1.0)}});
    REQUIRE(count_unique_cpdags(root) == 1);
  }
  SECTION("distinct branches count separately") {
    GgtNode root = make_bootstrap({{dec_label(1), make_leaf_node(empty2, {0, 1}, -1.0)},
                                   {dec_label(2), make_leaf_node(edge2, {0, 1}, -2.0)}});
    REQUIRE(count_unique_cpdags(root) == 2);
  }
  SECTION("independent groups multiply") {
    // Group A over {0,1} with 2 distinct subgraphs; descendant group over
    // {2,3} with 3 distinct subgraphs; 2*3 = 6 total.
    ChainGraph a_empty(4), a_edge(4);
    a_edge.add_undirected(0, 1);
    ChainGraph d_empty(4), d_edge(4), d_dir(4);
    d_edge.add_undirected(2, 3);
    d_dir.add_directed(2, 3);
    GgtNode root = make_bootstrap({
        {anc_label(1, 1), make_leaf_node(a_empty, {0, 1}, -1.0)},
        {anc_label(1, 2), make_leaf_node(a_edge, {0, 1}, -1.5)},
        {anc_label(1, 3), make_leaf_node(a_empty, {0, 1}, -1.0)},
        {dec_label(1), make_leaf_node(d_empty, {2, 3}, -2.0)},
        {dec_label(2), make_leaf_node(d_edge, {2, 3}, -2.5)},
        {dec_label(3), make_leaf_node(d_dir, {2, 3}, -2.25)},
    });
    REQUIRE(count_unique_cpdags(root) == 6);
  }
}

TEST_CASE("serialization round-trips structurally") {
  SplitRng rng(12);
  Dataset d = forward_sample(collider_net(), 5000, rng);
  BraiConfig cfg;
  cfg.s = 2;
  cfg.seed = 77;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  GgtDocument doc{cfg, d.fingerprint(), d.n_rows(), d.variable_names(), d.cardinalities(), root};
  std::string text = serialize_ggt(doc);
  GgtDocument back = deserialize_ggt(text);
  REQUIRE(back.root == root);
  REQUIRE(back.fingerprint == doc.fingerprint);
  REQUIRE(back.cfg.s == cfg.s);
  REQUIRE(back.cfg.seed == cfg.seed);
  REQUIRE(back.names == doc.names);
}

TEST_CASE("a leaf-only document stays minimal") {
  Dataset d({"X"}, {2}, {0, 1});
  BraiConfig cfg;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  GgtDocument doc{cfg, d.fingerprint(), d.n_rows(), d.variable_names(), d.cardinalities(), root};
  std::string text = serialize_ggt(doc);
  REQUIRE(deserialize_ggt(text).root.is_leaf());
}

TEST_CASE("truncated and malformed streams are rejected with context") {
  SplitRng rng(13);
  Dataset d = forward_sample(collider_net(), 200, rng);
  BraiConfig cfg;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  GgtDocument doc{cfg, d.fingerprint(), d.n_rows(), d.variable_names(), d.cardinalities(), root};
  std::string text = serialize_ggt(doc);
  REQUIRE_THROWS_WITH(deserialize_ggt(text.substr(0, text.size() / 2)),
                      Catch::Matchers::ContainsSubstring("byte"));
  REQUIRE_THROWS_AS(deserialize_ggt("{\"format\":\"brai-ggt\"}"), ParseError);
}

TEST_CASE("builds are reproducible byte for byte") {
  SplitRng rng(14);
  Dataset d = forward_sample(asia_network(), 250, rng);
  BraiConfig cfg;
  cfg.s = 2;
  cfg.seed = 123;
  LearnContext ctx1, ctx2;
  GgtNode r1 = brai_learn_tree(d, cfg, ctx1);
  GgtNode r2 = brai_learn_tree(d, cfg, ctx2);
  GgtDocument doc1{cfg, d.fingerprint(), d.n_rows(), d.variable_names(), d.cardinalities(), r1};
  GgtDocument doc2{cfg, d.fingerprint(), d.n_rows(), d.variable_names(), d.cardinalities(), r2};
  REQUIRE(serialize_ggt(doc1) == serialize_ggt(doc2));
}

TEST_CASE("equal leaf structures receive equal full-data scores across seeds") {
  SplitRng rng(15);
  Dataset d = forward_sample(collider_net(), 1500, rng);
  BraiConfig cfg1;
  cfg1.s = 2;
  cfg1.seed = 1;
  BraiConfig cfg2 = cfg1;
  cfg2.seed = 2;
  LearnContext ctx1, ctx2;
  GgtNode r1 = brai_learn_tree(d, cfg1, ctx1);
  GgtNode r2 = brai_learn_tree(d, cfg2, ctx2);
  std::map<std::pair<std::vector<uint64_t>, std::vector<int>>, double> scores;
  std::function<void(const GgtNode&, bool)> walk = [&](const GgtNode& node, bool record) {
    if (node.is_leaf()) {
      auto key = std::make_pair(node.leaf.graph.canonical_key(), node.leaf.endo);
      if (record) {
        scores[key] = node.leaf.score;
      } else {
        auto it = scores.find(key);
        if (it != scores.end()) REQUIRE(it->second == node.leaf.score);
      }
      return;
    }
    for (const auto& [label, child] : node.children) {
      (void)label;
      walk(child, record);
    }
  };
  walk(r1, true);
  walk(r2, false);
}

TEST_CASE("bootstrap node endo sets partition the parent's variables") {
  SplitRng rng(16);
  Dataset d = forward_sample(asia_network(), 600, rng);
  BraiConfig cfg;
  cfg.s = 2;
  cfg.seed = 9;
  LearnContext ctx;
  GgtNode root = brai_learn_tree(d, cfg, ctx);
  // Along any single path (one t per group), leaf endo sets partition {0..7}.
  std::function<std::vector<int>(const GgtNode&)> first_path_endo =
      [&](const GgtNode& node) -> std::vector<int> {
    if (node.is_leaf()) return node.leaf.endo;
    GroupedChildren grouped = group_children(node);
    std::vector<int> acc;
    for (const auto& group : grouped.groups) {
      std::vector<int> sub = first_path_endo(*group.front());
      for (int v : sub) {
        REQUIRE_FALSE(set_contains(acc, v));
        acc.push_back(v);
      }
      std::sort(acc.begin(), acc.end());
    }
    return acc;
  };
  std::vector<int> all = first_path_endo(root);
  REQUIRE(all == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}
