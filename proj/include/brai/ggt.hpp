#pragma once

// Graph generative tree: recursive bootstrap over autonomous groups. Interior
// nodes fan out s resampled branches per group; leaves hold the refined
// subgraph over their endogenous set, scored on the full training data.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "brai/common.hpp"
#include "brai/dataset.hpp"
#include "brai/graph.hpp"
#include "brai/rai.hpp"
#include "brai/rng.hpp"
#include "brai/score.hpp"

namespace brai {

struct BraiConfig {
  int s = 3;                 // bootstrap branches per autonomous group
  ScoreConfig score;         // ess for leaf scoring
  uint64_t seed = 0;         // master seed; branch streams derive from it
  int max_order = -1;        // optional hard cap on the condition-set order
  bool resample = true;      // false: identity "resampling" (single-run mode)
};

struct GgtLeaf {
  ChainGraph graph;        // edges owned by this leaf (incident to endo)
  std::vector<int> endo;   // children whose families this leaf scored
  double score = 0.0;      // sum of BDeu family scores on the full data

  bool operator==(const GgtLeaf& o) const {
    return graph == o.graph && endo == o.endo && score == o.score;
  }
};

struct GgtNode {
  enum class Kind { Leaf, Bootstrap };
  Kind kind = Kind::Leaf;
  GgtLeaf leaf;
  std::vector<std::pair<std::string, GgtNode>> children;  // sorted by label

  bool is_leaf() const { return kind == Kind::Leaf; }

  const GgtNode* child(const std::string& label) const {
    for (const auto& [l, n] : children)
      if (l == label) return &n;
    return nullptr;
  }

  bool operator==(const GgtNode& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Leaf) return leaf == o.leaf;
    return children == o.children;
  }
};

inline std::string anc_label(int group, int t) {
  return "Anc_" + std::to_string(group) + "^" + std::to_string(t);
}
inline std::string dec_label(int t) { return "Dec^" + std::to_string(t); }

// Children of a bootstrap node arranged per group: groups[0..K-1] are the
// ancestor groups, groups[K] is the descendant group; each holds s nodes
// ordered by branch index t.
struct GroupedChildren {
  int s = 0;
  int K = 0;
  std::vector<std::vector<const GgtNode*>> groups;
};

inline GroupedChildren group_children(const GgtNode& node) {
  if (node.is_leaf()) throw Error("ggt: leaf node has no children");
  std::map<std::pair<int, int>, const GgtNode*> anc;  // (group, t)
  std::map<int, const GgtNode*> dec;                  // t
  int max_group = 0;
  int max_t = 0;
  for (const auto& [label, child] : node.children) {
    int group = 0, t = 0;
    if (std::sscanf(label.c_str(), "Anc_%d^%d", &group, &t) == 2) {
      anc[{group, t}] = &child;
      max_group = std::max(max_group, group);
      max_t = std::max(max_t, t);
    } else if (std::sscanf(label.c_str(), "Dec^%d", &t) == 1) {
      dec[t] = &child;
      max_t = std::max(max_t, t);
    } else {
      throw Error("ggt: malformed child label '" + label + "'");
    }
  }
  GroupedChildren out;
  out.s = max_t;
  out.K = max_group;
  out.groups.resize(out.K + 1);
  for (int i = 1; i <= out.K; ++i) {
    for (int t = 1; t <= out.s; ++t) {
      auto it = anc.find({i, t});
      if (it == anc.end()) throw Error("ggt: missing child " + anc_label(i, t));
      out.groups[i - 1].push_back(it->second);
    }
  }
  for (int t = 1; t <= out.s; ++t) {
    auto it = dec.find(t);
    if (it == dec.end()) throw Error("ggt: missing child " + dec_label(t));
    out.groups[out.K].push_back(it->second);
  }
  std::size_t expected = static_cast<std::size_t>(out.s) * (out.K + 1);
  if (node.children.size() != expected) throw Error("ggt: unexpected extra children");
  return out;
}

inline ChainGraph graph_from_codes(int n, const std::vector<uint64_t>& codes) {
  ChainGraph g(n);
  for (uint64_t c : codes) g.add_edge_code(c);
  return g;
}

// ---------------------------------------------------------------------------
// Construction.

namespace detail {

inline GgtNode make_leaf(const ChainGraph& g, const std::vector<int>& endo, const Dataset& full,
                         const BraiConfig& cfg, LearnContext& ctx) {
  GgtNode node;
  node.kind = GgtNode::Kind::Leaf;
  node.leaf.graph = g.edges_incident_to(endo);
  node.leaf.endo = endo;
  node.leaf.score =
      graph_score_families(full, node.leaf.graph, endo, cfg.score, &ctx.score_cache);
  return node;
}

inline GgtNode brai_build_rec(const ChainGraph& g, const std::vector<int>& endo,
                              const std::vector<int>& exo, int order, const Dataset& full,
                              const Dataset& boot, const BraiConfig& cfg, LearnContext& ctx,
                              const SepsetMap& sepsets, const SplitRng& rng,
                              const std::string& path) {
  const bool capped = cfg.max_order >= 0 && order > cfg.max_order;
  if (capped || resolution_exhausted(g, endo, exo, order)) {
    return make_leaf(g, endo, full, cfg, ctx);
  }

  RaiScope scope{endo, exo, order, g};
  SepsetMap branch_sepsets = sepsets;
  ChainGraph refined = increase_resolution(scope, boot, ctx, branch_sepsets);
  auto [descendants, ancestor_groups] = split_autonomous(endo, refined);
  const int K = static_cast<int>(ancestor_groups.size());

  std::vector<int> dec_exo = exo;
  for (const auto& group : ancestor_groups) dec_exo = set_union(dec_exo, group);
  const ChainGraph dec_graph = refined.induced(set_union(descendants, dec_exo));
  std::vector<ChainGraph> anc_graphs;
  anc_graphs.reserve(ancestor_groups.size());
  for (const auto& group : ancestor_groups)
    anc_graphs.push_back(refined.induced(set_union(group, exo)));

  GgtNode node;
  node.kind = GgtNode::Kind::Bootstrap;
  for (int t = 1; t <= cfg.s; ++t) {
    Dataset resampled;
    const Dataset* branch_data = &boot;
    if (cfg.resample) {
      SplitRng boot_rng = rng.child("boot^" + std::to_string(t));
      resampled = bootstrap_resample(full, boot_rng).data;
      branch_data = &resampled;
    }
    for (int i = 1; i <= K; ++i) {
      const std::string label = anc_label(i, t);
      try {
        node.children.emplace_back(
            label, brai_build_rec(anc_graphs[i - 1], ancestor_groups[i - 1], exo, order + 1,
                                  full, *branch_data, cfg, ctx, branch_sepsets,
                                  rng.child(label), path + "/" + label));
      } catch (const Error& e) {
        throw Error("ggt build failed under " + path + "/" + label + ": " + e.what());
      }
    }
    const std::string label = dec_label(t);
    try {
      node.children.emplace_back(
          label, brai_build_rec(dec_graph, descendants, dec_exo, order + 1, full, *branch_data,
                                cfg, ctx, branch_sepsets, rng.child(label), path + "/" + label));
    } catch (const Error& e) {
      throw Error("ggt build failed under " + path + "/" + label + ": " + e.what());
    }
  }
  std::sort(node.children.begin(), node.children.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return node;
}

}  // namespace detail

inline GgtNode brai_build(const ChainGraph& g, const std::vector<int>& endo,
                          const std::vector<int>& exo, int order, const Dataset& full,
                          const Dataset& boot, const BraiConfig& cfg, LearnContext& ctx,
                          const SepsetMap& sepsets = SepsetMap{}) {
  if (cfg.s < 1) throw Error("brai_build: s must be >= 1");
  if (cfg.score.ess <= 0.0) throw Error("brai_build: ess must be positive");
  SplitRng rng(cfg.seed);
  return detail::brai_build_rec(g, endo, exo, order, full, boot, cfg, ctx, sepsets, rng, "");
}

// Top-level call: complete undirected graph over all variables, empty
// exogenous set, order 0, bootstrap data = full data.
inline GgtNode brai_learn_tree(const Dataset& data, const BraiConfig& cfg, LearnContext& ctx) {
  std::vector<int> endo(data.n_vars());
  for (int i = 0; i < data.n_vars(); ++i) endo[i] = i;
  ChainGraph g = ChainGraph::complete_undirected(data.n_vars());
  return brai_build(g, endo, {}, 0, data, data, cfg, ctx);
}

// ---------------------------------------------------------------------------
// Single-CPDAG learning: the bootstrap tree degenerates to one path when s=1
// and resampling is the identity; the result is the union of its leaves.

namespace detail {

inline void collect_leaf_graphs(const GgtNode& node, std::vector<const ChainGraph*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node.leaf.graph);
    return;
  }
  for (const auto& [label, child] : node.children) {
    (void)label;
    collect_leaf_graphs(child, out);
  }
}

}  // namespace detail

inline ChainGraph merge_leaf_graphs(int n, const std::vector<const ChainGraph*>& leaves) {
  ChainGraph merged(n);
  for (const ChainGraph* g : leaves)
    for (uint64_t code : g->canonical_key()) merged.add_edge_code(code);
  return merged;
}

inline ChainGraph rai_learn(const RaiScope& scope, const Dataset& data, LearnContext& ctx) {
  BraiConfig cfg;
  cfg.s = 1;
  cfg.resample = false;
  GgtNode root =
      brai_build(scope.graph, scope.endo, scope.exo, scope.order, data, data, cfg, ctx);
  std::vector<const ChainGraph*> leaves;
  detail::collect_leaf_graphs(root, leaves);
  return merge_leaf_graphs(scope.graph.num_nodes(), leaves);
}

inline ChainGraph rai_learn(const Dataset& data, LearnContext& ctx) {
  RaiScope scope;
  scope.endo.resize(data.n_vars());
  for (int i = 0; i < data.n_vars(); ++i) scope.endo[i] = i;
  scope.graph = ChainGraph::complete_undirected(data.n_vars());
  return rai_learn(scope, data, ctx);
}

// ---------------------------------------------------------------------------
// Unique CPDAGs reachable by label selections, counted bottom-up over
// canonical edge sets (per-group union, cross product across groups, dedup).

namespace detail {

using CanonSet = std::set<std::vector<uint64_t>>;

inline CanonSet unique_cpdag_sets(const GgtNode& node) {
  if (node.is_leaf()) return {node.leaf.graph.canonical_key()};
  GroupedChildren grouped = group_children(node);
  CanonSet acc;
  acc.insert(std::vector<uint64_t>{});
  for (const auto& group : grouped.groups) {
    CanonSet options;
    for (const GgtNode* child : group) {
      CanonSet sub = unique_cpdag_sets(*child);
      options.insert(sub.begin(), sub.end());
    }
    CanonSet next;
    for (const auto& a : acc) {
      for (const auto& b : options) {
        std::vector<uint64_t> merged;
        merged.reserve(a.size() + b.size());
        std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
        next.insert(std::move(merged));
      }
    }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace detail

inline std::size_t count_unique_cpdags(const GgtNode& root) {
  return detail::unique_cpdag_sets(root).size();
}

inline std::size_t ggt_leaf_count(const GgtNode& node) {
  if (node.is_leaf()) return 1;
  std::size_t total = 0;
  for (const auto& [label, child] : node.children) {
    (void)label;
    total += ggt_leaf_count(child);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Serialization: one structured text document. The header records the build
// configuration and a dataset fingerprint; leaf graphs are embedded in the
// plain graph text format.

struct GgtDocument {
  BraiConfig cfg;
  std::string fingerprint;
  int64_t rows = 0;
  std::vector<std::string> names;
  std::vector<int> cards;
  GgtNode root;
};

namespace detail {

inline nlohmann::json node_to_json(const GgtNode& node, const std::vector<std::string>& names) {
  nlohmann::json j;
  if (node.is_leaf()) {
    j["kind"] = "leaf";
    j["endo"] = node.leaf.endo;
    j["graph"] = graph_to_text(node.leaf.graph, names);
    j["score"] = node.leaf.score;
  } else {
    j["kind"] = "bootstrap";
    nlohmann::json kids = nlohmann::json::object();
    for (const auto& [label, child] : node.children) kids[label] = node_to_json(child, names);
    j["children"] = std::move(kids);
  }
  return j;
}

inline GgtNode node_from_json(const nlohmann::json& j, const std::vector<std::string>& names) {
  if (!j.is_object() || !j.contains("kind"))
    throw ParseError("ggt: node object missing 'kind'");
  GgtNode node;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    node.kind = GgtNode::Kind::Leaf;
    node.leaf.endo = j.at("endo").get<std::vector<int>>();
    node.leaf.graph = graph_from_text(j.at("graph").get<std::string>(), names);
    node.leaf.score = j.at("score").get<double>();
  } else if (kind == "bootstrap") {
    node.kind = GgtNode::Kind::Bootstrap;
    const auto& kids = j.at("children");
    if (!kids.is_object()) throw ParseError("ggt: 'children' must be an object");
    for (auto it = kids.begin(); it != kids.end(); ++it) {
      node.children.emplace_back(it.key(), node_from_json(it.value(), names));
    }
    std::sort(node.children.begin(), node.children.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    group_children(node);  // validates the label grammar and completeness
  } else {
    throw ParseError("ggt: unknown node kind '" + kind + "'");
  }
  return node;
}

}  // namespace detail

inline std::string serialize_ggt(const GgtDocument& doc) {
  nlohmann::json j;
  j["format"] = "brai-ggt";
  j["version"] = 1;
  j["config"]["s"] = doc.cfg.s;
  j["config"]["ess"] = doc.cfg.score.ess;
  j["config"]["seed"] = doc.cfg.seed;
  j["config"]["max_order"] = doc.cfg.max_order;
  j["dataset"]["fingerprint"] = doc.fingerprint;
  j["dataset"]["rows"] = doc.rows;
  j["dataset"]["variables"] = doc.names;
  j["dataset"]["cardinalities"] = doc.cards;
  j["root"] = detail::node_to_json(doc.root, doc.names);
  return j.dump(2) + "\n";
}

inline GgtDocument deserialize_ggt(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("ggt: parse failure at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "brai-ggt")
      throw ParseError("ggt: unrecognized format tag");
    GgtDocument doc;
    doc.cfg.s = j.at("config").at("s").get<int>();
    doc.cfg.score.ess = j.at("config").at("ess").get<double>();
    doc.cfg.seed = j.at("config").at("seed").get<uint64_t>();
    doc.cfg.max_order = j.at("config").at("max_order").get<int>();
    doc.fingerprint = j.at("dataset").at("fingerprint").get<std::string>();
    doc.rows = j.at("dataset").at("rows").get<int64_t>();
    doc.names = j.at("dataset").at("variables").get<std::vector<std::string>>();
    doc.cards = j.at("dataset").at("cardinalities").get<std::vector<int>>();
    doc.root = detail::node_from_json(j.at("root"), doc.names);
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ggt: malformed document: ") + e.what());
  }
}

}  // namespace brai
