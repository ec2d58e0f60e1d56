#pragma once

// Ground-truth networks for experiments: a DAG plus per-variable CPTs,
// forward (ancestral) sampling, parameter fitting with Dirichlet smoothing,
// held-out log-likelihood, and a small catalog of benchmark topologies.
//
// CPT layout: for variable v with sorted parents p1 < ... < pk, row j is the
// lexicographic index of the parent configuration (p1 most significant); each
// row holds card(v) probabilities.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "brai/common.hpp"
#include "brai/dataset.hpp"
#include "brai/graph.hpp"
#include "brai/rng.hpp"

namespace brai {

struct GroundTruthNetwork {
  std::vector<std::string> names;
  std::vector<int> cards;
  ChainGraph graph;  // DAG
  std::vector<std::vector<double>> cpts;  // per variable, q rows of card(v)

  int n_vars() const { return static_cast<int>(names.size()); }

  int64_t parent_rows(int v) const {
    int64_t q = 1;
    for (int p : graph.parents(v)) q *= cards[p];
    return q;
  }

  void validate() const {
    if (!graph.is_dag()) throw Error("network: graph is not a DAG");
    if (names.size() != cards.size() || cpts.size() != names.size())
      throw Error("network: inconsistent field sizes");
    for (int v = 0; v < n_vars(); ++v) {
      const int64_t q = parent_rows(v);
      const int r = cards[v];
      if (static_cast<int64_t>(cpts[v].size()) != q * r)
        throw Error("network: CPT size mismatch for variable " + names[v]);
      for (int64_t j = 0; j < q; ++j) {
        double sum = 0.0;
        for (int k = 0; k < r; ++k) {
          double p = cpts[v][j * r + k];
          if (p < 0.0) throw Error("network: negative probability in CPT of " + names[v]);
          sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
          throw Error("network: CPT row of " + names[v] + " sums to " + std::to_string(sum));
      }
    }
  }
};

namespace detail {

// Lexicographic index of the parent configuration read through `value`.
template <typename Getter>
inline int64_t parent_config_index(const GroundTruthNetwork& net, int v, Getter&& value) {
  int64_t idx = 0;
  for (int p : net.graph.parents(v)) idx = idx * net.cards[p] + value(p);
  return idx;
}

}  // namespace detail

inline Dataset forward_sample(const GroundTruthNetwork& net, int64_t n, SplitRng& rng) {
  if (n < 1) throw Error("forward_sample: n must be >= 1");
  net.validate();
  const std::vector<int> order = topological_order(net.graph);
  const int nv = net.n_vars();
  std::vector<int32_t> cells(static_cast<std::size_t>(n) * nv);
  std::vector<int> row(nv, 0);
  for (int64_t i = 0; i < n; ++i) {
    for (int v : order) {
      const int64_t j = detail::parent_config_index(net, v, [&](int p) { return row[p]; });
      const double* probs = net.cpts[v].data() + j * net.cards[v];
      double u = rng.next_double();
      int value = net.cards[v] - 1;
      double acc = 0.0;
      for (int k = 0; k < net.cards[v]; ++k) {
        acc += probs[k];
        if (u < acc) {
          value = k;
          break;
        }
      }
      row[v] = value;
    }
    for (int v = 0; v < nv; ++v) cells[i * nv + v] = static_cast<int32_t>(row[v]);
  }
  return Dataset(net.names, net.cards, std::move(cells));
}

// Posterior-mean parameters of a DAG on the training data: pseudo-count
// ess/(q*r) per cell.
inline GroundTruthNetwork fit_parameters(const Dataset& train, const ChainGraph& dag, double ess) {
  if (!dag.is_dag()) throw Error("fit_parameters: graph is not a DAG");
  if (dag.num_nodes() != train.n_vars()) throw Error("fit_parameters: size mismatch");
  GroundTruthNetwork net;
  net.names = train.variable_names();
  net.cards = train.cardinalities();
  net.graph = dag;
  net.cpts.resize(net.n_vars());
  for (int v = 0; v < net.n_vars(); ++v) {
    const int64_t q = net.parent_rows(v);
    const int r = net.cards[v];
    std::vector<int64_t> njk(static_cast<std::size_t>(q) * r, 0);
    std::vector<int64_t> nj(static_cast<std::size_t>(q), 0);
    for (int64_t row = 0; row < train.n_rows(); ++row) {
      const int64_t j =
          detail::parent_config_index(net, v, [&](int p) { return train.cell(row, p); });
      ++nj[j];
      ++njk[j * r + train.cell(row, v)];
    }
    const double alpha_jk = ess / (static_cast<double>(q) * r);
    const double alpha_j = ess / static_cast<double>(q);
    net.cpts[v].resize(static_cast<std::size_t>(q) * r);
    for (int64_t j = 0; j < q; ++j)
      for (int k = 0; k < r; ++k)
        net.cpts[v][j * r + k] =
            (static_cast<double>(njk[j * r + k]) + alpha_jk) / (static_cast<double>(nj[j]) + alpha_j);
  }
  return net;
}

// Sum of log-probabilities (natural log) of the rows under the network.
inline double log_likelihood(const GroundTruthNetwork& net, const Dataset& data) {
  if (data.n_vars() != net.n_vars()) throw Error("log_likelihood: size mismatch");
  double total = 0.0;
  for (int64_t row = 0; row < data.n_rows(); ++row) {
    for (int v = 0; v < net.n_vars(); ++v) {
      const int64_t j =
          detail::parent_config_index(net, v, [&](int p) { return data.cell(row, p); });
      total += std::log(net.cpts[v][j * net.cards[v] + data.cell(row, v)]);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Text format: [variables] name,cardinality; [edges] u -> v; [cpts] blocks
// "var <name>" followed by one probability row per parent configuration.

inline std::string network_to_text(const GroundTruthNetwork& net) {
  std::ostringstream out;
  out << "[variables]\n";
  for (int v = 0; v < net.n_vars(); ++v) out << net.names[v] << "," << net.cards[v] << "\n";
  out << "[edges]\n";
  for (auto [u, v] : net.graph.directed_edges()) out << net.names[u] << " -> " << net.names[v] << "\n";
  out << "[cpts]\n";
  out.precision(17);
  for (int v = 0; v < net.n_vars(); ++v) {
    out << "var " << net.names[v] << "\n";
    const int64_t q = net.parent_rows(v);
    const int r = net.cards[v];
    for (int64_t j = 0; j < q; ++j) {
      for (int k = 0; k < r; ++k) out << (k ? " " : "") << net.cpts[v][j * r + k];
      out << "\n";
    }
  }
  return out.str();
}

inline GroundTruthNetwork network_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int section = 0;  // 1=variables 2=edges 3=cpts
  GroundTruthNetwork net;
  std::vector<std::pair<std::string, std::string>> edges;
  int cpt_var = -1;
  std::vector<std::vector<double>> rows;
  auto flush_cpt = [&]() {
    if (cpt_var < 0) return;
    std::vector<double> flat;
    for (const auto& r : rows)
      for (double p : r) flat.push_back(p);
    net.cpts[cpt_var] = std::move(flat);
    rows.clear();
    cpt_var = -1;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "[variables]") { section = 1; continue; }
    if (line == "[edges]") { section = 2; continue; }
    if (line == "[cpts]") {
      section = 3;
      net.graph = ChainGraph(net.n_vars());
      for (const auto& [a, b] : edges) {
        int ia = -1, ib = -1;
        for (int i = 0; i < net.n_vars(); ++i) {
          if (net.names[i] == a) ia = i;
          if (net.names[i] == b) ib = i;
        }
        if (ia < 0 || ib < 0) throw ParseError("network: edge names unknown: " + a + " -> " + b);
        net.graph.add_directed(ia, ib);
      }
      net.cpts.resize(net.n_vars());
      continue;
    }
    switch (section) {
      case 1: {
        auto comma = line.find(',');
        if (comma == std::string::npos)
          throw ParseError("network: expected name,cardinality at line " + std::to_string(lineno));
        net.names.push_back(line.substr(0, comma));
        net.cards.push_back(std::stoi(line.substr(comma + 1)));
        break;
      }
      case 2: {
        std::istringstream ls(line);
        std::string a, op, b;
        if (!(ls >> a >> op >> b) || op != "->")
          throw ParseError("network: bad edge at line " + std::to_string(lineno));
        edges.emplace_back(a, b);
        break;
      }
      case 3: {
        if (line.rfind("var ", 0) == 0) {
          flush_cpt();
          const std::string name = line.substr(4);
          for (int i = 0; i < net.n_vars(); ++i)
            if (net.names[i] == name) cpt_var = i;
          if (cpt_var < 0) throw ParseError("network: unknown CPT variable '" + name + "'");
        } else {
          if (cpt_var < 0) throw ParseError("network: CPT row before any 'var' header");
          std::istringstream ls(line);
          std::vector<double> row;
          double p;
          while (ls >> p) row.push_back(p);
          rows.push_back(std::move(row));
        }
        break;
      }
      default:
        throw ParseError("network: content before any section at line " + std::to_string(lineno));
    }
  }
  flush_cpt();
  net.validate();
  return net;
}

inline GroundTruthNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_network: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return network_from_text(buf.str());
}

inline void save_network(const GroundTruthNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_network: cannot open '" + path + "'");
  out << network_to_text(net);
}

// ---------------------------------------------------------------------------
// Benchmark networks.

namespace detail {

// Binary CPT row with the probability of 1 given as p1.
inline std::vector<double> brow(double p1) { return {1.0 - p1, p1}; }

inline void append_rows(std::vector<double>& cpt, const std::vector<std::vector<double>>& rows) {
  for (const auto& r : rows)
    for (double p : r) cpt.push_back(p);
}

// Random CPT row bounded away from 0 and 1; sharp enough to be learnable.
inline std::vector<double> random_row(int card, SplitRng& rng) {
  if (card == 2) {
    double p = 0.68 + 0.27 * rng.next_double();  // [0.68, 0.95]
    if (rng.next_below(2) == 0) p = 1.0 - p;
    return {1.0 - p, p};
  }
  std::vector<double> row(card);
  double total = 0.0;
  for (int k = 0; k < card; ++k) {
    row[k] = 0.05 + rng.next_gamma(0.4);
    total += row[k];
  }
  for (double& p : row) p /= total;
  return row;
}

}  // namespace detail

// Eight binary variables with the classic chest-clinic topology; parameters
// are fixed values chosen so every edge carries a clearly detectable
// dependence.
inline GroundTruthNetwork asia_network() {
  GroundTruthNetwork net;
  net.names = {"asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"};
  net.cards = std::vector<int>(8, 2);
  net.graph = ChainGraph(8);
  net.graph.add_directed(0, 1);  // asia -> tub
  net.graph.add_directed(2, 3);  // smoke -> lung
  net.graph.add_directed(2, 4);  // smoke -> bronc
  net.graph.add_directed(1, 5);  // tub -> either
  net.graph.add_directed(3, 5);  // lung -> either
  net.graph.add_directed(5, 6);  // either -> xray
  net.graph.add_directed(5, 7);  // either -> dysp
  net.graph.add_directed(4, 7);  // bronc -> dysp
  net.cpts.resize(8);
  using detail::append_rows;
  using detail::brow;
  // Strong links: decisive at hundreds of rows, genuinely uncertain at a
  // few dozen.
  net.cpts[0] = brow(0.35);
  append_rows(net.cpts[1], {brow(0.12), brow(0.72)});             // tub | asia
  net.cpts[2] = brow(0.5);
  append_rows(net.cpts[3], {brow(0.10), brow(0.74)});             // lung | smoke
  append_rows(net.cpts[4], {brow(0.20), brow(0.78)});             // bronc | smoke
  append_rows(net.cpts[5], {brow(0.04), brow(0.90), brow(0.90), brow(0.97)});  // either | tub,lung
  append_rows(net.cpts[6], {brow(0.08), brow(0.88)});             // xray | either
  append_rows(net.cpts[7], {brow(0.10), brow(0.72), brow(0.68), brow(0.94)}); // dysp | bronc,either
  net.validate();
  return net;
}

// Twenty-node pediatric-diagnosis topology; CPT rows drawn from the caller's
// stream so experiments can vary the parameterization by seed.
inline GroundTruthNetwork child_network(SplitRng& rng) {
  GroundTruthNetwork net;
  net.names = {"BirthAsphyxia", "Disease",     "Age",        "LVH",         "DuctFlow",
               "CardiacMixing", "LungParench", "LungFlow",   "Sick",        "HypDistrib",
               "HypoxiaInO2",   "CO2",         "ChestXray",  "Grunting",    "LVHreport",
               "LowerBodyO2",   "RUQO2",       "CO2Report",  "XrayReport",  "GruntingReport"};
  net.cards = {2, 6, 3, 2, 3, 4, 3, 3, 2, 2, 3, 3, 5, 2, 2, 3, 3, 2, 5, 2};
  net.graph = ChainGraph(20);
  auto edge = [&](int u, int v) { net.graph.add_directed(u, v); };
  edge(0, 1);             // BirthAsphyxia -> Disease
  edge(1, 2);             // Disease -> Age
  edge(1, 3);             // Disease -> LVH
  edge(1, 4);             // Disease -> DuctFlow
  edge(1, 5);             // Disease -> CardiacMixing
  edge(1, 6);             // Disease -> LungParench
  edge(1, 7);             // Disease -> LungFlow
  edge(1, 8);             // Disease -> Sick
  edge(3, 14);            // LVH -> LVHreport
  edge(4, 9);             // DuctFlow -> HypDistrib
  edge(5, 9);             // CardiacMixing -> HypDistrib
  edge(5, 10);            // CardiacMixing -> HypoxiaInO2
  edge(6, 10);            // LungParench -> HypoxiaInO2
  edge(6, 11);            // LungParench -> CO2
  edge(6, 12);            // LungParench -> ChestXray
  edge(7, 12);            // LungFlow -> ChestXray
  edge(6, 13);            // LungParench -> Grunting
  edge(8, 13);            // Sick -> Grunting
  edge(8, 2);             // Sick -> Age
  edge(9, 15);            // HypDistrib -> LowerBodyO2
  edge(10, 15);           // HypoxiaInO2 -> LowerBodyO2
  edge(10, 16);           // HypoxiaInO2 -> RUQO2
  edge(11, 17);           // CO2 -> CO2Report
  edge(12, 18);           // ChestXray -> XrayReport
  edge(13, 19);           // Grunting -> GruntingReport
  net.cpts.resize(20);
  for (int v = 0; v < 20; ++v) {
    const int64_t q = net.parent_rows(v);
    for (int64_t j = 0; j < q; ++j)
      detail::append_rows(net.cpts[v], {detail::random_row(net.cards[v], rng)});
  }
  net.validate();
  return net;
}

// Five binary variables, complete DAG minus the (0,1) edge. Each CPT is
// additive in the number of active parents, so every edge stays strongly
// detectable under any small conditioning set.
inline GroundTruthNetwork dense5_network() {
  GroundTruthNetwork net;
  net.names = {"V0", "V1", "V2", "V3", "V4"};
  net.cards = std::vector<int>(5, 2);
  net.graph = ChainGraph(5);
  for (int u = 0; u < 5; ++u)
    for (int v = u + 1; v < 5; ++v)
      if (!(u == 0 && v == 1)) net.graph.add_directed(u, v);
  net.cpts.resize(5);
  for (int v = 0; v < 5; ++v) {
    const auto parents = net.graph.parents(v);
    const int k = static_cast<int>(parents.size());
    const int64_t q = net.parent_rows(v);
    for (int64_t j = 0; j < q; ++j) {
      int ones = 0;
      int64_t rest = j;
      for (int i = k; i-- > 0;) {
        ones += static_cast<int>(rest % 2);
        rest /= 2;
      }
      const double p1 = k == 0 ? 0.5 : 0.08 + 0.84 * (static_cast<double>(ones) / k);
      detail::append_rows(net.cpts[v], {detail::brow(p1)});
    }
  }
  net.validate();
  return net;
}

// Random DAG over the natural order with random learnable CPTs.
inline GroundTruthNetwork random_network(int n_vars, SplitRng& rng, double edge_prob = 0.5,
                                         int card = 2) {
  if (n_vars < 1) throw Error("random_network: n_vars must be >= 1");
  GroundTruthNetwork net;
  for (int i = 0; i < n_vars; ++i) net.names.push_back("X" + std::to_string(i));
  net.cards = std::vector<int>(n_vars, card);
  net.graph = ChainGraph(n_vars);
  for (int u = 0; u < n_vars; ++u)
    for (int v = u + 1; v < n_vars; ++v)
      if (rng.next_double() < edge_prob) net.graph.add_directed(u, v);
  net.cpts.resize(n_vars);
  for (int v = 0; v < n_vars; ++v) {
    const int64_t q = net.parent_rows(v);
    for (int64_t j = 0; j < q; ++j)
      detail::append_rows(net.cpts[v], {detail::random_row(card, rng)});
  }
  net.validate();
  return net;
}

}  // namespace brai
