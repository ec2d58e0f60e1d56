// Command-line front end: learn a graph generative tree, extract MAP models,
// sample CPDAGs, compute feature posteriors, and run the benchmark grids.
//
// Exit codes: 0 success, 2 usage error, 1 runtime failure.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "brai/averaging.hpp"
#include "brai/bruteforce.hpp"
#include "brai/dataset.hpp"
#include "brai/ggt.hpp"
#include "brai/network.hpp"
#include "brai/sampler.hpp"

namespace {

using nlohmann::json;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw brai::Error("cannot open output file '" + path + "'");
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw brai::Error("cannot open input file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json budget_json(const brai::CiBudget& budget) {
  json by_order = json::object();
  auto orders = budget.by_order();
  for (std::size_t i = 0; i < orders.size(); ++i)
    if (orders[i] > 0) by_order[std::to_string(i)] = orders[i];
  return json{{"total", budget.total()}, {"by_order", by_order}};
}

// One manifest per run, written next to the primary output.
void write_manifest(const std::string& out_path, const std::string& command, const json& config,
                    const json& dataset, const json& budget, double wall_seconds) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["dataset"] = dataset;
  m["ci_budget"] = budget;
  m["wall_time_seconds"] = wall_seconds;
  const std::string path = out_path.empty() ? command + ".manifest.json" : out_path + ".manifest.json";
  write_file(path, m.dump(2) + "\n");
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) std::cout << content;
  else write_file(out_path, content);
}

int env_thread_count() {
  const char* v = std::getenv("BRAI_THREADS");
  if (!v) return 1;
  int n = std::atoi(v);
  return n < 1 ? 1 : n;
}

std::vector<int64_t> parse_grid(const std::string& text) {
  std::vector<int64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    auto dots = tok.find("..");
    if (dots != std::string::npos) {
      int64_t a = std::stoll(tok.substr(0, dots));
      int64_t b = std::stoll(tok.substr(dots + 2));
      for (int64_t v = a; v <= b; ++v) out.push_back(v);
    } else {
      out.push_back(std::stoll(tok));
    }
  }
  if (out.empty()) throw brai::Error("empty grid specification '" + text + "'");
  return out;
}

std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct LearnArgs {
  std::string data_path, schema_path, out_path;
  int s = 3;
  double ess = 1.0;
  uint64_t seed = 0;
  int max_order = -1;
};

int cmd_learn(const LearnArgs& a) {
  const double t0 = now_seconds();
  brai::Dataset data = brai::load_csv(a.data_path, a.schema_path);
  brai::BraiConfig cfg;
  cfg.s = a.s;
  cfg.score.ess = a.ess;
  cfg.seed = a.seed;
  cfg.max_order = a.max_order;
  brai::LearnContext ctx;
  brai::GgtNode root = brai::brai_learn_tree(data, cfg, ctx);
  brai::GgtDocument doc{cfg, data.fingerprint(), data.n_rows(), data.variable_names(),
                        data.cardinalities(), std::move(root)};
  write_file(a.out_path, brai::serialize_ggt(doc));
  json config{{"s", a.s}, {"ess", a.ess}, {"seed", a.seed}, {"max_order", a.max_order}};
  json dataset{{"fingerprint", data.fingerprint()}, {"rows", data.n_rows()},
               {"vars", data.n_vars()}};
  write_manifest(a.out_path, "learn", config, dataset, budget_json(ctx.budget),
                 now_seconds() - t0);
  std::cerr << "ggt written to " << a.out_path << " (" << brai::ggt_leaf_count(doc.root)
            << " leaves, " << ctx.budget.total() << " CI tests)\n";
  return 0;
}

struct GgtArgs {
  std::string ggt_path, out_path, truth_path;
  int m = 1;
  std::size_t k = 10;
  double gamma = 1.0;
  uint64_t seed = 0;
};

int cmd_map(const GgtArgs& a) {
  const double t0 = now_seconds();
  brai::GgtDocument doc = brai::deserialize_ggt(read_file(a.ggt_path));
  brai::ScoredCpdag map = brai::map_cpdag(doc.root);
  std::ostringstream out;
  out << brai::graph_to_text(map.cpdag, doc.names);
  out << "score " << format_score(map.score) << "\n";
  emit(a.out_path, out.str());
  json config{{"s", doc.cfg.s}, {"ess", doc.cfg.score.ess}, {"seed", doc.cfg.seed}};
  json dataset{{"fingerprint", doc.fingerprint}, {"rows", doc.rows}};
  write_manifest(a.out_path, "map", config, dataset, budget_json(brai::CiBudget{}),
                 now_seconds() - t0);
  return 0;
}

int cmd_sample(const GgtArgs& a) {
  const double t0 = now_seconds();
  brai::GgtDocument doc = brai::deserialize_ggt(read_file(a.ggt_path));
  brai::SplitRng rng(a.seed);
  brai::Temperature temp{a.gamma};
  std::ostringstream out;
  for (int i = 0; i < a.m; ++i) {
    brai::ScoredCpdag s = brai::sample_cpdag(doc.root, temp, rng);
    out << brai::graph_to_text(s.cpdag, doc.names);
    out << "score " << format_score(s.score) << "\n";
    if (i + 1 < a.m) out << "\n";
  }
  emit(a.out_path, out.str());
  json config{{"m", a.m}, {"gamma", a.gamma}, {"seed", a.seed}};
  json dataset{{"fingerprint", doc.fingerprint}, {"rows", doc.rows}};
  write_manifest(a.out_path, "sample", config, dataset, budget_json(brai::CiBudget{}),
                 now_seconds() - t0);
  return 0;
}

int cmd_features(const GgtArgs& a) {
  const double t0 = now_seconds();
  brai::GgtDocument doc = brai::deserialize_ggt(read_file(a.ggt_path));
  brai::TopKResult top = brai::top_k_paths(doc.root, a.k);
  if (top.shortfall)
    std::cerr << "note: only " << top.models.size() << " distinct CPDAGs reachable (k=" << a.k
              << ")\n";
  const int n = static_cast<int>(doc.names.size());
  bool have_truth = !a.truth_path.empty();
  brai::GroundTruthNetwork truth;
  if (have_truth) truth = brai::load_network(a.truth_path);

  std::ostringstream csv;
  csv << "kind,x,y,posterior,label\n";
  const brai::FeatureKind kinds[] = {brai::FeatureKind::Edge, brai::FeatureKind::MarkovBlanket,
                                     brai::FeatureKind::Path};
  std::ostringstream summary;
  for (brai::FeatureKind kind : kinds) {
    std::vector<brai::FeaturePosterior> posteriors;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        if (x == y) continue;
        brai::Feature f{kind, x, y};
        brai::FeaturePosterior p = brai::feature_posterior(f, top.models);
        posteriors.push_back(p);
        csv << brai::feature_kind_name(kind) << "," << doc.names[x] << "," << doc.names[y] << ","
            << p.probability << ",";
        if (have_truth) csv << brai::feature_holds(f, truth.graph);
        csv << "\n";
      }
    }
    if (have_truth) {
      try {
        summary << "auc " << brai::feature_kind_name(kind) << " "
                << brai::auc(posteriors, truth.graph) << "\n";
      } catch (const brai::Error& e) {
        summary << "auc " << brai::feature_kind_name(kind) << " n/a (" << e.what() << ")\n";
      }
    }
  }
  emit(a.out_path, csv.str());
  std::cout << summary.str();
  json config{{"k", a.k}, {"ess", doc.cfg.score.ess}};
  json dataset{{"fingerprint", doc.fingerprint}, {"rows", doc.rows}};
  write_manifest(a.out_path, "features", config, dataset, budget_json(brai::CiBudget{}),
                 now_seconds() - t0);
  return 0;
}

// ---------------------------------------------------------------------------
// Benchmark grids: unique-CPDAG counts, CI budgets, MAP scores, and held-out
// predictive log-likelihood, per (sample size, seed) cell. With --arm classic
// the --s flag is the bootstrap repetition count l.

struct BenchArgs {
  std::string truth_path, out_path, arm = "brai";
  std::string grid_sizes = "50,100,500";
  std::string grid_seeds = "1..10";
  int s = 3;
  double ess = 1.0;
  int max_order = -1;
  int64_t heldout_rows = 5000;
};

struct BenchCell {
  int64_t n_rows = 0;
  int64_t seed = 0;
  std::size_t unique_cpdags = 0;
  int64_t ci_tests = 0;
  double map_score = 0.0;
  double heldout_loglik = 0.0;
  std::vector<int64_t> by_order;
};

BenchCell run_cell(const brai::GroundTruthNetwork& truth, const BenchArgs& args, int64_t n_rows,
                   int64_t seed) {
  brai::SplitRng base(static_cast<uint64_t>(seed));
  brai::SplitRng train_rng = base.child("train");
  brai::SplitRng heldout_rng = base.child("heldout");
  brai::Dataset train = brai::forward_sample(truth, n_rows, train_rng);
  brai::Dataset heldout = brai::forward_sample(truth, args.heldout_rows, heldout_rng);

  BenchCell cell;
  cell.n_rows = n_rows;
  cell.seed = seed;
  brai::LearnContext ctx;
  brai::ScoreConfig score_cfg{args.ess};
  brai::ChainGraph best;
  if (args.arm == "brai") {
    brai::BraiConfig cfg;
    cfg.s = args.s;
    cfg.score = score_cfg;
    cfg.seed = static_cast<uint64_t>(seed);
    cfg.max_order = args.max_order;
    brai::GgtNode root = brai::brai_learn_tree(train, cfg, ctx);
    cell.unique_cpdags = brai::count_unique_cpdags(root);
    brai::ScoredCpdag map = brai::map_cpdag(root);
    cell.map_score = map.score;
    best = map.cpdag;
  } else {
    std::set<std::vector<uint64_t>> unique;
    double best_score = 0.0;
    bool first = true;
    for (int l = 1; l <= args.s; ++l) {
      brai::SplitRng boot_rng = base.child("classic^" + std::to_string(l));
      brai::Dataset resampled = brai::bootstrap_resample(train, boot_rng).data;
      brai::ChainGraph cpdag = brai::rai_learn(resampled, ctx);
      unique.insert(cpdag.canonical_key());
      double sc = brai::graph_score(train, cpdag, score_cfg, &ctx.score_cache);
      if (first || sc > best_score) {
        best_score = sc;
        best = cpdag;
        first = false;
      }
    }
    cell.unique_cpdags = unique.size();
    cell.map_score = best_score;
  }
  cell.ci_tests = ctx.budget.total();
  cell.by_order = ctx.budget.by_order();
  brai::ChainGraph dag = best.num_undirected_edges() == 0 ? best : brai::consistent_extension(best);
  brai::GroundTruthNetwork fitted = brai::fit_parameters(train, dag, args.ess);
  cell.heldout_loglik = brai::log_likelihood(fitted, heldout);
  return cell;
}

int cmd_bench(const BenchArgs& args) {
  const double t0 = now_seconds();
  if (args.arm != "brai" && args.arm != "classic")
    throw brai::Error("--arm must be 'brai' or 'classic'");
  brai::GroundTruthNetwork truth = brai::load_network(args.truth_path);
  const std::vector<int64_t> sizes = parse_grid(args.grid_sizes);
  const std::vector<int64_t> seeds = parse_grid(args.grid_seeds);

  std::vector<std::pair<int64_t, int64_t>> cells;
  for (int64_t n : sizes)
    for (int64_t seed : seeds) cells.emplace_back(n, seed);

  std::vector<BenchCell> results(cells.size());
  const int threads = std::min<int>(env_thread_count(), static_cast<int>(cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      results[i] = run_cell(truth, args, cells[i].first, cells[i].second);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ostringstream csv;
  csv << "n_rows," << (args.arm == "brai" ? "s" : "l")
      << ",unique_cpdags,ci_tests,map_score,heldout_loglik\n";
  std::vector<int64_t> total_by_order;
  for (const BenchCell& cell : results) {
    csv << cell.n_rows << "," << args.s << "," << cell.unique_cpdags << "," << cell.ci_tests << ","
        << format_score(cell.map_score) << "," << format_score(cell.heldout_loglik) << "\n";
    if (cell.by_order.size() > total_by_order.size()) total_by_order.resize(cell.by_order.size(), 0);
    for (std::size_t i = 0; i < cell.by_order.size(); ++i) total_by_order[i] += cell.by_order[i];
  }
  emit(args.out_path, csv.str());

  // Budget report: one "order,count" line per condition-set size.
  std::cout << "order,count\n";
  int64_t total = 0;
  for (std::size_t i = 0; i < total_by_order.size(); ++i) {
    if (total_by_order[i] == 0) continue;
    std::cout << i << "," << total_by_order[i] << "\n";
    total += total_by_order[i];
  }

  json by_order = json::object();
  for (std::size_t i = 0; i < total_by_order.size(); ++i)
    if (total_by_order[i] > 0) by_order[std::to_string(i)] = total_by_order[i];
  json config{{"arm", args.arm},       {"s", args.s},
              {"ess", args.ess},       {"grid_sizes", args.grid_sizes},
              {"grid_seeds", args.grid_seeds}, {"heldout_rows", args.heldout_rows}};
  json dataset{{"truth", args.truth_path}, {"vars", truth.n_vars()}};
  write_manifest(args.out_path, "bench", config, dataset,
                 json{{"total", total}, {"by_order", by_order}}, now_seconds() - t0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"B-RAI: bootstrap-recursive structure learning over CPDAGs"};
  app.require_subcommand(1);

  LearnArgs learn_args;
  auto* learn = app.add_subcommand("learn", "construct a graph generative tree from data");
  learn->add_option("--data", learn_args.data_path, "training CSV")->required();
  learn->add_option("--schema", learn_args.schema_path, "cardinality sidecar");
  learn->add_option("--s", learn_args.s, "bootstrap branches per group")->check(CLI::PositiveNumber);
  learn->add_option("--ess", learn_args.ess, "equivalent sample size")
      ->check(CLI::PositiveNumber);
  learn->add_option("--seed", learn_args.seed, "master seed");
  learn->add_option("--max-order", learn_args.max_order, "cap on condition-set order");
  learn->add_option("--out", learn_args.out_path, "output GGT file")->required();

  GgtArgs map_args;
  auto* map_cmd = app.add_subcommand("map", "extract the MAP CPDAG from a GGT");
  map_cmd->add_option("--ggt", map_args.ggt_path, "GGT file")->required();
  map_cmd->add_option("--out", map_args.out_path, "output file (default stdout)");

  GgtArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "sample CPDAGs from a GGT");
  sample_cmd->add_option("--ggt", sample_args.ggt_path, "GGT file")->required();
  sample_cmd->add_option("-m", sample_args.m, "number of samples")
      ->required()
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--gamma", sample_args.gamma, "Boltzmann temperature")
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sample_args.seed, "sampler seed");
  sample_cmd->add_option("--out", sample_args.out_path, "output file (default stdout)");

  GgtArgs feat_args;
  auto* feat_cmd = app.add_subcommand("features", "posterior probabilities of structural features");
  feat_cmd->add_option("--ggt", feat_args.ggt_path, "GGT file")->required();
  feat_cmd->add_option("--k", feat_args.k, "number of top-scoring CPDAGs to average")
      ->check(CLI::PositiveNumber);
  feat_cmd->add_option("--truth", feat_args.truth_path, "ground-truth network for labels/AUC");
  feat_cmd->add_option("--out", feat_args.out_path, "output CSV (default stdout)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "experiment grids over sizes and seeds");
  bench_cmd->add_option("--truth", bench_args.truth_path, "ground-truth network file")->required();
  bench_cmd->add_option("--grid-sizes", bench_args.grid_sizes, "comma list / a..b ranges");
  bench_cmd->add_option("--grid-seeds", bench_args.grid_seeds, "comma list / a..b ranges");
  bench_cmd->add_option("--arm", bench_args.arm, "brai | classic");
  bench_cmd->add_option("--s", bench_args.s, "s (brai) or l (classic)")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--ess", bench_args.ess, "equivalent sample size")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--max-order", bench_args.max_order, "cap on condition-set order");
  bench_cmd->add_option("--heldout", bench_args.heldout_rows, "held-out rows per cell")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench_args.out_path, "output CSV")->required();

  try {
    app.parse(argc, argv);
    if (*learn) return cmd_learn(learn_args);
    if (*map_cmd) return cmd_map(map_args);
    if (*sample_cmd) return cmd_sample(sample_args);
    if (*feat_cmd) return cmd_features(feat_args);
    if (*bench_cmd) return cmd_bench(bench_args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
