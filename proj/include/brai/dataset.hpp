#pragma once

// Discrete data tables: CSV loading with an optional schema sidecar,
// bootstrap resampling, and exact contingency counting.

#include <atomic>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "brai/common.hpp"
#include "brai/rng.hpp"

namespace brai {

using VarId = int;

// Immutable table of discrete observations. Cell values for variable i lie in
// [0, cardinalities[i]). Every instance carries a process-unique id so caches
// keyed by dataset never mix resamples with their source.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<std::string> names, std::vector<int> cards, std::vector<int32_t> cells,
          int bias_generation = 1)
      : names_(std::move(names)),
        cards_(std::move(cards)),
        cells_(std::move(cells)),
        id_(next_id()),
        bias_generation_(bias_generation) {
    if (bias_generation_ < 1) throw Error("dataset: bias generation must be >= 1");
    if (names_.size() != cards_.size()) throw Error("dataset: names/cardinalities size mismatch");
    const std::size_t nv = names_.size();
    if (nv == 0) throw Error("dataset: zero variables");
    if (cells_.size() % nv != 0) throw Error("dataset: cell count not a multiple of arity");
    for (std::size_t i = 0; i < cards_.size(); ++i) {
      if (cards_[i] < 1) throw Error("dataset: cardinality < 1 for variable " + names_[i]);
    }
    const int64_t rows = static_cast<int64_t>(cells_.size() / nv);
    for (int64_t r = 0; r < rows; ++r) {
      for (std::size_t v = 0; v < nv; ++v) {
        int32_t c = cells_[r * nv + v];
        if (c < 0 || c >= cards_[v]) {
          throw Error("dataset: value " + std::to_string(c) + " out of range for variable " +
                      names_[v] + " at row " + std::to_string(r));
        }
      }
    }
  }

  int n_vars() const { return static_cast<int>(names_.size()); }
  int64_t n_rows() const { return names_.empty() ? 0 : static_cast<int64_t>(cells_.size() / names_.size()); }
  int32_t cell(int64_t row, VarId v) const { return cells_[row * n_vars() + v]; }
  int card(VarId v) const { return cards_[v]; }
  const std::vector<int>& cardinalities() const { return cards_; }
  const std::vector<std::string>& variable_names() const { return names_; }
  uint64_t id() const { return id_; }

  // 1 for data observed directly; +1 per resampling round. A plug-in estimate
  // computed from a resample inherits the source's estimation bias on top of
  // its own.
  int bias_generation() const { return bias_generation_; }

  int var_index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    throw Error("dataset: unknown variable '" + name + "'");
  }

  std::string fingerprint() const {
    uint64_t h = fnv1a64(cells_.data(), cells_.size() * sizeof(int32_t));
    h = fnv1a64(cards_.data(), cards_.size() * sizeof(int), h);
    for (const auto& n : names_) h = fnv1a64(n, h);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
  }

 private:
  static uint64_t next_id() {
    static std::atomic<uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  std::vector<std::string> names_;
  std::vector<int> cards_;
  std::vector<int32_t> cells_;  // row-major
  uint64_t id_ = 0;
  int bias_generation_ = 1;
};

// A dataset resampled with replacement from a source; row count matches the
// source. Keeps its own id (via data) plus provenance.
struct BootstrapSample {
  Dataset data;
  uint64_t source_id = 0;
  uint64_t seed = 0;
};

// Exact joint counts of a dataset projected onto an ordered variable subset.
// Configurations are packed little-endian: vars[0] is the least significant
// digit of the key.
class ContingencyTable {
 public:
  ContingencyTable(std::vector<VarId> vars, std::vector<int> cards)
      : vars_(std::move(vars)), cards_(std::move(cards)) {
    radix_check();
  }

  const std::vector<VarId>& variable_ids() const { return vars_; }
  const std::vector<int>& cardinalities() const { return cards_; }
  int64_t total() const { return total_; }
  const std::unordered_map<uint64_t, int64_t>& cells() const { return cells_; }

  void add(uint64_t packed, int64_t c = 1) {
    cells_[packed] += c;
    total_ += c;
  }

  uint64_t pack(const std::vector<int>& config) const {
    if (config.size() != vars_.size()) throw Error("contingency: config arity mismatch");
    uint64_t key = 0;
    for (std::size_t i = vars_.size(); i-- > 0;) {
      key = key * static_cast<uint64_t>(cards_[i]) + static_cast<uint64_t>(config[i]);
    }
    return key;
  }

  std::vector<int> unpack(uint64_t key) const {
    std::vector<int> config(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      config[i] = static_cast<int>(key % static_cast<uint64_t>(cards_[i]));
      key /= static_cast<uint64_t>(cards_[i]);
    }
    return config;
  }

  int64_t at(const std::vector<int>& config) const {
    auto it = cells_.find(pack(config));
    return it == cells_.end() ? 0 : it->second;
  }

 private:
  void radix_check() const {
    long double prod = 1.0L;
    for (int c : cards_) {
      if (c < 1) throw Error("contingency: cardinality < 1");
      prod *= c;
    }
    if (prod > 9.0e18L) throw Error("contingency: configuration space too large to index");
  }

  std::vector<VarId> vars_;
  std::vector<int> cards_;
  std::unordered_map<uint64_t, int64_t> cells_;
  int64_t total_ = 0;
};

inline ContingencyTable counts(const Dataset& data, const std::vector<VarId>& vars) {
  if (vars.empty()) throw Error("counts: empty variable subset");
  std::vector<int> cards;
  cards.reserve(vars.size());
  for (VarId v : vars) {
    if (v < 0 || v >= data.n_vars()) throw Error("counts: invalid variable index " + std::to_string(v));
    cards.push_back(data.card(v));
  }
  ContingencyTable table(vars, cards);
  const int64_t rows = data.n_rows();
  for (int64_t r = 0; r < rows; ++r) {
    uint64_t key = 0;
    for (std::size_t i = vars.size(); i-- > 0;) {
      key = key * static_cast<uint64_t>(cards[i]) + static_cast<uint64_t>(data.cell(r, vars[i]));
    }
    table.add(key);
  }
  return table;
}

inline BootstrapSample bootstrap_resample(const Dataset& data, SplitRng& rng) {
  const int64_t rows = data.n_rows();
  if (rows == 0) throw Error("bootstrap_resample: empty dataset");
  const int nv = data.n_vars();
  std::vector<int32_t> cells;
  cells.reserve(static_cast<std::size_t>(rows) * nv);
  const uint64_t seed = rng.seed();
  for (int64_t i = 0; i < rows; ++i) {
    int64_t r = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(rows)));
    for (int v = 0; v < nv; ++v) cells.push_back(data.cell(r, v));
  }
  BootstrapSample sample;
  sample.data = Dataset(data.variable_names(), data.cardinalities(), std::move(cells),
                        data.bias_generation() + 1);
  sample.source_id = data.id();
  sample.seed = seed;
  return sample;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

// Optional sidecar pinning cardinalities: one "name,cardinality" line per
// variable. Variables absent from the sidecar keep inferred cardinalities.
inline std::unordered_map<std::string, int> load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("schema: cannot open '" + path + "'");
  std::unordered_map<std::string, int> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 2) {
      throw ParseError("schema: expected 'name,cardinality' at line " + std::to_string(lineno));
    }
    try {
      std::size_t pos = 0;
      int card = std::stoi(fields[1], &pos);
      if (pos != fields[1].size() || card < 1) throw std::invalid_argument("");
      out[fields[0]] = card;
    } catch (const std::exception&) {
      throw ParseError("schema: bad cardinality '" + fields[1] + "' at line " + std::to_string(lineno));
    }
  }
  return out;
}

// CSV with a header row of variable names and integer category cells.
// Cardinalities are inferred as max+1 per column unless pinned by the schema.
inline Dataset load_csv(const std::string& path, const std::string& schema_path = "") {
  std::ifstream in(path);
  if (!in) throw Error("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("load_csv: empty file '" + path + "'");
  line = detail::strip_cr(line);
  std::vector<std::string> names = detail::split_csv_line(line);
  if (names.empty()) throw ParseError("load_csv: empty header in '" + path + "'");
  const std::size_t nv = names.size();

  std::vector<int32_t> cells;
  std::vector<int> maxval(nv, -1);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != nv) {
      throw ParseError("load_csv: expected " + std::to_string(nv) + " fields, got " +
                       std::to_string(fields.size()) + " at line " + std::to_string(lineno));
    }
    for (std::size_t i = 0; i < nv; ++i) {
      int value = 0;
      try {
        std::size_t pos = 0;
        value = std::stoi(fields[i], &pos);
        if (pos != fields[i].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("load_csv: non-integer cell '" + fields[i] + "' at line " +
                         std::to_string(lineno));
      }
      if (value < 0) {
        throw ParseError("load_csv: negative cell at line " + std::to_string(lineno));
      }
      maxval[i] = std::max(maxval[i], value);
      cells.push_back(value);
    }
  }
  if (cells.empty()) throw Error("load_csv: no data rows in '" + path + "'");

  std::vector<int> cards(nv);
  for (std::size_t i = 0; i < nv; ++i) cards[i] = maxval[i] + 1;
  if (!schema_path.empty()) {
    auto schema = load_schema(schema_path);
    for (std::size_t i = 0; i < nv; ++i) {
      auto it = schema.find(names[i]);
      if (it == schema.end()) continue;
      if (it->second <= maxval[i]) {
        throw Error("load_csv: schema cardinality " + std::to_string(it->second) +
                    " too small for observed values of '" + names[i] + "'");
      }
      cards[i] = it->second;
    }
  }
  return Dataset(std::move(names), std::move(cards), std::move(cells));
}

}  // namespace brai
