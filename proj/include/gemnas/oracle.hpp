#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gemnas/graph.hpp"

namespace gemnas {

struct Evaluation {
  double accuracy = 0.0;      // in [0, 1]
  double mac_millions = 0.0;  // >= 0
  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

// S = accuracy - lambda * ln(mac_millions). Throws std::domain_error when
// lambda > 0 and mac_millions <= 0.
double efficiency_score(const Evaluation& eval, double lambda);

// Stand-in for proxy training: accuracy is a squashed weighted sum of pruned
// cell topology features plus per-architecture Gaussian noise. The noise is
// keyed on the WL canonical hash, so structurally equivalent graphs always
// receive the same evaluation.
struct SyntheticOracleConfig {
  double w_longest_path = 0.5;   // longest path length in edges, raw
  double w_mean_in_degree = 0.8; // mean in-degree over active nodes, raw
  double w_op_mix = 1.0;         // mean per-op scalar in [0, 1]
  double bias = -1.5;            // constant term inside the sigmoid
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;
  int hash_iterations = 2;       // WL rounds for the per-graph noise key
};

Evaluation synthetic_evaluate(const Dag& dag, const SyntheticOracleConfig& cfg, int channels,
                              Resolution resolution);

struct BenchmarkTableMetadata {
  int n = 0;
  std::vector<OpKind> op_palette;
  int hash_iterations = 2;
};

// Persistent map from WL canonical hash to a stored evaluation. Entries keep
// insertion order so that saving, loading, and index-based sampling are
// deterministic. Entries may carry the architecture itself, which enables
// sample-from-table protocols.
class BenchmarkTable {
 public:
  struct Entry {
    std::string hash;
    Evaluation evaluation;
    std::optional<Dag> dag;
  };

  BenchmarkTable() = default;
  explicit BenchmarkTable(BenchmarkTableMetadata meta) : meta_(std::move(meta)) {}

  // Returns false when the hash is already present (first entry wins).
  bool insert(std::string hash, Evaluation evaluation, std::optional<Dag> dag = std::nullopt);

  const Evaluation* find(const std::string& hash) const;
  bool contains(const std::string& hash) const { return find(hash) != nullptr; }

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& entry(std::size_t i) const { return entries_.at(i); }
  const BenchmarkTableMetadata& metadata() const { return meta_; }

  double max_accuracy() const;

  // Newline-delimited JSON; a header record carries the metadata.
  void save(const std::filesystem::path& path) const;
  static BenchmarkTable load(const std::filesystem::path& path);

 private:
  BenchmarkTableMetadata meta_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Exact lookup by wl_canonical_hash(dag, table hash iterations). Throws
// MissingArchitectureError when absent.
Evaluation tabular_evaluate(const Dag& dag, const BenchmarkTable& table);

// Uniform oracle interface over synthetic and tabular backends.
class EvaluationOracle {
 public:
  virtual ~EvaluationOracle() = default;
  virtual Evaluation evaluate(const Dag& dag) const = 0;
};

class SyntheticOracle : public EvaluationOracle {
 public:
  SyntheticOracle(SyntheticOracleConfig cfg, int channels, Resolution resolution)
      : cfg_(cfg), channels_(channels), resolution_(resolution) {}
  Evaluation evaluate(const Dag& dag) const override {
    return synthetic_evaluate(dag, cfg_, channels_, resolution_);
  }
  const SyntheticOracleConfig& config() const { return cfg_; }

 private:
  SyntheticOracleConfig cfg_;
  int channels_;
  Resolution resolution_;
};

class TabularOracle : public EvaluationOracle {
 public:
  explicit TabularOracle(const BenchmarkTable& table) : table_(table) {}
  Evaluation evaluate(const Dag& dag) const override { return tabular_evaluate(dag, table_); }
  const BenchmarkTable& table() const { return table_; }

 private:
  const BenchmarkTable& table_;
};

}  // namespace gemnas
