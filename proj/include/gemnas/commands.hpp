#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gemnas/corpus.hpp"
#include "gemnas/encoder.hpp"
#include "gemnas/metrics.hpp"
#include "gemnas/predictor.hpp"
#include "gemnas/run_config.hpp"
#include "gemnas/search.hpp"

namespace gemnas {

// Owns whichever oracle backend the config selects (the tabular backend needs
// its table kept alive).
struct OracleHandle {
  std::unique_ptr<BenchmarkTable> table;  // set for tabular oracles
  std::unique_ptr<EvaluationOracle> oracle;
};

OracleHandle make_oracle(const RunConfig& cfg);

// Search-space sampler that rejects degenerate cells (graphs whose pruned form
// keeps nothing but the input node), so every sampled architecture has a
// positive MAC and a defined efficiency score.
std::function<Dag(Rng&)> make_space_sampler(const SearchSpaceConfig& space);

// Uniform draw over table entries that carry their architecture; used for
// sample-from-table protocols. Throws when no entry has one.
std::function<Dag(Rng&)> make_table_sampler(const BenchmarkTable& table);

// Table-backed runs sample from the table when possible, otherwise from the
// configured search space.
std::function<Dag(Rng&)> make_run_sampler(const RunConfig& cfg, const OracleHandle& oracle);

struct EstimatorRunStats {
  int accepted = 0;
  int skipped = 0;
};

// Command bodies behind the CLI, exposed for tests. Each writes its artifacts
// under out_dir along with the effective config, and throws on failure.
std::filesystem::path cmd_train_encoder(const RunConfig& cfg,
                                        const std::filesystem::path& out_dir);

EstimatorRunStats cmd_build_estimator(const RunConfig& cfg,
                                      const std::filesystem::path& encoder_dir,
                                      const std::filesystem::path& out_dir);

SearchResult cmd_search(const RunConfig& cfg, const std::filesystem::path& encoder_dir,
                        const std::filesystem::path& predictor_dir,
                        const std::filesystem::path& out_dir,
                        std::optional<std::filesystem::path> surface_csv);

void cmd_make_corpus(const RunConfig& cfg, int count, const std::filesystem::path& out_path);
void cmd_make_table(const RunConfig& cfg, int count, const std::filesystem::path& out_path);

enum class EmbeddingMethod { RawAdjacency, PlainAutoencoder, KernelGuided };

std::string method_name(EmbeddingMethod m);
EmbeddingMethod parse_method(const std::string& name);

struct CorrelationCell {
  EmbeddingMethod method;
  int proportion_percent;
  double kendall_tau;
  double pearson_r;
  int n_train;
  int n_test;
};

// Tables-style protocol: split the corpus, train a predictor per (method,
// proportion) pair on slices of the training split, report rank and linear
// correlation on the held-out split.
std::vector<CorrelationCell> correlation_protocol(const std::vector<CorpusRecord>& corpus,
                                                  const RunConfig& cfg, double split_fraction,
                                                  std::span<const int> proportions,
                                                  std::span<const EmbeddingMethod> methods,
                                                  std::uint64_t seed);

std::vector<CorrelationCell> cmd_eval_correlation(const RunConfig& cfg,
                                                  const std::filesystem::path& corpus_path,
                                                  double split_fraction,
                                                  std::span<const int> proportions,
                                                  std::span<const EmbeddingMethod> methods,
                                                  const std::filesystem::path& out_csv);

// Predictor checkpoint: directory with predictor.mlp + manifest.json.
void save_predictor(const Predictor& p, const std::filesystem::path& dir,
                    const nlohmann::json& meta);
Predictor load_predictor(const std::filesystem::path& dir);

// Efficiency score with the config lambda; corpus records always satisfy the
// mac > 0 domain requirement because samplers reject degenerate cells.
double record_score(const CorpusRecord& rec, double lambda);

}  // namespace gemnas
