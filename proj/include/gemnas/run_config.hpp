#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gemnas/graph.hpp"
#include "gemnas/nn.hpp"
#include "gemnas/oracle.hpp"
#include "gemnas/wl_kernel.hpp"

namespace gemnas {

struct SearchSpaceConfig {
  int n = 6;
  double edge_prob = 0.5;
  std::vector<OpKind> op_palette = {OpKind::conv1x1(), OpKind::dwsep3x3()};
  int channels = 16;
  Resolution resolution{8, 8};
  // Restrict sampling to cells whose only zero-in-degree node is the input.
  // Pruning of such cells is independent of node numbering, so structurally
  // equivalent graphs evaluate identically.
  bool require_single_source = false;
};

struct EncoderConfig {
  int d = 16;
  WlConfig wl;
  int pair_count = 5000;
  TrainConfig train{.learning_rate = 1e-3, .iterations = 10000, .batch_size = 32};
  std::vector<int> hidden = {256, 256};
  bool use_op_onehots = false;
  std::pair<double, double> edge_prob_range = {0.1, 0.9};
  double pair_perturb_prob = 0.4;
  double pair_permute_prob = 0.2;
  std::pair<double, double> perturb_flip_range = {0.02, 0.3};
  int checkpoint_every = 100;
};

enum class OracleKind { Synthetic, Tabular };
enum class MissingPolicy { Fail, Skip };

struct OracleConfig {
  OracleKind kind = OracleKind::Synthetic;
  SyntheticOracleConfig synthetic;
  std::string table_path;  // required for tabular
  double lambda = 0.01;
  MissingPolicy missing_policy = MissingPolicy::Fail;
};

struct EstimatorConfig {
  int sample_budget = 200;
  TrainConfig train{.learning_rate = 1e-3, .iterations = 1, .batch_size = 32};
  std::vector<int> hidden = {128, 128};
  int finetune_epochs = 5;
  int batch_epochs = 300;  // one-shot fit passes for the correlation protocol
};

struct SearchBlockConfig {
  int pool_size = 5000;
  bool evaluate_best = true;  // re-run the oracle on the winner for true_score
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs/out";
  SearchSpaceConfig space;
  EncoderConfig encoder;
  OracleConfig oracle;
  EstimatorConfig estimator;
  SearchBlockConfig search;
  int workers = 0;  // 0 = pick a default from hardware

  int effective_workers() const;
};

// Loads and validates a config file. `seed_override` (from --seed) wins over
// the config value; the GEMNAS_SEED environment variable is the fallback when
// the file does not set one. Throws ConfigError with a readable message.
RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override = std::nullopt,
                          std::optional<std::string> output_override = std::nullopt,
                          std::optional<int> workers_override = std::nullopt);

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Writes the effective merged config next to the outputs for provenance.
void write_effective_config(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace gemnas
