#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gemnas/encoder.hpp"
#include "gemnas/oracle.hpp"
#include "gemnas/predictor.hpp"

namespace gemnas {

struct SearchResult {
  Dag best_dag{1, OpKind::conv1x1()};
  double predicted_score = 0.0;
  std::optional<double> true_score;
  int pool_size = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static SearchResult from_json(const nlohmann::json& j);
};

// Scored pool member handed to the surface-export callback, in pool order.
struct PoolSample {
  Dag dag{1, OpKind::conv1x1()};
  GraphVector embedding;
  double predicted_score = 0.0;
};

// Samples pool_size architectures with replacement (per-index derived seeds,
// so results do not depend on worker count), embeds and scores each, and
// returns the arg-max. Exact score ties break toward the lexicographically
// smallest canonical hash. on_scored, when set, receives every pool member in
// index order after scoring completes.
SearchResult bootstrap_optimize(const EncoderBundle& bundle, const Predictor& p,
                                const std::function<Dag(Rng&)>& sampler, int pool_size,
                                std::uint64_t seed, int workers = 1,
                                const std::function<void(const PoolSample&)>& on_scored = {});

// B = (best accuracy in the table) - (table accuracy of the selected dag).
double global_prediction_bias(const BenchmarkTable& table, const SearchResult& result);

struct ExhaustiveResult {
  Dag best{1, OpKind::conv1x1()};
  double score = 0.0;
  std::vector<double> all_scores;  // efficiency score of every space member
};

// True arg-max of the efficiency score over an enumerable space; ground-truth
// baseline for small n. Ties break by canonical hash like bootstrap_optimize.
ExhaustiveResult exhaustive_oracle_search(std::span<const Dag> space,
                                          const EvaluationOracle& oracle, double lambda,
                                          int hash_iterations = 2);

}  // namespace gemnas
