#include "gemnas/search.hpp"

#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gemnas/errors.hpp"
#include "gemnas/parallel.hpp"
#include "gemnas/rng.hpp"
#include "gemnas/wl_kernel.hpp"

namespace gemnas {

nlohmann::json SearchResult::to_json() const {
  nlohmann::json j;
  j["dag"] = best_dag.to_json();
  j["predicted_score"] = predicted_score;
  if (true_score) j["true_score"] = *true_score;
  j["pool_size"] = pool_size;
  j["seed"] = seed;
  return j;
}

SearchResult SearchResult::from_json(const nlohmann::json& j) {
  SearchResult r;
  r.best_dag = Dag::from_json(j.at("dag"));
  r.predicted_score = j.at("predicted_score").get<double>();
  if (j.contains("true_score")) r.true_score = j.at("true_score").get<double>();
  r.pool_size = j.at("pool_size").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

namespace {

struct Candidate {
  bool valid = false;
  Dag dag{1, OpKind::conv1x1()};
  double score = 0.0;
  mutable std::string hash;  // filled lazily, only on exact ties

  const std::string& canonical_hash(int h) const {
    if (hash.empty()) hash = wl_canonical_hash(dag, h);
    return hash;
  }
};

// Strict total order on concrete graphs; final tie resolver when hashes
// collide (isomorphic candidates).
bool dag_less(const Dag& a, const Dag& b) {
  if (a.node_count() != b.node_count()) return a.node_count() < b.node_count();
  for (int i = 0; i < a.node_count(); ++i)
    for (int j = i + 1; j < a.node_count(); ++j)
      if (a.has_edge(i, j) != b.has_edge(i, j)) return b.has_edge(i, j);
  return a.ops() < b.ops();
}

// Order-independent max with (score desc, hash asc, graph asc) ordering;
// associative and commutative, so any reduction tree yields the same winner.
void fold(Candidate& best, const Candidate& other, int h) {
  if (!other.valid) return;
  if (!best.valid || other.score > best.score) {
    best = other;
    return;
  }
  if (other.score != best.score) return;
  const std::string& oh = other.canonical_hash(h);
  const std::string& bh = best.canonical_hash(h);
  if (oh < bh || (oh == bh && dag_less(other.dag, best.dag))) best = other;
}

}  // namespace

SearchResult bootstrap_optimize(const EncoderBundle& bundle, const Predictor& p,
                                const std::function<Dag(Rng&)>& sampler, int pool_size,
                                std::uint64_t seed, int workers,
                                const std::function<void(const PoolSample&)>& on_scored) {
  if (pool_size < 1) throw std::invalid_argument("bootstrap_optimize: pool_size must be >= 1");
  if (!sampler) throw std::invalid_argument("bootstrap_optimize: sampler is required");
  if (p.d != prediction_feature_dim(bundle))
    throw std::invalid_argument("bootstrap_optimize: predictor/encoder dimension mismatch");

  const int tie_h = bundle.wl_cfg.h;
  std::vector<PoolSample> retained;
  if (on_scored) retained.resize(pool_size, PoolSample{});

  std::mutex fold_mutex;
  Candidate best;
  const int chunk_workers = std::max(1, workers);

  parallel_for(static_cast<std::size_t>(chunk_workers), chunk_workers, [&](std::size_t w) {
    Candidate local;
    for (std::size_t i = w; i < static_cast<std::size_t>(pool_size);
         i += static_cast<std::size_t>(chunk_workers)) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
      Candidate c;
      c.valid = true;
      c.dag = sampler(rng);
      GraphVector g = prediction_features(c.dag, bundle);
      c.score = predict(p, g);
      if (on_scored) retained[i] = PoolSample{c.dag, std::move(g), c.score};
      fold(local, c, tie_h);
    }
    std::lock_guard<std::mutex> lock(fold_mutex);
    fold(best, local, tie_h);
  });

  if (on_scored)
    for (const auto& sample : retained) on_scored(sample);

  SearchResult result;
  result.best_dag = best.dag;
  result.predicted_score = best.score;
  result.pool_size = pool_size;
  result.seed = seed;
  return result;
}

double global_prediction_bias(const BenchmarkTable& table, const SearchResult& result) {
  if (table.size() == 0)
    throw std::invalid_argument("global_prediction_bias: empty table");
  Evaluation eval = tabular_evaluate(result.best_dag, table);
  return table.max_accuracy() - eval.accuracy;
}

ExhaustiveResult exhaustive_oracle_search(std::span<const Dag> space,
                                          const EvaluationOracle& oracle, double lambda,
                                          int hash_iterations) {
  if (space.empty()) throw std::invalid_argument("exhaustive_oracle_search: empty space");

  ExhaustiveResult result;
  result.all_scores.reserve(space.size());
  Candidate best;
  for (const Dag& dag : space) {
    Candidate c;
    c.valid = true;
    c.dag = dag;
    c.score = efficiency_score(oracle.evaluate(dag), lambda);
    result.all_scores.push_back(c.score);
    fold(best, c, hash_iterations);
  }
  result.best = best.dag;
  result.score = best.score;
  return result;
}

}  // namespace gemnas
