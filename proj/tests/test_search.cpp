#include <doctest.h>

#include <nlohmann/json.hpp>

#include "gemnas/commands.hpp"
#include "gemnas/errors.hpp"
#include "gemnas/search.hpp"
#include "gemnas/wl_kernel.hpp"
#include "support/test_helpers.hpp"

using namespace gemnas;
using gemnas::testing::make_dag;

namespace {

const std::vector<OpKind> kTwoOps = {OpKind::conv1x1(), OpKind::dwsep3x3()};

EncoderBundle tiny_bundle(int n, std::uint64_t seed) {
  EncoderTrainOptions opt;
  opt.pair_count = 150;
  opt.n = n;
  opt.d = 8;
  opt.hidden = {32};
  opt.train.iterations = 150;
  opt.train.batch_size = 16;
  opt.train.rng_seed = seed;
  opt.wl.h = 2;
  return train_encoder(opt).bundle;
}

Predictor random_predictor(int d, std::uint64_t seed) {
  Predictor p;
  p.d = d;
  p.net = Mlp::xavier({d, 16, 1}, {Activation::ReLU, Activation::Identity}, seed);
  return p;
}

std::function<Dag(Rng&)> sampler_n(int n) {
  SearchSpaceConfig space;
  space.n = n;
  return make_space_sampler(space);
}

}  // namespace

TEST_CASE("pool of one returns the sole sample") {
  EncoderBundle bundle = tiny_bundle(5, 1);
  Predictor p = random_predictor(prediction_feature_dim(bundle), 2);
  SearchResult r = bootstrap_optimize(bundle, p, sampler_n(5), 1, 77);
  CHECK(r.pool_size == 1);
  CHECK(r.predicted_score == predict(p, prediction_features(r.best_dag, bundle)));
}

TEST_CASE("bootstrap returns the exact pool argmax") {
  EncoderBundle bundle = tiny_bundle(5, 3);
  Predictor p = random_predictor(prediction_feature_dim(bundle), 4);

  std::vector<PoolSample> pool;
  SearchResult r = bootstrap_optimize(bundle, p, sampler_n(5), 200, 123, 2,
                                      [&pool](const PoolSample& s) { pool.push_back(s); });
  REQUIRE(pool.size() == 200);
  double best = pool[0].predicted_score;
  for (const auto& s : pool) best = std::max(best, s.predicted_score);
  CHECK(r.predicted_score == best);
  CHECK(predict(p, prediction_features(r.best_dag, bundle)) == r.predicted_score);
}

TEST_CASE("bootstrap is invariant to worker count and seed-stable") {
  EncoderBundle bundle = tiny_bundle(5, 5);
  Predictor p = random_predictor(prediction_feature_dim(bundle), 6);
  SearchResult base = bootstrap_optimize(bundle, p, sampler_n(5), 300, 99, 1);
  for (int workers : {2, 3, 7}) {
    SearchResult r = bootstrap_optimize(bundle, p, sampler_n(5), 300, 99, workers);
    CHECK(r.best_dag == base.best_dag);
    CHECK(r.predicted_score == base.predicted_score);
  }
  SearchResult again = bootstrap_optimize(bundle, p, sampler_n(5), 300, 99, 2);
  CHECK(again.best_dag == base.best_dag);
}

TEST_CASE("constant predictor resolves ties deterministically") {
  EncoderBundle bundle = tiny_bundle(4, 7);
  Predictor constant;
  constant.d = prediction_feature_dim(bundle);
  constant.net = Mlp({constant.d, 1}, {Activation::Identity});  // always 0

  SearchResult a = bootstrap_optimize(bundle, constant, sampler_n(4), 100, 11, 1);
  SearchResult b = bootstrap_optimize(bundle, constant, sampler_n(4), 100, 11, 4);
  CHECK(a.best_dag == b.best_dag);
  CHECK(a.predicted_score == 0.0);

  // The winner carries the lexicographically smallest canonical hash.
  std::vector<PoolSample> pool;
  bootstrap_optimize(bundle, constant, sampler_n(4), 100, 11, 1,
                     [&pool](const PoolSample& s) { pool.push_back(s); });
  std::string winner = wl_canonical_hash(a.best_dag, bundle.wl_cfg.h);
  for (const auto& s : pool) CHECK(winner <= wl_canonical_hash(s.dag, bundle.wl_cfg.h));
}

TEST_CASE("global prediction bias subtracts table accuracies") {
  BenchmarkTable table(BenchmarkTableMetadata{3, kTwoOps, 2});
  Dag best = make_dag(3, {{0, 1}, {1, 2}});
  Dag found = make_dag(3, {{0, 1}, {0, 2}});
  table.insert(wl_canonical_hash(best, 2), {0.946, 10.0}, best);
  table.insert(wl_canonical_hash(found, 2), {0.944, 8.0}, found);

  SearchResult result;
  result.best_dag = found;
  CHECK(global_prediction_bias(table, result) == doctest::Approx(0.002).epsilon(1e-12));

  result.best_dag = best;
  CHECK(global_prediction_bias(table, result) == 0.0);

  result.best_dag = Dag(3, OpKind::conv1x1());
  CHECK_THROWS_AS(global_prediction_bias(table, result), MissingArchitectureError);
}

TEST_CASE("exhaustive search returns the true argmax") {
  SyntheticOracleConfig cfg;
  cfg.noise_sigma = 0.0;
  SyntheticOracle oracle(cfg, 16, {8, 8});

  std::vector<Dag> singleton = {make_dag(2, {{0, 1}})};
  ExhaustiveResult single = exhaustive_oracle_search(singleton, oracle, 0.01);
  CHECK(single.best == singleton[0]);
  CHECK(single.all_scores.size() == 1);

  // All 2-node dags; scores must peak at the returned graph.
  std::vector<Dag> space = enumerate_all_dags(2, kTwoOps);
  ExhaustiveResult r = exhaustive_oracle_search(space, oracle, 0.0);
  double best = r.all_scores[0];
  for (double s : r.all_scores) best = std::max(best, s);
  CHECK(r.score == best);
  CHECK(r.all_scores.size() == space.size());
}

TEST_CASE("bootstrap true score cannot beat the exhaustive optimum") {
  SyntheticOracleConfig ocfg;
  ocfg.noise_sigma = 0.0;
  SyntheticOracle oracle(ocfg, 16, {8, 8});
  std::vector<Dag> space = enumerate_all_dags(3, kTwoOps);
  ExhaustiveResult truth = exhaustive_oracle_search(space, oracle, 0.0);

  EncoderBundle bundle = tiny_bundle(3, 15);
  Predictor p = random_predictor(prediction_feature_dim(bundle), 16);
  auto space_sampler = [&space](Rng& rng) { return space[rng.next_index(space.size())]; };
  SearchResult r = bootstrap_optimize(bundle, p, space_sampler, 2000, 21);
  double true_score = efficiency_score(oracle.evaluate(r.best_dag), 0.0);
  CHECK(true_score <= truth.score + 1e-12);
}

TEST_CASE("expected true score improves with pool size") {
  SyntheticOracleConfig ocfg;
  ocfg.noise_sigma = 0.0;
  SyntheticOracle oracle(ocfg, 16, {8, 8});
  EncoderBundle bundle = tiny_bundle(5, 31);

  EstimatorOptions eopt;
  eopt.sample_budget = 120;
  eopt.train.rng_seed = 33;
  eopt.train.learning_rate = 2e-3;
  eopt.hidden = {48, 48};
  eopt.finetune_epochs = 20;
  eopt.lambda = 0.0;
  eopt.sampler = sampler_n(5);
  Predictor p = build_estimator(oracle, bundle, eopt);

  auto mean_true_score = [&](int pool) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SearchResult r = bootstrap_optimize(bundle, p, sampler_n(5), pool, 1000 + seed, 2);
      total += oracle.evaluate(r.best_dag).accuracy;
    }
    return total / 20.0;
  };

  double small = mean_true_score(10);
  double medium = mean_true_score(100);
  double large = mean_true_score(1000);
  CHECK(medium >= small - 0.01);
  CHECK(large >= medium - 0.01);
  CHECK(large >= small);
}

TEST_CASE("search results serialize to json and back") {
  SearchResult r;
  r.best_dag = make_dag(4, {{0, 1}, {1, 3}});
  r.predicted_score = 0.875;
  r.true_score = 0.9;
  r.pool_size = 1000;
  r.seed = 424242;
  SearchResult back = SearchResult::from_json(r.to_json());
  CHECK(back.best_dag == r.best_dag);
  CHECK(back.predicted_score == r.predicted_score);
  CHECK(back.true_score == r.true_score);
  CHECK(back.pool_size == r.pool_size);
  CHECK(back.seed == r.seed);
}
