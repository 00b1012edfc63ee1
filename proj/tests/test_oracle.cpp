#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gemnas/errors.hpp"
#include "gemnas/oracle.hpp"
#include "gemnas/rng.hpp"
#include "gemnas/wl_kernel.hpp"
#include "support/test_helpers.hpp"

using namespace gemnas;
using gemnas::testing::chain;
using gemnas::testing::make_dag;

namespace {
const std::vector<OpKind> kTwoOps = {OpKind::conv1x1(), OpKind::dwsep3x3()};

SyntheticOracleConfig flat_config() {
  SyntheticOracleConfig cfg;
  cfg.w_longest_path = 0.0;
  cfg.w_mean_in_degree = 0.0;
  cfg.w_op_mix = 0.0;
  cfg.bias = 0.0;
  cfg.noise_sigma = 0.0;
  return cfg;
}
}  // namespace

TEST_CASE("efficiency score follows the log-penalty form") {
  CHECK(efficiency_score({0.90, 585.0}, 0.0) == 0.90);
  CHECK(efficiency_score({0.90, 1.0}, 0.01) == 0.90);
  CHECK(efficiency_score({0.85, 100.0}, 0.01) ==
        doctest::Approx(0.803948298140119).epsilon(1e-14));
}

TEST_CASE("efficiency score rejects non-positive mac under a positive penalty") {
  CHECK_THROWS_AS(efficiency_score({0.5, 0.0}, 0.01), std::domain_error);
  CHECK_THROWS_AS(efficiency_score({0.5, -1.0}, 0.01), std::domain_error);
  CHECK_THROWS_AS(efficiency_score({0.5, 1.0}, -0.1), std::domain_error);
}

TEST_CASE("efficiency score is monotone in both arguments") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    double acc = rng.next_unit();
    double mac = rng.next_uniform(1.0, 1000.0);
    double lambda = rng.next_uniform(0.001, 0.1);
    CHECK(efficiency_score({acc, mac * 2.0}, lambda) < efficiency_score({acc, mac}, lambda));
    CHECK(efficiency_score({std::min(1.0, acc + 0.01), mac}, lambda) >
          efficiency_score({acc, mac}, lambda));
  }
}

TEST_CASE("all-zero weights give accuracy one half") {
  SyntheticOracleConfig cfg = flat_config();
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Dag dag = random_dag(6, 0.6, kTwoOps, rng.next_u64());
    Evaluation eval = synthetic_evaluate(dag, cfg, 16, {8, 8});
    if (eval.mac_millions == 0.0) continue;  // degenerate cell
    CHECK(eval.accuracy == 0.5);
  }
}

TEST_CASE("synthetic evaluation is deterministic") {
  SyntheticOracleConfig cfg;
  cfg.noise_sigma = 0.05;
  cfg.rng_seed = 99;
  Dag dag = random_dag(6, 0.6, kTwoOps, 123);
  CHECK(synthetic_evaluate(dag, cfg, 16, {8, 8}) == synthetic_evaluate(dag, cfg, 16, {8, 8}));
}

TEST_CASE("longest-path weight orders chains by depth") {
  SyntheticOracleConfig cfg = flat_config();
  cfg.w_longest_path = 0.3;
  Evaluation five = synthetic_evaluate(chain(5), cfg, 16, {8, 8});
  Evaluation two = synthetic_evaluate(chain(2), cfg, 16, {8, 8});
  CHECK(five.accuracy > two.accuracy);
}

TEST_CASE("degenerate cells evaluate to zero") {
  Dag isolated(3, OpKind::conv1x1());  // no edges: nothing reachable from input
  Evaluation eval = synthetic_evaluate(isolated, flat_config(), 16, {8, 8});
  CHECK(eval.accuracy == 0.0);
  CHECK(eval.mac_millions == 0.0);
}

TEST_CASE("isomorphic graphs receive the same noisy accuracy") {
  // The reindexing must preserve the input node's role; here the two sinks
  // fed by node 0 swap places.
  SyntheticOracleConfig cfg;
  cfg.noise_sigma = 0.1;
  cfg.rng_seed = 3;
  Dag a = make_dag(3, {{0, 1}, {0, 2}}, {OpKind::conv1x1(), OpKind::dwsep3x3(), OpKind::conv1x1()});
  Dag b = make_dag(3, {{0, 1}, {0, 2}}, {OpKind::conv1x1(), OpKind::conv1x1(), OpKind::dwsep3x3()});
  CHECK(synthetic_evaluate(a, cfg, 16, {8, 8}) == synthetic_evaluate(b, cfg, 16, {8, 8}));
}

TEST_CASE("benchmark table lookup, isomorphism, and misses") {
  BenchmarkTableMetadata meta{3, kTwoOps, 2};
  BenchmarkTable table(meta);
  Dag a = make_dag(3, {{0, 2}, {1, 2}}, {OpKind::conv1x1(), OpKind::dwsep3x3(), OpKind::conv1x1()});
  table.insert(wl_canonical_hash(a, 2), {0.91, 12.5}, a);

  CHECK(tabular_evaluate(a, table) == Evaluation{0.91, 12.5});

  Dag b = make_dag(3, {{0, 2}, {1, 2}}, {OpKind::dwsep3x3(), OpKind::conv1x1(), OpKind::conv1x1()});
  CHECK(tabular_evaluate(b, table) == Evaluation{0.91, 12.5});

  Dag missing = chain(3);
  CHECK_THROWS_AS(tabular_evaluate(missing, table), MissingArchitectureError);
}

TEST_CASE("benchmark table save/load round-trips bit-exactly") {
  BenchmarkTableMetadata meta{4, kTwoOps, 2};
  BenchmarkTable table(meta);
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    Dag dag = random_dag(4, 0.5, kTwoOps, rng.next_u64());
    table.insert(wl_canonical_hash(dag, 2),
                 {rng.next_unit(), rng.next_uniform(0.001, 100.0)}, dag);
  }

  auto path = std::filesystem::temp_directory_path() / "gemnas_test_table.ndjson";
  table.save(path);
  BenchmarkTable loaded = BenchmarkTable::load(path);
  CHECK(loaded.size() == table.size());
  CHECK(loaded.metadata().n == 4);
  CHECK(loaded.metadata().hash_iterations == 2);
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(loaded.entry(i).hash == table.entry(i).hash);
    CHECK(loaded.entry(i).evaluation == table.entry(i).evaluation);
    REQUIRE(loaded.entry(i).dag.has_value());
    CHECK(*loaded.entry(i).dag == *table.entry(i).dag);
  }
  CHECK(loaded.max_accuracy() == table.max_accuracy());
  std::filesystem::remove(path);
}

TEST_CASE("duplicate hashes keep the first entry") {
  BenchmarkTable table(BenchmarkTableMetadata{3, kTwoOps, 2});
  CHECK(table.insert("abc", {0.5, 1.0}));
  CHECK_FALSE(table.insert("abc", {0.9, 2.0}));
  CHECK(table.find("abc")->accuracy == 0.5);
}
