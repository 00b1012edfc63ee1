#include <doctest.h>

#include <nlohmann/json.hpp>

#include "gemnas/errors.hpp"
#include "gemnas/graph.hpp"
#include "gemnas/rng.hpp"
#include "support/test_helpers.hpp"

using namespace gemnas;
using gemnas::testing::chain;
using gemnas::testing::make_dag;

namespace {
const std::vector<OpKind> kTwoOps = {OpKind::conv1x1(), OpKind::dwsep3x3()};
}

TEST_CASE("random_dag with probability 1 builds the complete DAG") {
  Dag dag = random_dag(30, 1.0, kTwoOps, 7);
  CHECK(dag.node_count() == 30);
  CHECK(dag.edge_count() == 435);  // C(30, 2)
}

TEST_CASE("random_dag with probability 0 builds isolated nodes") {
  std::vector<OpKind> palette = {OpKind::conv1x1()};
  Dag dag = random_dag(5, 0.0, palette, 1);
  CHECK(dag.edge_count() == 0);
  for (int v = 0; v < 5; ++v) CHECK(dag.op(v) == OpKind::conv1x1());
}

TEST_CASE("random_dag is seed-deterministic") {
  Dag a = random_dag(10, 0.5, kTwoOps, 42);
  Dag b = random_dag(10, 0.5, kTwoOps, 42);
  CHECK(a == b);
  Dag c = random_dag(10, 0.5, kTwoOps, 43);
  CHECK(a != c);
}

TEST_CASE("random_dag rejects bad arguments") {
  CHECK_THROWS_AS(random_dag(0, 0.5, kTwoOps, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_dag(3, -0.1, kTwoOps, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_dag(3, 1.5, kTwoOps, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_dag(3, 0.5, std::span<const OpKind>{}, 1), std::invalid_argument);
}

TEST_CASE("prune keeps a chain intact") {
  CellSpec cell = prune_to_cell(chain(3), 16, {8, 8});
  CHECK(cell.active_nodes == std::vector<int>{0, 1, 2});
  CHECK(cell.output_leaves == std::vector<int>{2});
  CHECK(cell.concat_nodes.empty());
}

TEST_CASE("prune drops zero-in-degree non-input nodes") {
  CellSpec cell = prune_to_cell(make_dag(3, {{0, 2}}), 16, {8, 8});
  CHECK(cell.active_nodes == std::vector<int>{0, 2});
  CHECK(cell.output_leaves == std::vector<int>{2});
}

TEST_CASE("prune cascades drops and reports a degenerate cell") {
  CHECK_THROWS_AS(prune_to_cell(make_dag(4, {{1, 2}, {2, 3}}), 16, {8, 8}),
                  DegenerateCellError);
  // The same wiring plus an input edge is fine.
  CellSpec cell = prune_to_cell(make_dag(4, {{0, 1}, {1, 2}, {2, 3}}), 16, {8, 8});
  CHECK(cell.active_nodes.size() == 4);
}

TEST_CASE("a single-node graph is a valid single-op cell") {
  CellSpec cell = prune_to_cell(Dag(1, OpKind::conv1x1()), 16, {8, 8});
  CHECK(cell.active_nodes == std::vector<int>{0});
  CHECK(cell.output_leaves == std::vector<int>{0});
}

TEST_CASE("prune marks concatenation points") {
  // 0->2, 1 is dropped; then diamond 0->{2,3}->4 has a concat at 4.
  CellSpec cell = prune_to_cell(make_dag(5, {{0, 2}, {0, 3}, {2, 4}, {3, 4}}), 16, {8, 8});
  CHECK(cell.active_nodes == std::vector<int>{0, 2, 3, 4});
  CHECK(cell.concat_nodes == std::vector<int>{4});
}

TEST_CASE("prune is idempotent on the induced active subgraph") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Dag dag = random_dag(8, 0.3, kTwoOps, rng.next_u64());
    CellSpec cell;
    try {
      cell = prune_to_cell(dag, 16, {8, 8});
    } catch (const DegenerateCellError&) {
      continue;
    }
    // Rebuild the active subgraph with remapped indices and prune again.
    std::vector<OpKind> ops;
    for (int v : cell.active_nodes) ops.push_back(dag.op(v));
    Dag induced(static_cast<int>(cell.active_nodes.size()), ops);
    for (std::size_t a = 0; a < cell.active_nodes.size(); ++a)
      for (std::size_t b = a + 1; b < cell.active_nodes.size(); ++b)
        if (dag.has_edge(cell.active_nodes[a], cell.active_nodes[b]))
          induced.add_edge(static_cast<int>(a), static_cast<int>(b));
    CellSpec again = prune_to_cell(induced, 16, {8, 8});
    CHECK(again.active_nodes.size() == cell.active_nodes.size());
  }
}

TEST_CASE("mac matches the closed-form cost for single-op cells") {
  CellSpec conv = prune_to_cell(Dag(1, OpKind::conv1x1()), 16, {8, 8});
  CHECK(mac_estimate(conv) == doctest::Approx(0.016384).epsilon(1e-12));

  CellSpec dwsep = prune_to_cell(Dag(1, OpKind::dwsep3x3()), 16, {8, 8});
  CHECK(mac_estimate(dwsep) == doctest::Approx(0.0256).epsilon(1e-12));
}

TEST_CASE("mac of an empty active set is zero") {
  CellSpec cell;
  cell.channels = 16;
  cell.resolution = {8, 8};
  CHECK(mac_estimate(cell) == 0.0);
}

TEST_CASE("mac counts concatenated input channels") {
  // Node 2 receives from 0 and 1? 1 would be pruned; use 0->1, 0->2, 1->3, 2->3.
  Dag dag = make_dag(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  CellSpec cell = prune_to_cell(dag, 8, {4, 4});
  // Node 3 has in-degree 2 => c_in = 16, others 8.
  double expected = (4.0 * 4 * 8 * 8) * 3 + (4.0 * 4 * 16 * 8);
  CHECK(mac_estimate(cell) == doctest::Approx(expected / 1e6).epsilon(1e-12));
}

TEST_CASE("mac is monotone in channels") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    Dag dag = random_dag(6, 0.6, kTwoOps, rng.next_u64());
    CellSpec narrow, wide;
    try {
      narrow = prune_to_cell(dag, 8, {8, 8});
      wide = prune_to_cell(dag, 16, {8, 8});
    } catch (const DegenerateCellError&) {
      continue;
    }
    CHECK(mac_estimate(wide) >= mac_estimate(narrow));
  }
}

TEST_CASE("flatten_upper_triangle walks rows in order") {
  CHECK(flatten_upper_triangle(chain(3)) == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(flatten_upper_triangle(Dag(2, OpKind::conv1x1())) == std::vector<double>{0.0});
  Dag complete = random_dag(4, 1.0, kTwoOps, 3);
  CHECK(flatten_upper_triangle(complete) == std::vector<double>(6, 1.0));
}

TEST_CASE("unflatten inverts flatten on edge sets") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    Dag dag = random_dag(7, 0.4, kTwoOps, rng.next_u64());
    std::vector<double> flat = flatten_upper_triangle(dag);
    Dag back = unflatten_upper_triangle(7, flat, dag.ops());
    CHECK(back == dag);
  }
}

TEST_CASE("dag json round-trips") {
  Dag dag = make_dag(4, {{0, 1}, {1, 3}},
                     {OpKind::conv1x1(), OpKind::dwsep3x3(), OpKind::labeled(2), OpKind::labeled(7)});
  Dag back = Dag::from_json(dag.to_json());
  CHECK(back == dag);
}

TEST_CASE("op kinds serialize stably") {
  CHECK(OpKind::parse("conv1x1") == OpKind::conv1x1());
  CHECK(OpKind::parse("dwsep3x3") == OpKind::dwsep3x3());
  CHECK(OpKind::parse("op12") == OpKind::labeled(12));
  CHECK(OpKind::labeled(12).to_string() == "op12");
  CHECK_THROWS_AS(OpKind::parse("conv9x9"), ConfigError);
  CHECK_THROWS_AS(OpKind::labeled(-1), std::invalid_argument);
}

TEST_CASE("enumerate_all_dags covers the space") {
  std::vector<OpKind> one = {OpKind::conv1x1()};
  CHECK(enumerate_all_dags(3, one).size() == 8);  // 2^3 edge subsets
  CHECK(enumerate_all_dags(2, kTwoOps).size() == 8);  // 2 edges x 4 op picks
}
