#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace gemnas {

// Per-node operation label. Conv1x1 and DwSepConv3x3 are the concrete mobile
// ops; Labeled carries an opaque small integer for palettes defined elsewhere
// (e.g. tabular benchmarks with their own op lists).
struct OpKind {
  enum class Tag : std::uint8_t { Conv1x1, DwSepConv3x3, Labeled };

  Tag tag = Tag::Conv1x1;
  int label = 0;  // meaningful for Labeled only; always >= 0

  static OpKind conv1x1() { return {Tag::Conv1x1, 0}; }
  static OpKind dwsep3x3() { return {Tag::DwSepConv3x3, 0}; }
  static OpKind labeled(int id);

  std::string to_string() const;
  static OpKind parse(const std::string& text);

  friend bool operator==(const OpKind&, const OpKind&) = default;
  friend auto operator<=>(const OpKind&, const OpKind&) = default;
};

// Directed acyclic graph over nodes 0..n-1 with per-node ops. Acyclicity is
// structural: only edges i -> j with i < j can be stored. Immutable in spirit;
// add_edge exists for construction and enumeration code.
class Dag {
 public:
  Dag(int n, std::vector<OpKind> ops);
  Dag(int n, OpKind uniform_op);

  int node_count() const { return n_; }
  int edge_slots() const { return static_cast<int>(upper_.size()); }

  bool has_edge(int i, int j) const;
  void add_edge(int i, int j);
  void remove_edge(int i, int j);
  int edge_count() const;

  int in_degree(int v) const;
  int out_degree(int v) const;
  std::vector<int> in_neighbors(int v) const;
  std::vector<int> out_neighbors(int v) const;
  std::vector<std::pair<int, int>> edges() const;

  const std::vector<OpKind>& ops() const { return ops_; }
  OpKind op(int v) const { return ops_.at(v); }

  // Row-major index into the flattened strict upper triangle.
  int flat_index(int i, int j) const;

  nlohmann::json to_json() const;
  static Dag from_json(const nlohmann::json& j);

  friend bool operator==(const Dag&, const Dag&) = default;

 private:
  int n_;
  std::vector<std::uint8_t> upper_;  // length n(n-1)/2, row-major (i<j)
  std::vector<OpKind> ops_;
};

struct Resolution {
  int height = 8;
  int width = 8;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

// A Dag reduced to its network-cell form: nodes unreachable from the input are
// pruned, leaves and concatenation points are recorded, and channel/spatial
// context is attached for the cost model.
struct CellSpec {
  Dag source{1, OpKind::conv1x1()};
  std::vector<int> active_nodes;   // sorted ascending, always contains input_node
  int input_node = 0;
  std::vector<int> output_leaves;  // active nodes with zero out-degree among active
  std::vector<int> concat_nodes;   // active nodes with in-degree > 1 among active
  int channels = 16;
  Resolution resolution;

  bool is_active(int v) const;
  // In-degree of v counting only edges from other active nodes.
  int active_in_degree(int v) const;
};

// Samples every upper-triangular edge independently with probability
// edge_prob and draws each node op uniformly from the palette. Identical
// (arguments, seed) pairs produce bit-identical graphs on any platform.
Dag random_dag(int n, double edge_prob, std::span<const OpKind> op_palette,
               std::uint64_t rng_seed);

class Rng;
// Same sampling, driven by an existing stream (edge draws first, row-major,
// then ops). random_dag above is a thin wrapper.
Dag random_dag_from(Rng& rng, int n, double edge_prob, std::span<const OpKind> op_palette);

// Drops non-input nodes whose in-degree is zero within the remaining subgraph
// until fixpoint, then records leaves and concatenation points. Throws
// DegenerateCellError when nothing but the input survives in a multi-node
// graph. A single-node Dag is a valid single-op cell.
CellSpec prune_to_cell(const Dag& dag, int channels, Resolution resolution);

// Closed-form multiply-accumulate estimate in millions, summed over active
// nodes. Conv1x1 costs H*W*Cin*Cout; DwSepConv3x3 costs H*W*Cin*9 + H*W*Cin*Cout;
// Labeled ops are costed like Conv1x1. Cin = channels * max(1, active in-degree)
// to account for input concatenation, Cout = channels.
double mac_estimate(const CellSpec& cell);

// Row-major strict upper triangle as 0.0/1.0 values, length n(n-1)/2.
std::vector<double> flatten_upper_triangle(const Dag& dag);

// Inverse of flatten_upper_triangle; entries > 0.5 become edges.
Dag unflatten_upper_triangle(int n, std::span<const double> values, std::vector<OpKind> ops);

// Every (edge subset) x (op assignment) DAG on n nodes. Intended for n <= 5.
std::vector<Dag> enumerate_all_dags(int n, std::span<const OpKind> op_palette);

// Isomorphic copy under a random linear extension: nodes are renumbered by a
// randomized topological order, so the result stays upper-triangular and all
// WL invariants (features, hashes, similarities) are preserved exactly.
Dag random_topological_relabel(const Dag& dag, Rng& rng);

}  // namespace gemnas
