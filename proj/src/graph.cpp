#include "gemnas/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gemnas/errors.hpp"
#include "gemnas/rng.hpp"

namespace gemnas {

OpKind OpKind::labeled(int id) {
  if (id < 0) throw std::invalid_argument("OpKind::labeled: id must be non-negative");
  return {Tag::Labeled, id};
}

std::string OpKind::to_string() const {
  switch (tag) {
    case Tag::Conv1x1:
      return "conv1x1";
    case Tag::DwSepConv3x3:
      return "dwsep3x3";
    case Tag::Labeled:
      return "op" + std::to_string(label);
  }
  throw std::logic_error("OpKind::to_string: bad tag");
}

OpKind OpKind::parse(const std::string& text) {
  if (text == "conv1x1") return conv1x1();
  if (text == "dwsep3x3") return dwsep3x3();
  if (text.size() > 2 && text.compare(0, 2, "op") == 0) {
    std::size_t pos = 0;
    int id = std::stoi(text.substr(2), &pos);
    if (pos == text.size() - 2 && id >= 0) return labeled(id);
  }
  throw ConfigError("unknown op kind: '" + text + "'");
}

Dag::Dag(int n, std::vector<OpKind> ops) : n_(n), ops_(std::move(ops)) {
  if (n < 1) throw std::invalid_argument("Dag: node count must be >= 1");
  if (static_cast<int>(ops_.size()) != n)
    throw std::invalid_argument("Dag: ops list length must equal node count");
  upper_.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0);
}

Dag::Dag(int n, OpKind uniform_op) : Dag(n, std::vector<OpKind>(n, uniform_op)) {}

int Dag::flat_index(int i, int j) const {
  if (i < 0 || j <= i || j >= n_)
    throw std::out_of_range("Dag: edge endpoints must satisfy 0 <= i < j < n");
  return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

bool Dag::has_edge(int i, int j) const { return upper_[flat_index(i, j)] != 0; }

void Dag::add_edge(int i, int j) { upper_[flat_index(i, j)] = 1; }

void Dag::remove_edge(int i, int j) { upper_[flat_index(i, j)] = 0; }

int Dag::edge_count() const {
  int c = 0;
  for (auto b : upper_) c += b;
  return c;
}

int Dag::in_degree(int v) const {
  int c = 0;
  for (int i = 0; i < v; ++i) c += has_edge(i, v);
  return c;
}

int Dag::out_degree(int v) const {
  int c = 0;
  for (int j = v + 1; j < n_; ++j) c += has_edge(v, j);
  return c;
}

std::vector<int> Dag::in_neighbors(int v) const {
  std::vector<int> out;
  for (int i = 0; i < v; ++i)
    if (has_edge(i, v)) out.push_back(i);
  return out;
}

std::vector<int> Dag::out_neighbors(int v) const {
  std::vector<int> out;
  for (int j = v + 1; j < n_; ++j)
    if (has_edge(v, j)) out.push_back(j);
  return out;
}

std::vector<std::pair<int, int>> Dag::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (has_edge(i, j)) out.emplace_back(i, j);
  return out;
}

nlohmann::json Dag::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  auto& e = j["edges"] = nlohmann::json::array();
  for (auto [a, b] : edges()) e.push_back({a, b});
  auto& o = j["ops"] = nlohmann::json::array();
  for (const auto& op : ops_) o.push_back(op.to_string());
  return j;
}

Dag Dag::from_json(const nlohmann::json& j) {
  int n = j.at("n").get<int>();
  std::vector<OpKind> ops;
  for (const auto& s : j.at("ops")) ops.push_back(OpKind::parse(s.get<std::string>()));
  Dag dag(n, std::move(ops));
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("Dag json: bad edge record");
    dag.add_edge(e[0].get<int>(), e[1].get<int>());
  }
  return dag;
}

bool CellSpec::is_active(int v) const {
  return std::binary_search(active_nodes.begin(), active_nodes.end(), v);
}

int CellSpec::active_in_degree(int v) const {
  int c = 0;
  for (int i = 0; i < v; ++i)
    if (source.has_edge(i, v) && is_active(i)) ++c;
  return c;
}

Dag random_dag_from(Rng& rng, int n, double edge_prob, std::span<const OpKind> op_palette) {
  if (n < 1) throw std::invalid_argument("random_dag: n must be >= 1");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw std::invalid_argument("random_dag: edge_prob must be in [0, 1]");
  if (op_palette.empty()) throw std::invalid_argument("random_dag: op palette is empty");

  // Draw order is part of the format: edges first (row-major), then ops.
  std::vector<char> edge_bits(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (auto& bit : edge_bits) bit = rng.next_bernoulli(edge_prob);

  std::vector<OpKind> ops(n);
  for (int v = 0; v < n; ++v) ops[v] = op_palette[rng.next_index(op_palette.size())];

  Dag dag(n, std::move(ops));
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k)
      if (edge_bits[k]) dag.add_edge(i, j);
  return dag;
}

Dag random_dag(int n, double edge_prob, std::span<const OpKind> op_palette,
               std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return random_dag_from(rng, n, edge_prob, op_palette);
}

CellSpec prune_to_cell(const Dag& dag, int channels, Resolution resolution) {
  if (channels < 1) throw std::invalid_argument("prune_to_cell: channels must be >= 1");
  const int n = dag.node_count();
  std::vector<char> active(n, 1);

  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 1; v < n; ++v) {
      if (!active[v]) continue;
      int deg = 0;
      for (int i = 0; i < v; ++i)
        if (active[i] && dag.has_edge(i, v)) ++deg;
      if (deg == 0) {
        active[v] = 0;
        changed = true;
      }
    }
  }

  CellSpec cell{dag, {}, 0, {}, {}, channels, resolution};
  for (int v = 0; v < n; ++v)
    if (active[v]) cell.active_nodes.push_back(v);

  if (n > 1 && cell.active_nodes.size() == 1)
    throw DegenerateCellError("prune_to_cell: no node reachable from the cell input");

  for (int v : cell.active_nodes) {
    int out = 0;
    for (int j = v + 1; j < n; ++j)
      if (active[j] && dag.has_edge(v, j)) ++out;
    if (out == 0) cell.output_leaves.push_back(v);
    if (cell.active_in_degree(v) > 1) cell.concat_nodes.push_back(v);
  }
  return cell;
}

double mac_estimate(const CellSpec& cell) {
  const double hw = static_cast<double>(cell.resolution.height) * cell.resolution.width;
  const double c_out = cell.channels;
  double total = 0.0;
  for (int v : cell.active_nodes) {
    const double c_in = c_out * std::max(1, cell.active_in_degree(v));
    switch (cell.source.op(v).tag) {
      case OpKind::Tag::DwSepConv3x3:
        total += hw * c_in * 9.0 + hw * c_in * c_out;
        break;
      case OpKind::Tag::Conv1x1:
      case OpKind::Tag::Labeled:
        total += hw * c_in * c_out;
        break;
    }
  }
  return total / 1e6;
}

std::vector<double> flatten_upper_triangle(const Dag& dag) {
  const int n = dag.node_count();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) flat.push_back(dag.has_edge(i, j) ? 1.0 : 0.0);
  return flat;
}

Dag unflatten_upper_triangle(int n, std::span<const double> values, std::vector<OpKind> ops) {
  if (static_cast<int>(values.size()) != n * (n - 1) / 2)
    throw std::invalid_argument("unflatten_upper_triangle: length must be n(n-1)/2");
  Dag dag(n, std::move(ops));
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k)
      if (values[k] > 0.5) dag.add_edge(i, j);
  return dag;
}

Dag random_topological_relabel(const Dag& dag, Rng& rng) {
  const int n = dag.node_count();
  std::vector<int> remaining_in(n);
  for (int v = 0; v < n; ++v) remaining_in[v] = dag.in_degree(v);

  std::vector<int> ready, position(n, -1);
  for (int v = 0; v < n; ++v)
    if (remaining_in[v] == 0) ready.push_back(v);

  for (int slot = 0; slot < n; ++slot) {
    std::size_t pick = rng.next_index(ready.size());
    int v = ready[pick];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
    position[v] = slot;
    for (int j = v + 1; j < n; ++j)
      if (dag.has_edge(v, j) && --remaining_in[j] == 0) ready.push_back(j);
  }

  std::vector<OpKind> ops(n, OpKind::conv1x1());
  for (int v = 0; v < n; ++v) ops[position[v]] = dag.op(v);
  Dag out(n, std::move(ops));
  for (auto [i, j] : dag.edges()) out.add_edge(position[i], position[j]);
  return out;
}

std::vector<Dag> enumerate_all_dags(int n, std::span<const OpKind> op_palette) {
  if (n < 1 || op_palette.empty())
    throw std::invalid_argument("enumerate_all_dags: need n >= 1 and a non-empty palette");
  const int slots = n * (n - 1) / 2;
  if (slots > 20) throw std::invalid_argument("enumerate_all_dags: space too large");

  std::vector<Dag> out;
  std::vector<std::size_t> op_idx(n, 0);
  const std::size_t palette_size = op_palette.size();
  while (true) {
    std::vector<OpKind> ops(n);
    for (int v = 0; v < n; ++v) ops[v] = op_palette[op_idx[v]];
    for (std::uint32_t mask = 0; mask < (1u << slots); ++mask) {
      Dag dag(n, ops);
      std::size_t k = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++k)
          if (mask & (1u << k)) dag.add_edge(i, j);
      out.push_back(std::move(dag));
    }
    int v = 0;
    for (; v < n; ++v) {
      if (++op_idx[v] < palette_size) break;
      op_idx[v] = 0;
    }
    if (v == n) break;
  }
  return out;
}

}  // namespace gemnas
