#include "gemnas/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gemnas/errors.hpp"
#include "gemnas/rng.hpp"
#include "gemnas/wl_kernel.hpp"

namespace gemnas {

double efficiency_score(const Evaluation& eval, double lambda) {
  if (lambda < 0.0) throw std::domain_error("efficiency_score: lambda must be >= 0");
  if (lambda == 0.0) return eval.accuracy;
  if (eval.mac_millions <= 0.0)
    throw std::domain_error("efficiency_score: mac must be positive when lambda > 0");
  return eval.accuracy - lambda * std::log(eval.mac_millions);
}

namespace {

double op_scalar(OpKind op) {
  switch (op.tag) {
    case OpKind::Tag::Conv1x1:
      return 0.0;
    case OpKind::Tag::DwSepConv3x3:
      return 1.0;
    case OpKind::Tag::Labeled:
      return static_cast<double>(op.label % 3) / 2.0;
  }
  return 0.0;
}

// Longest path in edges within the active subgraph; topological order is the
// node order itself.
int longest_active_path(const CellSpec& cell) {
  const Dag& dag = cell.source;
  std::vector<int> depth(dag.node_count(), 0);
  int best = 0;
  for (int v : cell.active_nodes) {
    for (int j = v + 1; j < dag.node_count(); ++j) {
      if (dag.has_edge(v, j) && cell.is_active(j)) {
        depth[j] = std::max(depth[j], depth[v] + 1);
        best = std::max(best, depth[j]);
      }
    }
  }
  return best;
}

}  // namespace

Evaluation synthetic_evaluate(const Dag& dag, const SyntheticOracleConfig& cfg, int channels,
                              Resolution resolution) {
  CellSpec cell;
  try {
    cell = prune_to_cell(dag, channels, resolution);
  } catch (const DegenerateCellError&) {
    return Evaluation{0.0, 0.0};
  }

  const double n_active = static_cast<double>(cell.active_nodes.size());
  double mean_in_degree = 0.0;
  double op_mix = 0.0;
  for (int v : cell.active_nodes) {
    mean_in_degree += cell.active_in_degree(v);
    op_mix += op_scalar(dag.op(v));
  }
  mean_in_degree /= n_active;
  op_mix /= n_active;

  double z = cfg.bias + cfg.w_longest_path * longest_active_path(cell) +
             cfg.w_mean_in_degree * mean_in_degree + cfg.w_op_mix * op_mix;
  double accuracy = 1.0 / (1.0 + std::exp(-z));

  if (cfg.noise_sigma > 0.0) {
    std::string key = wl_canonical_hash(dag, cfg.hash_iterations);
    Rng noise_rng(mix_seed(cfg.rng_seed, fnv1a64(key)));
    accuracy += cfg.noise_sigma * noise_rng.next_gaussian();
  }
  accuracy = std::clamp(accuracy, 0.0, 1.0);

  return Evaluation{accuracy, mac_estimate(cell)};
}

bool BenchmarkTable::insert(std::string hash, Evaluation evaluation, std::optional<Dag> dag) {
  if (index_.contains(hash)) return false;
  index_.emplace(hash, entries_.size());
  entries_.push_back(Entry{std::move(hash), evaluation, std::move(dag)});
  return true;
}

const Evaluation* BenchmarkTable::find(const std::string& hash) const {
  auto it = index_.find(hash);
  return it == index_.end() ? nullptr : &entries_[it->second].evaluation;
}

double BenchmarkTable::max_accuracy() const {
  if (entries_.empty()) throw std::logic_error("BenchmarkTable: empty table");
  double best = 0.0;
  for (const auto& e : entries_) best = std::max(best, e.evaluation.accuracy);
  return best;
}

void BenchmarkTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("BenchmarkTable::save: cannot open " + path.string());
  nlohmann::json header;
  header["type"] = "header";
  header["format"] = "gemnas-benchmark-v1";
  header["n"] = meta_.n;
  auto& palette = header["op_palette"] = nlohmann::json::array();
  for (const auto& op : meta_.op_palette) palette.push_back(op.to_string());
  header["hash_iterations"] = meta_.hash_iterations;
  header["entries"] = entries_.size();
  out << header.dump() << '\n';

  for (const auto& e : entries_) {
    nlohmann::json rec;
    rec["hash"] = e.hash;
    rec["accuracy"] = e.evaluation.accuracy;
    rec["mac_millions"] = e.evaluation.mac_millions;
    if (e.dag) rec["dag"] = e.dag->to_json();
    out << rec.dump() << '\n';
  }
  if (!out) throw std::runtime_error("BenchmarkTable::save: write failed for " + path.string());
}

BenchmarkTable BenchmarkTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("BenchmarkTable::load: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("BenchmarkTable::load: missing header in " + path.string());
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("type", "") != "header" ||
      header.value("format", "") != "gemnas-benchmark-v1")
    throw std::runtime_error("BenchmarkTable::load: unrecognized table format");

  BenchmarkTableMetadata meta;
  meta.n = header.at("n").get<int>();
  for (const auto& s : header.at("op_palette"))
    meta.op_palette.push_back(OpKind::parse(s.get<std::string>()));
  meta.hash_iterations = header.at("hash_iterations").get<int>();

  BenchmarkTable table(meta);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line);
    std::optional<Dag> dag;
    if (rec.contains("dag")) dag = Dag::from_json(rec.at("dag"));
    table.insert(rec.at("hash").get<std::string>(),
                 Evaluation{rec.at("accuracy").get<double>(),
                            rec.at("mac_millions").get<double>()},
                 std::move(dag));
  }
  return table;
}

Evaluation tabular_evaluate(const Dag& dag, const BenchmarkTable& table) {
  std::string hash = wl_canonical_hash(dag, table.metadata().hash_iterations);
  const Evaluation* found = table.find(hash);
  if (!found)
    throw MissingArchitectureError("tabular_evaluate: architecture " + hash +
                                   " not present in benchmark table");
  return *found;
}

}  // namespace gemnas
