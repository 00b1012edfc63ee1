#include "gemnas/corpus.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gemnas/parallel.hpp"
#include "gemnas/rng.hpp"
#include "gemnas/wl_kernel.hpp"

namespace gemnas {

void save_corpus(const std::vector<CorpusRecord>& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_corpus: cannot open " + path.string());
  for (const auto& rec : corpus) {
    nlohmann::json j;
    j["dag"] = rec.dag.to_json();
    j["accuracy"] = rec.evaluation.accuracy;
    j["mac_millions"] = rec.evaluation.mac_millions;
    j["hash"] = rec.hash;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("save_corpus: write failed for " + path.string());
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_corpus: cannot open " + path.string());
  std::vector<CorpusRecord> corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    CorpusRecord rec;
    rec.dag = Dag::from_json(j.at("dag"));
    rec.evaluation.accuracy = j.at("accuracy").get<double>();
    rec.evaluation.mac_millions = j.at("mac_millions").get<double>();
    rec.hash = j.at("hash").get<std::string>();
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

std::vector<CorpusRecord> make_corpus(int count, const std::function<Dag(Rng&)>& sampler,
                                      const EvaluationOracle& oracle, int hash_iterations,
                                      std::uint64_t seed, int workers, CorpusDedup dedup) {
  if (count < 1) throw std::invalid_argument("make_corpus: count must be >= 1");
  if (!sampler) throw std::invalid_argument("make_corpus: sampler is required");

  // Sampling and dedup are serial (cheap); oracle evaluation is the parallel part.
  Rng rng(mix_seed(seed, "corpus-sampling"));
  std::vector<CorpusRecord> corpus;
  std::unordered_set<std::string> seen;
  const long max_attempts = 200L * count;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(corpus.size()) < count;
       ++attempt) {
    Dag dag = sampler(rng);
    std::string hash = wl_canonical_hash(dag, hash_iterations);
    if (dedup == CorpusDedup::ByHash && !seen.insert(hash).second) continue;
    if (dedup == CorpusDedup::ByStructure && !seen.insert(dag.to_json().dump()).second) continue;
    CorpusRecord rec;
    rec.dag = std::move(dag);
    rec.hash = std::move(hash);
    corpus.push_back(std::move(rec));
  }
  if (static_cast<int>(corpus.size()) < count)
    throw std::runtime_error("make_corpus: search space too small for " +
                             std::to_string(count) + " distinct architectures");

  parallel_for(corpus.size(), workers,
               [&](std::size_t i) { corpus[i].evaluation = oracle.evaluate(corpus[i].dag); });
  return corpus;
}

BenchmarkTable corpus_to_table(const std::vector<CorpusRecord>& corpus,
                               BenchmarkTableMetadata meta) {
  BenchmarkTable table(std::move(meta));
  for (const auto& rec : corpus) table.insert(rec.hash, rec.evaluation, rec.dag);
  return table;
}

}  // namespace gemnas
