#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "gemnas/graph.hpp"
#include "gemnas/oracle.hpp"

namespace gemnas {

class Rng;

// One evaluated architecture; the unit of benchmark corpora.
struct CorpusRecord {
  Dag dag{1, OpKind::conv1x1()};
  Evaluation evaluation;
  std::string hash;
};

// Newline-delimited JSON records {dag, accuracy, mac_millions, hash}.
void save_corpus(const std::vector<CorpusRecord>& corpus, const std::filesystem::path& path);
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

// Corpus deduplication: ByHash keeps one representative per WL class (the
// right key for benchmark tables); ByStructure keeps distinct concrete graphs
// but lets structural classes repeat under different node numberings, the way
// plain random sampling populates a small benchmark; None keeps every draw.
enum class CorpusDedup { None, ByStructure, ByHash };

// Samples `count` architectures under the dedup policy and evaluates each
// through the oracle. Evaluation runs in parallel; output order is
// deterministic.
std::vector<CorpusRecord> make_corpus(int count, const std::function<Dag(Rng&)>& sampler,
                                      const EvaluationOracle& oracle, int hash_iterations,
                                      std::uint64_t seed, int workers,
                                      CorpusDedup dedup = CorpusDedup::ByHash);

// Corpus packaged as a benchmark table, entries carrying their dags.
BenchmarkTable corpus_to_table(const std::vector<CorpusRecord>& corpus,
                               BenchmarkTableMetadata meta);

}  // namespace gemnas
