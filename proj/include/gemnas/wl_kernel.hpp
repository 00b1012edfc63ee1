#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>

#include "gemnas/graph.hpp"

namespace gemnas {

struct WlConfig {
  int h = 3;                             // refinement iterations, >= 0
  bool use_ops_as_initial_labels = true; // false => a single uniform start label
};

// Compresses label signatures to dense integer ids. Ids depend on insertion
// order, so feature vectors are only comparable when built against the same
// dictionary instance (or one rebuilt by an identical call sequence).
class WlLabelDictionary {
 public:
  int intern(const std::string& signature);
  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::string, int> map_;
};

// Sparse label-count vector accumulated over iterations 0..h.
struct WlFeatureVector {
  std::map<int, std::int64_t> counts;
  std::int64_t total() const;
};

// Iteration 0 labels each node by its op (or uniformly); every later iteration
// relabels node v with (label(v), sorted in-neighbor labels, sorted
// out-neighbor labels). Counts from all iterations are accumulated.
WlFeatureVector wl_features(const Dag& dag, const WlConfig& cfg, WlLabelDictionary& dictionary);

// Inner product of sparse count vectors. Both arguments must have been built
// against the same dictionary.
double wl_kernel_raw(const WlFeatureVector& fa, const WlFeatureVector& fb);

// Cosine-normalized kernel value in [0, 1]: k(a,b) / sqrt(k(a,a) k(b,b)).
// Uses a private dictionary per call, so it is safe anywhere.
double wl_similarity(const Dag& ga, const Dag& gb, const WlConfig& cfg);

// Order-independent 128-bit hex digest of the iteration-h label multiset plus
// the op multiset. Node relabelings that preserve the graph hash identically;
// stable across runs and platforms. Ops always seed the initial labels here.
std::string wl_canonical_hash(const Dag& dag, int h);

}  // namespace gemnas
