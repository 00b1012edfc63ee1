#include "gemnas/wl_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gemnas/errors.hpp"
#include "gemnas/rng.hpp"

namespace gemnas {

int WlLabelDictionary::intern(const std::string& signature) {
  auto [it, inserted] = map_.try_emplace(signature, static_cast<int>(map_.size()));
  return it->second;
}

std::int64_t WlFeatureVector::total() const {
  std::int64_t t = 0;
  for (const auto& [id, c] : counts) t += c;
  return t;
}

namespace {

std::string initial_signature(const Dag& dag, int v, bool use_ops) {
  return use_ops ? "0|" + dag.op(v).to_string() : std::string("0|*");
}

// Signature of a node given current integer labels: own label plus sorted
// in- and out-neighbor label multisets.
std::string refine_signature(const Dag& dag, int v, const std::vector<int>& labels) {
  std::vector<int> in, out;
  for (int i = 0; i < v; ++i)
    if (dag.has_edge(i, v)) in.push_back(labels[i]);
  for (int j = v + 1; j < dag.node_count(); ++j)
    if (dag.has_edge(v, j)) out.push_back(labels[j]);
  std::sort(in.begin(), in.end());
  std::sort(out.begin(), out.end());

  std::string sig = "r|" + std::to_string(labels[v]) + "|";
  for (int x : in) {
    sig += std::to_string(x);
    sig += ',';
  }
  sig += '|';
  for (int x : out) {
    sig += std::to_string(x);
    sig += ',';
  }
  return sig;
}

}  // namespace

WlFeatureVector wl_features(const Dag& dag, const WlConfig& cfg, WlLabelDictionary& dictionary) {
  if (cfg.h < 0) throw std::invalid_argument("wl_features: h must be >= 0");
  const int n = dag.node_count();

  WlFeatureVector features;
  std::vector<int> labels(n);
  for (int v = 0; v < n; ++v) {
    labels[v] = dictionary.intern(initial_signature(dag, v, cfg.use_ops_as_initial_labels));
    ++features.counts[labels[v]];
  }

  std::vector<int> next(n);
  for (int iter = 1; iter <= cfg.h; ++iter) {
    for (int v = 0; v < n; ++v) next[v] = dictionary.intern(refine_signature(dag, v, labels));
    labels = next;
    for (int v = 0; v < n; ++v) ++features.counts[labels[v]];
  }
  return features;
}

double wl_kernel_raw(const WlFeatureVector& fa, const WlFeatureVector& fb) {
  // Merge-walk over the sorted sparse maps.
  std::int64_t dot = 0;
  auto ia = fa.counts.begin();
  auto ib = fb.counts.begin();
  while (ia != fa.counts.end() && ib != fb.counts.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(dot);
}

double wl_similarity(const Dag& ga, const Dag& gb, const WlConfig& cfg) {
  WlLabelDictionary dict;
  WlFeatureVector fa = wl_features(ga, cfg, dict);
  WlFeatureVector fb = wl_features(gb, cfg, dict);
  double kaa = wl_kernel_raw(fa, fa);
  double kbb = wl_kernel_raw(fb, fb);
  if (kaa <= 0.0 || kbb <= 0.0)
    throw std::invalid_argument("wl_similarity: degenerate graph with zero self-kernel");
  return wl_kernel_raw(fa, fb) / std::sqrt(kaa * kbb);
}

std::string wl_canonical_hash(const Dag& dag, int h) {
  if (h < 0) throw std::invalid_argument("wl_canonical_hash: h must be >= 0");
  const int n = dag.node_count();

  // Hash-chained labels: each round replaces a node's label with a digest of
  // (own label, sorted in-neighbor labels, sorted out-neighbor labels). Labels
  // stay content-bearing across graphs, and node reindexing cannot change the
  // final multiset.
  char hex[17];
  auto to_hex = [&hex](std::uint64_t v) {
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(v));
    return std::string(hex);
  };

  std::vector<std::string> labels(n);
  for (int v = 0; v < n; ++v) labels[v] = to_hex(fnv1a64(dag.op(v).to_string()));

  for (int iter = 0; iter < h; ++iter) {
    std::vector<std::string> next(n);
    for (int v = 0; v < n; ++v) {
      std::vector<std::string> in, out;
      for (int i = 0; i < v; ++i)
        if (dag.has_edge(i, v)) in.push_back(labels[i]);
      for (int j = v + 1; j < n; ++j)
        if (dag.has_edge(v, j)) out.push_back(labels[j]);
      std::sort(in.begin(), in.end());
      std::sort(out.begin(), out.end());
      std::string sig = labels[v] + "|";
      for (const auto& s : in) sig += s + ",";
      sig += "|";
      for (const auto& s : out) sig += s + ",";
      next[v] = to_hex(fnv1a64(sig));
    }
    labels = std::move(next);
  }

  std::vector<std::string> multiset = labels;
  std::sort(multiset.begin(), multiset.end());
  std::vector<std::string> op_multiset;
  op_multiset.reserve(n);
  for (int v = 0; v < n; ++v) op_multiset.push_back(dag.op(v).to_string());
  std::sort(op_multiset.begin(), op_multiset.end());

  std::string digest = "n" + std::to_string(n) + "e" + std::to_string(dag.edge_count()) + ";";
  for (const auto& s : multiset) digest += s + ";";
  digest += "#";
  for (const auto& s : op_multiset) digest += s + ";";

  std::uint64_t lo = fnv1a64(digest);
  std::uint64_t hi = fnv1a64(digest, 0xcbf29ce484222325ull ^ 0x9e3779b97f4a7c15ull);
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return std::string(buf);
}

}  // namespace gemnas
