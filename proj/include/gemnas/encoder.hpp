#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "gemnas/graph.hpp"
#include "gemnas/nn.hpp"
#include "gemnas/rng.hpp"
#include "gemnas/wl_kernel.hpp"

namespace gemnas {

// d-dimensional continuous graph embedding.
using GraphVector = Eigen::VectorXd;

// Trained encoder/decoder pair plus everything needed to rebuild its inputs:
// node count, embedding width, the WL config used for similarity targets, and
// the optional per-node op one-hot vocabulary.
struct EncoderBundle {
  Mlp encoder;  // input flat_dim (+ n * vocab) -> d
  Mlp decoder;  // d -> flat_dim, sigmoid output
  int n = 0;
  int d = 0;
  WlConfig wl_cfg;
  bool use_op_onehots = false;
  std::vector<OpKind> op_vocab;  // one-hot ordering; empty when disabled
  // The similarity objective constrains embedding directions, not magnitudes,
  // so downstream consumers read unit-normalized vectors unless disabled.
  bool unit_normalize = true;

  int flat_dim() const { return n * (n - 1) / 2; }
  int input_dim() const;
  // Flattened upper triangle, with op one-hots appended when enabled.
  Eigen::VectorXd encode_input(const Dag& dag) const;
};

// Exact cosine; throws ZeroVectorError when either norm is below 1e-12.
double cosine_similarity(const GraphVector& a, const GraphVector& b);

// Squared difference between an embedding-space similarity and a graph-space
// similarity; the per-pair training objective reduced to its arguments.
inline double similarity_loss_value(double embedding_similarity, double graph_similarity) {
  double diff = embedding_similarity - graph_similarity;
  return diff * diff;
}

// (S_e(E(A_i), E(A_j)) - S_g(G_i, G_j))^2 for the bundle's encoder.
double similarity_loss(const Dag& ga, const Dag& gb, const EncoderBundle& bundle);

// Mean squared error between the flattened adjacency and the decoded
// reconstruction of the graph's embedding.
double reconstruction_loss(const Dag& dag, const EncoderBundle& bundle);

GraphVector embed(const Dag& dag, const EncoderBundle& bundle);

// Embedding as consumed by the predictor and search: the unit-normalized
// direction when the bundle asks for it (the cosine objective organizes
// directions; magnitudes are left unconstrained by training and only mislead
// regression), otherwise the raw embedding.
GraphVector prediction_features(const Dag& dag, const EncoderBundle& bundle);
int prediction_feature_dim(const EncoderBundle& bundle);

struct EncoderTrainOptions {
  int pair_count = 5000;
  int n = 6;
  int d = 16;
  std::vector<int> hidden = {256, 256};
  TrainConfig train;
  WlConfig wl;
  bool kernel_guided = true;  // false: reconstruction-only autoencoder baseline
  bool use_op_onehots = false;
  std::vector<OpKind> op_vocab;
  // Default pair sampler: the first graph is random_dag with edge_prob drawn
  // uniformly from edge_prob_range; the partner is an independent draw, an
  // edge/op perturbation of the first (pair_perturb_prob), or an isomorphic
  // topological relabeling (pair_permute_prob). Independent same-size pairs
  // alone give a near-constant similarity target as n grows; the perturbed
  // share restores a graded signal and the permuted share teaches
  // isomorphism invariance.
  std::vector<OpKind> palette = {OpKind::conv1x1(), OpKind::dwsep3x3()};
  std::pair<double, double> edge_prob_range = {0.1, 0.9};
  double pair_perturb_prob = 0.4;
  double pair_permute_prob = 0.2;
  std::pair<double, double> perturb_flip_range = {0.02, 0.3};
  // Base graph draw for the default pair pipeline; when unset, random_dag with
  // edge_prob from edge_prob_range. Perturb/permute partners build on top.
  std::function<Dag(Rng&)> base_sampler;
  std::function<Dag(Rng&)> sampler;  // replaces the whole pair pipeline when set
  int checkpoint_every = 100;
  int workers = 1;
};

struct LossCheckpoint {
  int iteration;        // 1-based index of the last iteration in the window
  double similarity_loss;
  double reconstruction_loss;
  double total_loss;
};

struct EncoderTrainResult {
  EncoderBundle bundle;
  std::vector<LossCheckpoint> history;
};

// One pair draw from the options' default pair distribution (independent,
// perturbed, or permuted partner). Ignores options.sampler.
std::pair<Dag, Dag> sample_training_pair(const EncoderTrainOptions& options, Rng& rng);

// Samples pair_count graph pairs, computes WL similarity targets, and trains
// encoder+decoder on sum of similarity and reconstruction losses (similarity
// term dropped when kernel_guided is false). Deterministic under
// train.rng_seed. Throws TrainingDivergenceError on NaN parameters.
EncoderTrainResult train_encoder(const EncoderTrainOptions& options);

// Bundle checkpoint: directory with manifest.json, encoder.mlp, decoder.mlp.
void save_bundle(const EncoderBundle& bundle, const std::filesystem::path& dir,
                 const nlohmann::json& extra_meta);
EncoderBundle load_bundle(const std::filesystem::path& dir);

}  // namespace gemnas
