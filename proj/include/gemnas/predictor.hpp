#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gemnas/encoder.hpp"
#include "gemnas/nn.hpp"
#include "gemnas/oracle.hpp"

namespace gemnas {

struct ScoredSample {
  GraphVector g;
  double y = 0.0;
  std::string provenance;  // wl canonical hash of the source dag
};

// Efficiency-score regressor over the embedding space.
struct Predictor {
  Mlp net;  // d -> hidden (ReLU) -> 1
  std::vector<ScoredSample> training_set;
  int d = 0;
};

double predict(const Predictor& p, const GraphVector& g);

// Mean squared error of the predictor over a sample set.
double training_mse(const Predictor& p, const std::vector<ScoredSample>& samples);

struct EstimatorOptions {
  int sample_budget = 200;
  TrainConfig train;
  double lambda = 0.01;
  std::vector<int> hidden = {128, 128};
  int finetune_epochs = 5;  // passes over the accumulated set per added sample
  bool skip_missing = false;
  std::function<Dag(Rng&)> sampler;
  // Called for each accepted sample, in order; wired to the CLI sample log.
  std::function<void(int index, const Dag&, const Evaluation&, double score)> on_sample;
  // Called with the training-set MSE after each fine-tune round.
  std::function<void(int index, double mse)> on_checkpoint;
};

// Fig-style estimator building: sample, evaluate, score, embed, append,
// fine-tune, repeat. sample_budget counts sampling attempts; with skip_missing
// set, attempts that hit an absent table entry are dropped and the final
// training set may be smaller than the budget.
Predictor build_estimator(const EvaluationOracle& oracle, const EncoderBundle& bundle,
                          const EstimatorOptions& options);

// One-shot batch fit over a fixed sample set, for correlation protocols where
// the training split is known in advance.
Predictor fit_predictor(std::vector<ScoredSample> samples, int d, const TrainConfig& cfg,
                        const std::vector<int>& hidden, int epochs);

struct VarianceBoundReport {
  double output_variance = 0.0;  // Var[P(X)] over the set
  double bound_rhs = 0.0;        // K_spectral^2 * E||X - E[X]||^2
  double k_pairwise = 0.0;       // max |P(x1)-P(x2)| / ||x1-x2|| over pairs
  double k_spectral = 0.0;       // product of layer spectral norms
  bool satisfied = false;
  bool degenerate = false;       // all vectors identical: both sides zero
};

// Checks Var[P(X)] <= K^2 E||X - E[X]||^2 per vector set, with K the
// layer-wise spectral-norm product (a true Lipschitz upper bound for
// ReLU/identity networks). The sampled pairwise slope is reported alongside.
std::vector<VarianceBoundReport> empirical_variance_bound_check(
    const Predictor& p, const std::vector<std::vector<GraphVector>>& vector_sets);

// Product of per-layer spectral norms; Lipschitz upper bound of the network
// when every activation is 1-Lipschitz.
double spectral_norm_bound(const Mlp& net);

}  // namespace gemnas
