#include "gemnas/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "gemnas/errors.hpp"
#include "gemnas/wl_kernel.hpp"

namespace gemnas {

double predict(const Predictor& p, const GraphVector& g) {
  if (g.size() != p.d) throw std::invalid_argument("predict: embedding dimension mismatch");
  return p.net.forward(g)(0);
}

double training_mse(const Predictor& p, const std::vector<ScoredSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("training_mse: empty sample set");
  double sum = 0.0;
  for (const auto& s : samples) {
    double diff = predict(p, s.g) - s.y;
    sum += diff * diff;
  }
  return sum / static_cast<double>(samples.size());
}

namespace {

Mlp make_regressor(int d, const std::vector<int>& hidden, std::uint64_t seed) {
  std::vector<int> dims{d};
  std::vector<Activation> acts;
  for (int h : hidden) {
    dims.push_back(h);
    acts.push_back(Activation::ReLU);
  }
  dims.push_back(1);
  acts.push_back(Activation::Identity);
  return Mlp::xavier(dims, acts, seed);
}

// One pass over the samples in shuffled minibatches, squared-error loss.
void run_epoch(Mlp& net, const std::vector<ScoredSample>& samples, const TrainConfig& cfg,
               OptState& state, Rng& rng) {
  const std::size_t count = samples.size();
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  for (std::size_t i = count; i > 1; --i) {
    std::size_t j = rng.next_index(i);
    std::swap(order[i - 1], order[j]);
  }

  const int d = net.input_dim();
  const std::size_t batch = std::min<std::size_t>(std::max(1, cfg.batch_size), count);
  for (std::size_t start = 0; start < count; start += batch) {
    const std::size_t size = std::min(batch, count - start);
    Eigen::MatrixXd x(d, size);
    Eigen::VectorXd y(size);
    for (std::size_t b = 0; b < size; ++b) {
      const auto& s = samples[order[start + b]];
      x.col(static_cast<Eigen::Index>(b)) = s.g;
      y(static_cast<Eigen::Index>(b)) = s.y;
    }
    ForwardTrace trace = forward_trace(net, x);
    Eigen::MatrixXd dy = 2.0 * (trace.output() - y.transpose());
    Gradients grads = backward(net, trace, dy);
    scale_gradients(grads, 1.0 / static_cast<double>(size));
    state.apply(net, grads, cfg);
  }
}

}  // namespace

Predictor build_estimator(const EvaluationOracle& oracle, const EncoderBundle& bundle,
                          const EstimatorOptions& options) {
  if (options.sample_budget < 1)
    throw std::invalid_argument("build_estimator: sample_budget must be >= 1");
  if (!options.sampler) throw std::invalid_argument("build_estimator: sampler is required");

  Predictor p;
  p.d = prediction_feature_dim(bundle);
  p.net = make_regressor(p.d, options.hidden, mix_seed(options.train.rng_seed, "predictor-init"));
  OptState state(p.net);
  Rng sample_rng(mix_seed(options.train.rng_seed, "estimator-sampling"));
  Rng epoch_rng(mix_seed(options.train.rng_seed, "estimator-epochs"));

  for (int attempt = 0; attempt < options.sample_budget; ++attempt) {
    Dag dag = options.sampler(sample_rng);
    Evaluation eval;
    try {
      eval = oracle.evaluate(dag);
    } catch (const MissingArchitectureError&) {
      if (options.skip_missing) continue;
      throw;
    }
    double score = efficiency_score(eval, options.lambda);

    ScoredSample sample;
    sample.g = prediction_features(dag, bundle);
    sample.y = score;
    sample.provenance = wl_canonical_hash(dag, bundle.wl_cfg.h);
    p.training_set.push_back(std::move(sample));

    for (int e = 0; e < options.finetune_epochs; ++e)
      run_epoch(p.net, p.training_set, options.train, state, epoch_rng);

    if (options.on_sample) options.on_sample(attempt, dag, eval, score);
    if (options.on_checkpoint) options.on_checkpoint(attempt, training_mse(p, p.training_set));
  }

  if (p.training_set.empty())
    throw std::runtime_error("build_estimator: no samples were accepted");
  return p;
}

Predictor fit_predictor(std::vector<ScoredSample> samples, int d, const TrainConfig& cfg,
                        const std::vector<int>& hidden, int epochs) {
  if (samples.empty()) throw std::invalid_argument("fit_predictor: empty sample set");
  Predictor p;
  p.d = d;
  p.net = make_regressor(d, hidden, mix_seed(cfg.rng_seed, "predictor-init"));
  p.training_set = std::move(samples);
  OptState state(p.net);
  Rng epoch_rng(mix_seed(cfg.rng_seed, "estimator-epochs"));
  for (int e = 0; e < epochs; ++e) run_epoch(p.net, p.training_set, cfg, state, epoch_rng);
  return p;
}

double spectral_norm_bound(const Mlp& net) {
  double product = 1.0;
  for (const auto& layer : net.layers()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(layer.weights);
    product *= svd.singularValues()(0);
  }
  return product;
}

std::vector<VarianceBoundReport> empirical_variance_bound_check(
    const Predictor& p, const std::vector<std::vector<GraphVector>>& vector_sets) {
  const double k_spectral = spectral_norm_bound(p.net);

  std::vector<VarianceBoundReport> reports;
  reports.reserve(vector_sets.size());
  for (const auto& set : vector_sets) {
    if (set.size() < 2)
      throw std::invalid_argument("empirical_variance_bound_check: sets need >= 2 vectors");

    VarianceBoundReport report;
    report.k_spectral = k_spectral;

    const std::size_t count = set.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(set[0].size());
    for (const auto& v : set) mean += v;
    mean /= static_cast<double>(count);

    double input_variance = 0.0;  // E ||X - E[X]||^2
    for (const auto& v : set) input_variance += (v - mean).squaredNorm();
    input_variance /= static_cast<double>(count);

    std::vector<double> outputs(count);
    for (std::size_t i = 0; i < count; ++i) outputs[i] = predict(p, set[i]);
    double out_mean = 0.0;
    for (double o : outputs) out_mean += o;
    out_mean /= static_cast<double>(count);
    for (double o : outputs) report.output_variance += (o - out_mean) * (o - out_mean);
    report.output_variance /= static_cast<double>(count);

    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = i + 1; j < count; ++j) {
        double dist = (set[i] - set[j]).norm();
        if (dist > 0.0)
          report.k_pairwise = std::max(report.k_pairwise,
                                       std::abs(outputs[i] - outputs[j]) / dist);
      }

    report.bound_rhs = k_spectral * k_spectral * input_variance;
    report.degenerate = input_variance == 0.0;
    report.satisfied = report.degenerate ? report.output_variance == 0.0
                                         : report.output_variance <= report.bound_rhs;
    reports.push_back(report);
  }
  return reports;
}

}  // namespace gemnas
