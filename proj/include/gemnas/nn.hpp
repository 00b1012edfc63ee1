#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace gemnas {

enum class Activation { ReLU, Sigmoid, Identity };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct Layer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::Identity;
};

// Plain feedforward network. Batch variants treat matrix columns as samples.
class Mlp {
 public:
  Mlp() = default;
  // dims = {in, h1, ..., out}; acts has dims.size()-1 entries.
  Mlp(const std::vector<int>& dims, const std::vector<Activation>& acts);

  // Uniform Xavier/Glorot init scaled by fan-in + fan-out, biases zero.
  static Mlp xavier(const std::vector<int>& dims, const std::vector<Activation>& acts,
                    std::uint64_t seed);

  int input_dim() const;
  int output_dim() const;
  std::size_t layer_count() const { return layers_.size(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const Mlp&, const Mlp&);

 private:
  std::vector<Layer> layers_;
};

// Cached pre- and post-activation values for one forward pass; feeds backward().
struct ForwardTrace {
  Eigen::MatrixXd input;                     // in x B
  std::vector<Eigen::MatrixXd> pre;          // per layer, out_l x B
  std::vector<Eigen::MatrixXd> post;         // per layer, out_l x B
  const Eigen::MatrixXd& output() const { return post.back(); }
};

ForwardTrace forward_trace(const Mlp& net, const Eigen::MatrixXd& x);

// Reverse-mode gradients. dW/db are sums over the batch columns (exact
// per-sample gradients when B == 1); input_grad is per-column.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input_grad;
};

// output_grad: dLoss/dOutput, one column per sample, matching trace.output().
Gradients backward(const Mlp& net, const ForwardTrace& trace, const Eigen::MatrixXd& output_grad);

Gradients zero_gradients(const Mlp& net);
void accumulate(Gradients& into, const Gradients& g);
void scale_gradients(Gradients& g, double factor);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  int iterations = 1000;
  int batch_size = 32;
  Optimizer optimizer = Optimizer::Adam;
  AdamParams adam;
  std::uint64_t rng_seed = 0;
};

// Per-network optimizer state (Adam moments; empty for SGD).
class OptState {
 public:
  OptState() = default;
  explicit OptState(const Mlp& net);
  std::int64_t step() const { return step_; }

  // One update with already-averaged gradients. Throws TrainingDivergenceError
  // if any parameter leaves the finite range.
  void apply(Mlp& net, const Gradients& grad, const TrainConfig& cfg);

 private:
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
  std::int64_t step_ = 0;
};

// One optimizer step from (input, dLoss/dOutput) pairs; gradients are averaged
// over the batch before the update.
void train_step(Mlp& net,
                std::span<const std::pair<Eigen::VectorXd, Eigen::VectorXd>> batch,
                const TrainConfig& cfg, OptState& state);

// Checkpoint file: single-line JSON header (dims, activations, extra metadata)
// terminated by '\n', then all parameters as little-endian float64 in layer
// order (weights row-major, then bias).
void save_mlp(const Mlp& net, const std::filesystem::path& path, const nlohmann::json& meta);
std::pair<Mlp, nlohmann::json> load_mlp(const std::filesystem::path& path);

}  // namespace gemnas
