#include "gemnas/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gemnas/errors.hpp"
#include "gemnas/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace gemnas {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Identity:
      return "identity";
  }
  throw std::logic_error("activation_name: bad value");
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation: '" + name + "'");
}

namespace {

void apply_activation_inplace(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::ReLU:
      z = z.cwiseMax(0.0);
      break;
    case Activation::Sigmoid:
      z = 1.0 / (1.0 + (-z.array()).exp());
      break;
    case Activation::Identity:
      break;
  }
}

// Derivative expressed through pre-activation z and activation value a.
Eigen::ArrayXXd activation_derivative(const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                                      Activation act) {
  switch (act) {
    case Activation::ReLU:
      return (z.array() > 0.0).cast<double>();
    case Activation::Sigmoid:
      return a.array() * (1.0 - a.array());
    case Activation::Identity:
      return Eigen::ArrayXXd::Ones(z.rows(), z.cols());
  }
  throw std::logic_error("activation_derivative: bad value");
}

}  // namespace

Mlp::Mlp(const std::vector<int>& dims, const std::vector<Activation>& acts) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
  if (acts.size() != dims.size() - 1)
    throw std::invalid_argument("Mlp: need one activation per layer");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("Mlp: layer dims must be positive");
  layers_.resize(dims.size() - 1);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weights = Eigen::MatrixXd::Zero(dims[l + 1], dims[l]);
    layers_[l].bias = Eigen::VectorXd::Zero(dims[l + 1]);
    layers_[l].activation = acts[l];
  }
}

Mlp Mlp::xavier(const std::vector<int>& dims, const std::vector<Activation>& acts,
                std::uint64_t seed) {
  Mlp net(dims, acts);
  Rng rng(seed);
  for (auto& layer : net.layers_) {
    const double fan_in = static_cast<double>(layer.weights.cols());
    const double fan_out = static_cast<double>(layer.weights.rows());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    // Row-major fill so the draw order matches the checkpoint layout.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        layer.weights(r, c) = rng.next_uniform(-limit, limit);
  }
  return net;
}

int Mlp::input_dim() const {
  if (layers_.empty()) throw std::logic_error("Mlp: empty network");
  return static_cast<int>(layers_.front().weights.cols());
}

int Mlp::output_dim() const {
  if (layers_.empty()) throw std::logic_error("Mlp: empty network");
  return static_cast<int>(layers_.back().weights.rows());
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const { return forward_batch(x); }

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_dim())
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  Eigen::MatrixXd a = x;
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z = (layer.weights * a).colwise() + layer.bias;
    apply_activation_inplace(z, layer.activation);
    a = std::move(z);
  }
  return a;
}

std::size_t Mlp::parameter_count() const {
  std::size_t c = 0;
  for (const auto& l : layers_) c += l.weights.size() + l.bias.size();
  return c;
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_)
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].activation != b.layers_[l].activation) return false;
    if (a.layers_[l].weights != b.layers_[l].weights) return false;
    if (a.layers_[l].bias != b.layers_[l].bias) return false;
  }
  return true;
}

ForwardTrace forward_trace(const Mlp& net, const Eigen::MatrixXd& x) {
  if (x.rows() != net.input_dim())
    throw std::invalid_argument("forward_trace: input dimension mismatch");
  ForwardTrace trace;
  trace.input = x;
  trace.pre.reserve(net.layer_count());
  trace.post.reserve(net.layer_count());
  const Eigen::MatrixXd* a = &trace.input;
  for (const auto& layer : net.layers()) {
    trace.pre.push_back((layer.weights * (*a)).colwise() + layer.bias);
    Eigen::MatrixXd act = trace.pre.back();
    apply_activation_inplace(act, layer.activation);
    trace.post.push_back(std::move(act));
    a = &trace.post.back();
  }
  return trace;
}

Gradients backward(const Mlp& net, const ForwardTrace& trace,
                   const Eigen::MatrixXd& output_grad) {
  const auto& layers = net.layers();
  if (trace.post.size() != layers.size())
    throw std::invalid_argument("backward: trace does not match network");
  if (output_grad.rows() != net.output_dim() || output_grad.cols() != trace.input.cols())
    throw std::invalid_argument("backward: output_grad shape mismatch");

  Gradients grads;
  grads.weights.resize(layers.size());
  grads.bias.resize(layers.size());

  Eigen::MatrixXd delta = output_grad;
  for (std::size_t l = layers.size(); l-- > 0;) {
    delta.array() *= activation_derivative(trace.pre[l], trace.post[l], layers[l].activation);
    const Eigen::MatrixXd& below = (l == 0) ? trace.input : trace.post[l - 1];
    grads.weights[l] = delta * below.transpose();
    grads.bias[l] = delta.rowwise().sum();
    if (l > 0)
      delta = layers[l].weights.transpose() * delta;
    else
      grads.input_grad = layers[l].weights.transpose() * delta;
  }
  return grads;
}

Gradients zero_gradients(const Mlp& net) {
  Gradients g;
  for (const auto& l : net.layers()) {
    g.weights.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

void accumulate(Gradients& into, const Gradients& g) {
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    into.weights[l] += g.weights[l];
    into.bias[l] += g.bias[l];
  }
}

void scale_gradients(Gradients& g, double factor) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    g.weights[l] *= factor;
    g.bias[l] *= factor;
  }
}

OptState::OptState(const Mlp& net) {
  for (const auto& l : net.layers()) {
    m_w_.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    v_w_.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    m_b_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    v_b_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
}

void OptState::apply(Mlp& net, const Gradients& grad, const TrainConfig& cfg) {
  auto& layers = net.layers();
  if (grad.weights.size() != layers.size())
    throw std::invalid_argument("OptState::apply: gradient/network mismatch");

  if (cfg.optimizer == Optimizer::Sgd) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      layers[l].weights -= cfg.learning_rate * grad.weights[l];
      layers[l].bias -= cfg.learning_rate * grad.bias[l];
    }
    ++step_;
  } else {
    if (m_w_.empty()) *this = OptState(net);
    ++step_;
    const double b1 = cfg.adam.beta1;
    const double b2 = cfg.adam.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t l = 0; l < layers.size(); ++l) {
      m_w_[l] = b1 * m_w_[l] + (1.0 - b1) * grad.weights[l];
      v_w_[l] = b2 * v_w_[l].array() + (1.0 - b2) * grad.weights[l].array().square();
      m_b_[l] = b1 * m_b_[l] + (1.0 - b1) * grad.bias[l];
      v_b_[l] = b2 * v_b_[l].array() + (1.0 - b2) * grad.bias[l].array().square();
      layers[l].weights.array() -=
          cfg.learning_rate * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + cfg.adam.epsilon);
      layers[l].bias.array() -=
          cfg.learning_rate * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + cfg.adam.epsilon);
    }
  }

  if (!net.all_finite())
    throw TrainingDivergenceError("training diverged: non-finite parameter after step " +
                                  std::to_string(step_));
}

void train_step(Mlp& net,
                std::span<const std::pair<Eigen::VectorXd, Eigen::VectorXd>> batch,
                const TrainConfig& cfg, OptState& state) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const int in = net.input_dim();
  const int out = net.output_dim();
  Eigen::MatrixXd x(in, batch.size());
  Eigen::MatrixXd dy(out, batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].first.size() != in || batch[i].second.size() != out)
      throw std::invalid_argument("train_step: batch dimension mismatch");
    x.col(static_cast<Eigen::Index>(i)) = batch[i].first;
    dy.col(static_cast<Eigen::Index>(i)) = batch[i].second;
  }
  ForwardTrace trace = forward_trace(net, x);
  Gradients grads = backward(net, trace, dy);
  scale_gradients(grads, 1.0 / static_cast<double>(batch.size()));
  state.apply(net, grads, cfg);
}

void save_mlp(const Mlp& net, const std::filesystem::path& path, const nlohmann::json& meta) {
  nlohmann::json header;
  std::vector<int> dims{net.input_dim()};
  std::vector<std::string> acts;
  for (const auto& l : net.layers()) {
    dims.push_back(static_cast<int>(l.weights.rows()));
    acts.push_back(activation_name(l.activation));
  }
  header["format"] = "gemnas-mlp-v1";
  header["dims"] = dims;
  header["activations"] = acts;
  if (!meta.is_null()) header["meta"] = meta;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_mlp: cannot open " + path.string());
  out << header.dump() << '\n';
  for (const auto& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
        double v = l.weights(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      double v = l.bias(r);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw std::runtime_error("save_mlp: write failed for " + path.string());
}

std::pair<Mlp, nlohmann::json> load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_mlp: cannot open " + path.string());
  std::string header_line;
  if (!std::getline(in, header_line)) throw std::runtime_error("load_mlp: missing header");
  nlohmann::json header = nlohmann::json::parse(header_line);
  if (header.value("format", "") != "gemnas-mlp-v1")
    throw std::runtime_error("load_mlp: unrecognized checkpoint format");

  std::vector<int> dims = header.at("dims").get<std::vector<int>>();
  std::vector<Activation> acts;
  for (const auto& a : header.at("activations")) acts.push_back(parse_activation(a));
  Mlp net(dims, acts);

  auto read_value = [&in, &path]() {
    double v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("load_mlp: truncated parameters in " + path.string());
    return v;
  };
  for (auto& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = read_value();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = read_value();
  }
  return {std::move(net), header.value("meta", nlohmann::json())};
}

}  // namespace gemnas
