#include "gemnas/encoder.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gemnas/errors.hpp"
#include "gemnas/parallel.hpp"

namespace gemnas {

namespace {

constexpr double kZeroNormThreshold = 1e-12;
// Added to both norms inside the training-path cosine so gradients stay finite
// even when an embedding collapses to zero.
constexpr double kTrainNormFloor = 1e-6;

int onehot_index(const std::vector<OpKind>& vocab, OpKind op) {
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (vocab[i] == op) return static_cast<int>(i);
  throw std::invalid_argument("encoder: op '" + op.to_string() + "' not in bundle vocabulary");
}

}  // namespace

int EncoderBundle::input_dim() const {
  return flat_dim() + (use_op_onehots ? n * static_cast<int>(op_vocab.size()) : 0);
}

Eigen::VectorXd EncoderBundle::encode_input(const Dag& dag) const {
  if (dag.node_count() != n)
    throw std::invalid_argument("encoder: graph has " + std::to_string(dag.node_count()) +
                                " nodes, bundle expects " + std::to_string(n));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(input_dim());
  std::vector<double> flat = flatten_upper_triangle(dag);
  for (std::size_t k = 0; k < flat.size(); ++k) x(static_cast<Eigen::Index>(k)) = flat[k];
  if (use_op_onehots) {
    const int vocab = static_cast<int>(op_vocab.size());
    for (int v = 0; v < n; ++v)
      x(flat_dim() + v * vocab + onehot_index(op_vocab, dag.op(v))) = 1.0;
  }
  return x;
}

double cosine_similarity(const GraphVector& a, const GraphVector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double na = a.norm();
  double nb = b.norm();
  if (na < kZeroNormThreshold || nb < kZeroNormThreshold)
    throw ZeroVectorError("cosine_similarity: vector norm below 1e-12");
  return a.dot(b) / (na * nb);
}

double similarity_loss(const Dag& ga, const Dag& gb, const EncoderBundle& bundle) {
  double se = cosine_similarity(embed(ga, bundle), embed(gb, bundle));
  double sg = wl_similarity(ga, gb, bundle.wl_cfg);
  return similarity_loss_value(se, sg);
}

double reconstruction_loss(const Dag& dag, const EncoderBundle& bundle) {
  Eigen::VectorXd x = bundle.encode_input(dag);
  Eigen::VectorXd reconstructed = bundle.decoder.forward(bundle.encoder.forward(x));
  Eigen::VectorXd target = x.head(bundle.flat_dim());
  return (reconstructed - target).squaredNorm() / static_cast<double>(bundle.flat_dim());
}

GraphVector embed(const Dag& dag, const EncoderBundle& bundle) {
  return bundle.encoder.forward(bundle.encode_input(dag));
}

GraphVector prediction_features(const Dag& dag, const EncoderBundle& bundle) {
  GraphVector g = embed(dag, bundle);
  if (bundle.unit_normalize) {
    double norm = g.norm();
    if (norm > 1e-12) g /= norm;
  }
  return g;
}

int prediction_feature_dim(const EncoderBundle& bundle) { return bundle.d; }

std::pair<Dag, Dag> sample_training_pair(const EncoderTrainOptions& options, Rng& rng) {
  auto base_draw = [&options](Rng& r) {
    if (options.base_sampler) return options.base_sampler(r);
    double p = r.next_uniform(options.edge_prob_range.first, options.edge_prob_range.second);
    return random_dag_from(r, options.n, p, options.palette);
  };

  Dag a = base_draw(rng);
  const double kind = rng.next_unit();
  if (kind < options.pair_permute_prob) return {a, random_topological_relabel(a, rng)};
  if (kind < options.pair_permute_prob + options.pair_perturb_prob) {
    double flip = rng.next_uniform(options.perturb_flip_range.first,
                                   options.perturb_flip_range.second);
    Dag edited = a;
    for (int i = 0; i < options.n; ++i)
      for (int j = i + 1; j < options.n; ++j)
        if (rng.next_bernoulli(flip)) {
          if (edited.has_edge(i, j))
            edited.remove_edge(i, j);
          else
            edited.add_edge(i, j);
        }
    std::vector<OpKind> ops = edited.ops();
    for (int v = 0; v < options.n; ++v)
      if (rng.next_bernoulli(flip))
        ops[v] = options.palette[rng.next_index(options.palette.size())];
    Dag perturbed(options.n, std::move(ops));
    for (auto [x, y] : edited.edges()) perturbed.add_edge(x, y);
    return {std::move(a), std::move(perturbed)};
  }
  Dag b = base_draw(rng);
  return {std::move(a), std::move(b)};
}

EncoderTrainResult train_encoder(const EncoderTrainOptions& options) {
  if (options.pair_count < 1)
    throw std::invalid_argument("train_encoder: pair_count must be >= 1");
  if (options.n < 2) throw std::invalid_argument("train_encoder: n must be >= 2");
  if (options.d < 1) throw std::invalid_argument("train_encoder: d must be >= 1");
  if (options.train.batch_size < 1 || options.train.iterations < 1 ||
      options.train.learning_rate <= 0.0)
    throw std::invalid_argument("train_encoder: bad train config");

  EncoderBundle bundle;
  bundle.n = options.n;
  bundle.d = options.d;
  bundle.wl_cfg = options.wl;
  bundle.use_op_onehots = options.use_op_onehots;
  bundle.op_vocab = options.use_op_onehots ? options.op_vocab : std::vector<OpKind>{};
  if (options.use_op_onehots && bundle.op_vocab.empty())
    throw std::invalid_argument("train_encoder: op one-hots requested with empty vocabulary");

  const int flat_dim = bundle.flat_dim();
  const int input_dim = bundle.input_dim();

  std::vector<int> enc_dims{input_dim};
  std::vector<Activation> enc_acts;
  for (int hdim : options.hidden) {
    enc_dims.push_back(hdim);
    enc_acts.push_back(Activation::ReLU);
  }
  enc_dims.push_back(options.d);
  enc_acts.push_back(Activation::Identity);

  std::vector<int> dec_dims{options.d};
  std::vector<Activation> dec_acts;
  for (auto it = options.hidden.rbegin(); it != options.hidden.rend(); ++it) {
    dec_dims.push_back(*it);
    dec_acts.push_back(Activation::ReLU);
  }
  dec_dims.push_back(flat_dim);
  dec_acts.push_back(Activation::Sigmoid);

  const std::uint64_t seed = options.train.rng_seed;
  bundle.encoder = Mlp::xavier(enc_dims, enc_acts, mix_seed(seed, "encoder-init"));
  bundle.decoder = Mlp::xavier(dec_dims, dec_acts, mix_seed(seed, "decoder-init"));

  // Pair corpus: graphs drawn up front, WL targets computed in parallel.
  Rng pair_rng(mix_seed(seed, "pair-sampling"));
  std::vector<Dag> left, right;
  left.reserve(options.pair_count);
  right.reserve(options.pair_count);
  for (int k = 0; k < options.pair_count; ++k) {
    if (options.sampler) {
      left.push_back(options.sampler(pair_rng));
      right.push_back(options.sampler(pair_rng));
    } else {
      auto [a, b] = sample_training_pair(options, pair_rng);
      left.push_back(std::move(a));
      right.push_back(std::move(b));
    }
  }

  std::vector<double> targets(options.pair_count);
  WlConfig wl = options.wl;
  parallel_for(static_cast<std::size_t>(options.pair_count), options.workers,
               [&](std::size_t k) { targets[k] = wl_similarity(left[k], right[k], wl); });

  Eigen::MatrixXd inputs_left(input_dim, options.pair_count);
  Eigen::MatrixXd inputs_right(input_dim, options.pair_count);
  for (int k = 0; k < options.pair_count; ++k) {
    inputs_left.col(k) = bundle.encode_input(left[k]);
    inputs_right.col(k) = bundle.encode_input(right[k]);
  }

  OptState enc_state(bundle.encoder);
  OptState dec_state(bundle.decoder);
  Rng batch_rng(mix_seed(seed, "batch-stream"));

  EncoderTrainResult result;
  const int batch = std::min(options.train.batch_size, options.pair_count);
  double window_sim = 0.0, window_rec = 0.0;
  int window_batches = 0;

  for (int iter = 1; iter <= options.train.iterations; ++iter) {
    Eigen::MatrixXd xi(input_dim, batch), xj(input_dim, batch);
    Eigen::VectorXd s(batch);
    for (int b = 0; b < batch; ++b) {
      std::size_t k = batch_rng.next_index(static_cast<std::size_t>(options.pair_count));
      xi.col(b) = inputs_left.col(static_cast<Eigen::Index>(k));
      xj.col(b) = inputs_right.col(static_cast<Eigen::Index>(k));
      s(b) = targets[k];
    }

    ForwardTrace enc_i = forward_trace(bundle.encoder, xi);
    ForwardTrace enc_j = forward_trace(bundle.encoder, xj);
    const Eigen::MatrixXd& gi = enc_i.output();
    const Eigen::MatrixXd& gj = enc_j.output();

    ForwardTrace dec_i = forward_trace(bundle.decoder, gi);
    ForwardTrace dec_j = forward_trace(bundle.decoder, gj);

    const Eigen::MatrixXd fi = xi.topRows(flat_dim);
    const Eigen::MatrixXd fj = xj.topRows(flat_dim);
    Eigen::MatrixXd rec_err_i = dec_i.output() - fi;
    Eigen::MatrixXd rec_err_j = dec_j.output() - fj;

    // Reconstruction path.
    const double m = static_cast<double>(flat_dim);
    Gradients dec_grad_i = backward(bundle.decoder, dec_i, (2.0 / m) * rec_err_i);
    Gradients dec_grad_j = backward(bundle.decoder, dec_j, (2.0 / m) * rec_err_j);

    Eigen::MatrixXd dgi = dec_grad_i.input_grad;
    Eigen::MatrixXd dgj = dec_grad_j.input_grad;

    // Similarity path, per batch column.
    double batch_sim_loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      const Eigen::VectorXd gi_b = gi.col(b);
      const Eigen::VectorXd gj_b = gj.col(b);
      const double ni_raw = gi_b.norm();
      const double nj_raw = gj_b.norm();
      const double ni = ni_raw + kTrainNormFloor;
      const double nj = nj_raw + kTrainNormFloor;
      const double se = gi_b.dot(gj_b) / (ni * nj);
      const double diff = se - s(b);
      batch_sim_loss += diff * diff;
      if (options.kernel_guided) {
        Eigen::VectorXd dse_dgi = gj_b / (ni * nj);
        Eigen::VectorXd dse_dgj = gi_b / (ni * nj);
        if (ni_raw > 0.0) dse_dgi -= (se / (ni * ni_raw)) * gi_b;
        if (nj_raw > 0.0) dse_dgj -= (se / (nj * nj_raw)) * gj_b;
        dgi.col(b) += 2.0 * diff * dse_dgi;
        dgj.col(b) += 2.0 * diff * dse_dgj;
      }
    }

    Gradients enc_grad = backward(bundle.encoder, enc_i, dgi);
    accumulate(enc_grad, backward(bundle.encoder, enc_j, dgj));
    accumulate(dec_grad_i, dec_grad_j);

    const double inv_batch = 1.0 / static_cast<double>(batch);
    scale_gradients(enc_grad, inv_batch);
    scale_gradients(dec_grad_i, inv_batch);
    enc_state.apply(bundle.encoder, enc_grad, options.train);
    dec_state.apply(bundle.decoder, dec_grad_i, options.train);

    window_sim += batch_sim_loss * inv_batch;
    window_rec += (rec_err_i.squaredNorm() + rec_err_j.squaredNorm()) / m * inv_batch;
    ++window_batches;

    if (iter % options.checkpoint_every == 0 || iter == options.train.iterations) {
      LossCheckpoint cp;
      cp.iteration = iter;
      cp.similarity_loss = window_sim / window_batches;
      cp.reconstruction_loss = window_rec / window_batches;
      cp.total_loss = cp.similarity_loss + cp.reconstruction_loss;
      result.history.push_back(cp);
      window_sim = window_rec = 0.0;
      window_batches = 0;
    }
  }

  result.bundle = std::move(bundle);
  return result;
}

void save_bundle(const EncoderBundle& bundle, const std::filesystem::path& dir,
                 const nlohmann::json& extra_meta) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "gemnas-encoder-v1";
  manifest["n"] = bundle.n;
  manifest["d"] = bundle.d;
  manifest["wl"] = {{"h", bundle.wl_cfg.h},
                    {"use_ops_as_initial_labels", bundle.wl_cfg.use_ops_as_initial_labels}};
  manifest["use_op_onehots"] = bundle.use_op_onehots;
  manifest["unit_normalize"] = bundle.unit_normalize;
  auto& vocab = manifest["op_vocab"] = nlohmann::json::array();
  for (const auto& op : bundle.op_vocab) vocab.push_back(op.to_string());
  manifest["encoder_file"] = "encoder.mlp";
  manifest["decoder_file"] = "decoder.mlp";
  if (!extra_meta.is_null()) manifest["meta"] = extra_meta;

  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("save_bundle: cannot write manifest in " + dir.string());
  mf << manifest.dump(2) << '\n';

  save_mlp(bundle.encoder, dir / "encoder.mlp", nlohmann::json());
  save_mlp(bundle.decoder, dir / "decoder.mlp", nlohmann::json());
}

EncoderBundle load_bundle(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("load_bundle: cannot open manifest in " + dir.string());
  nlohmann::json manifest = nlohmann::json::parse(mf);
  if (manifest.value("format", "") != "gemnas-encoder-v1")
    throw std::runtime_error("load_bundle: unrecognized bundle format");

  EncoderBundle bundle;
  bundle.n = manifest.at("n").get<int>();
  bundle.d = manifest.at("d").get<int>();
  bundle.wl_cfg.h = manifest.at("wl").at("h").get<int>();
  bundle.wl_cfg.use_ops_as_initial_labels =
      manifest.at("wl").at("use_ops_as_initial_labels").get<bool>();
  bundle.use_op_onehots = manifest.at("use_op_onehots").get<bool>();
  bundle.unit_normalize = manifest.value("unit_normalize", true);
  for (const auto& s : manifest.at("op_vocab"))
    bundle.op_vocab.push_back(OpKind::parse(s.get<std::string>()));

  bundle.encoder = load_mlp(dir / manifest.at("encoder_file").get<std::string>()).first;
  bundle.decoder = load_mlp(dir / manifest.at("decoder_file").get<std::string>()).first;
  if (bundle.encoder.input_dim() != bundle.input_dim() ||
      bundle.encoder.output_dim() != bundle.d || bundle.decoder.input_dim() != bundle.d ||
      bundle.decoder.output_dim() != bundle.flat_dim())
    throw std::runtime_error("load_bundle: checkpoint dimensions are inconsistent");
  return bundle;
}

}  // namespace gemnas
