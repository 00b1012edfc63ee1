#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "gemnas/encoder.hpp"
#include "gemnas/errors.hpp"
#include "support/test_helpers.hpp"

using namespace gemnas;
using gemnas::testing::chain;
using gemnas::testing::make_dag;

namespace {

// Minimal bundle whose encoder maps any graph to a fixed nonzero vector and
// whose decoder is parameter-controlled; enough to exercise the loss surfaces.
EncoderBundle stub_bundle(int n, int d) {
  EncoderBundle bundle;
  bundle.n = n;
  bundle.d = d;
  bundle.encoder = Mlp({n * (n - 1) / 2, d}, {Activation::Identity});
  bundle.encoder.layers()[0].bias.setConstant(0.5);
  bundle.decoder = Mlp({d, n * (n - 1) / 2}, {Activation::Sigmoid});
  return bundle;
}

EncoderTrainOptions tiny_options(std::uint64_t seed) {
  EncoderTrainOptions opt;
  opt.pair_count = 200;
  opt.n = 5;
  opt.d = 8;
  opt.hidden = {32};
  opt.train.iterations = 200;
  opt.train.batch_size = 16;
  opt.train.rng_seed = seed;
  opt.wl.h = 2;
  opt.checkpoint_every = 50;
  return opt;
}

}  // namespace

TEST_CASE("cosine similarity basics") {
  Eigen::VectorXd v(3);
  v << 1.0, -2.0, 0.5;
  CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cosine_similarity(v, (-v).eval()) == doctest::Approx(-1.0).epsilon(1e-14));

  Eigen::VectorXd ex(2), ey(2);
  ex << 1.0, 0.0;
  ey << 0.0, 1.0;
  CHECK(cosine_similarity(ex, ey) == 0.0);
}

TEST_CASE("cosine similarity is scale-invariant to 1e-12") {
  Eigen::VectorXd a(4), b(4);
  a << 0.3, -1.2, 2.0, 0.7;
  b << -0.5, 0.4, 1.1, -2.2;
  double base = cosine_similarity(a, b);
  for (double alpha : {1e-6, 0.5, 3.0, 1e6})
    CHECK(std::abs(cosine_similarity((alpha * a).eval(), b) - base) < 1e-12);
}

TEST_CASE("cosine similarity rejects near-zero vectors") {
  Eigen::VectorXd z = Eigen::VectorXd::Constant(3, 1e-13);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(cosine_similarity(z, v), ZeroVectorError);
  CHECK_THROWS_AS(cosine_similarity(v, z), ZeroVectorError);
}

TEST_CASE("similarity loss evaluates the squared gap") {
  CHECK(similarity_loss_value(0.2, 0.7) == doctest::Approx(0.25).epsilon(1e-15));

  EncoderBundle bundle = stub_bundle(4, 3);
  Dag dag = chain(4);
  CHECK(similarity_loss(dag, dag, bundle) == doctest::Approx(0.0).epsilon(1e-20));

  Dag other = make_dag(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(similarity_loss(dag, other, bundle) ==
        doctest::Approx(similarity_loss(other, dag, bundle)).epsilon(1e-14));
}

TEST_CASE("similarity loss rejects node-count mismatches") {
  EncoderBundle bundle = stub_bundle(4, 3);
  CHECK_THROWS_AS(similarity_loss(chain(4), chain(5), bundle), std::invalid_argument);
  CHECK_THROWS_AS(embed(chain(5), bundle), std::invalid_argument);
}

TEST_CASE("reconstruction loss hits zero when the decoder saturates correctly") {
  EncoderBundle bundle = stub_bundle(4, 3);
  Dag dag = make_dag(4, {{0, 1}, {1, 3}, {2, 3}});
  std::vector<double> flat = flatten_upper_triangle(dag);
  // Saturated sigmoid: +-800 maps to exactly 1.0 / 0.0 in double precision.
  for (std::size_t k = 0; k < flat.size(); ++k)
    bundle.decoder.layers()[0].bias(static_cast<Eigen::Index>(k)) = flat[k] > 0.5 ? 800.0 : -800.0;
  CHECK(reconstruction_loss(dag, bundle) == 0.0);
}

TEST_CASE("constant half decoder on an empty adjacency scores 0.25") {
  EncoderBundle bundle = stub_bundle(4, 3);  // zero decoder weights: sigmoid(0) = 0.5
  Dag empty(4, OpKind::conv1x1());
  CHECK(reconstruction_loss(empty, bundle) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("reconstruction loss is bounded by one") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    EncoderBundle bundle = stub_bundle(5, 4);
    bundle.encoder = Mlp::xavier({10, 4}, {Activation::Identity}, rng.next_u64());
    bundle.decoder = Mlp::xavier({4, 10}, {Activation::Sigmoid}, rng.next_u64());
    Dag dag = random_dag(5, 0.5, std::vector<OpKind>{OpKind::conv1x1()}, rng.next_u64());
    double loss = reconstruction_loss(dag, bundle);
    CHECK(loss >= 0.0);
    CHECK(loss <= 1.0);
  }
}

TEST_CASE("embed is deterministic with the right shape") {
  EncoderTrainOptions opt = tiny_options(42);
  EncoderBundle bundle = train_encoder(opt).bundle;
  Dag dag = random_dag(5, 0.5, opt.palette, 77);
  GraphVector a = embed(dag, bundle);
  GraphVector b = embed(dag, bundle);
  CHECK(a.size() == 8);
  CHECK(a == b);
}

TEST_CASE("train_encoder is deterministic and records history") {
  EncoderTrainResult r1 = train_encoder(tiny_options(7));
  EncoderTrainResult r2 = train_encoder(tiny_options(7));
  CHECK(r1.bundle.encoder == r2.bundle.encoder);
  CHECK(r1.bundle.decoder == r2.bundle.decoder);
  CHECK(r1.history.size() == 4);  // 200 iterations / checkpoint_every 50
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].similarity_loss == r2.history[i].similarity_loss);
    CHECK(std::isfinite(r1.history[i].total_loss));
  }

  EncoderTrainResult r3 = train_encoder(tiny_options(8));
  CHECK_FALSE(r1.bundle.encoder == r3.bundle.encoder);
}

TEST_CASE("training reduces both loss terms on a tiny run") {
  EncoderTrainOptions opt = tiny_options(21);
  opt.train.iterations = 800;
  EncoderTrainResult result = train_encoder(opt);
  const auto& first = result.history.front();
  const auto& last = result.history.back();
  CHECK(last.similarity_loss < first.similarity_loss);
  CHECK(last.reconstruction_loss < first.reconstruction_loss);
}

TEST_CASE("op one-hot inputs extend the encoder input") {
  EncoderTrainOptions opt = tiny_options(33);
  opt.use_op_onehots = true;
  opt.op_vocab = opt.palette;
  EncoderBundle bundle = train_encoder(opt).bundle;
  CHECK(bundle.input_dim() == 10 + 5 * 2);
  Dag dag = random_dag(5, 0.5, opt.palette, 3);
  CHECK(embed(dag, bundle).size() == 8);

  // Same structure, different ops: inputs differ only in the one-hot block.
  Dag conv = chain(5, OpKind::conv1x1());
  Dag dws = chain(5, OpKind::dwsep3x3());
  CHECK(bundle.encode_input(conv).head(10) == bundle.encode_input(dws).head(10));
  CHECK(bundle.encode_input(conv) != bundle.encode_input(dws));
}

TEST_CASE("bundle checkpoints round-trip") {
  EncoderBundle bundle = train_encoder(tiny_options(55)).bundle;
  auto dir = std::filesystem::temp_directory_path() / "gemnas_test_bundle";
  std::filesystem::remove_all(dir);
  save_bundle(bundle, dir, nlohmann::json{{"seed", 55}});
  EncoderBundle loaded = load_bundle(dir);
  CHECK(loaded.encoder == bundle.encoder);
  CHECK(loaded.decoder == bundle.decoder);
  CHECK(loaded.n == bundle.n);
  CHECK(loaded.d == bundle.d);
  CHECK(loaded.wl_cfg.h == bundle.wl_cfg.h);
  Dag dag = random_dag(5, 0.4, std::vector<OpKind>{OpKind::conv1x1()}, 9);
  CHECK(embed(dag, loaded) == embed(dag, bundle));
  std::filesystem::remove_all(dir);
}
