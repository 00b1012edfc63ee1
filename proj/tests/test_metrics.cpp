#include <doctest.h>

#include <cmath>
#include <vector>

#include "gemnas/errors.hpp"
#include "gemnas/metrics.hpp"
#include "gemnas/rng.hpp"

using namespace gemnas;

namespace {

// Independent O(n^2) pair-counting tau-b oracle.
double brute_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long long concordant = 0, discordant = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = x[i] - x[j];
      double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++tx;
      } else if (dy == 0.0) {
        ++ty;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  double denom_x = static_cast<double>(concordant + discordant + tx);
  double denom_y = static_cast<double>(concordant + discordant + ty);
  return static_cast<double>(concordant - discordant) / std::sqrt(denom_x * denom_y);
}

double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double num = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return num / std::sqrt(vx * vy);
}

}  // namespace

TEST_CASE("kendall tau on the textbook cases") {
  std::vector<double> inc = {1, 2, 3, 4, 5};
  std::vector<double> dec = {5, 4, 3, 2, 1};
  CHECK(kendall_tau(inc, inc) == 1.0);
  CHECK(kendall_tau(inc, dec) == -1.0);

  std::vector<double> x = {1, 2, 3};
  std::vector<double> y = {1, 3, 2};
  CHECK(kendall_tau(x, y) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("kendall tau rejects degenerate inputs") {
  std::vector<double> tied = {2, 2, 2};
  std::vector<double> vary = {1, 2, 3};
  CHECK_THROWS_AS(kendall_tau(tied, vary), UndefinedStatisticError);
  CHECK_THROWS_AS(kendall_tau(vary, tied), UndefinedStatisticError);
  std::vector<double> a = {1, 2}, b = {1};
  CHECK_THROWS_AS(kendall_tau(a, b), std::invalid_argument);
}

TEST_CASE("pearson on the textbook cases") {
  std::vector<double> x = {0, 1, 2, 3, 4};
  std::vector<double> affine, negated;
  for (double v : x) {
    affine.push_back(2.0 * v + 1.0);
    negated.push_back(-v);
  }
  CHECK(pearson(x, affine) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pearson(x, negated) == doctest::Approx(-1.0).epsilon(1e-14));

  std::vector<double> constant = {3, 3, 3, 3, 3};
  CHECK_THROWS_AS(pearson(x, constant), UndefinedStatisticError);
}

TEST_CASE("both statistics match brute-force oracles on random data") {
  Rng rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng.next_index(60));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      // Quantized draws inject ties.
      x[i] = std::floor(rng.next_uniform(0, 8));
      y[i] = std::floor(rng.next_uniform(0, 8)) + 0.25 * x[i];
    }
    double tau, r;
    try {
      tau = kendall_tau(x, y);
      r = pearson(x, y);
    } catch (const UndefinedStatisticError&) {
      continue;  // all-tied draw
    }
    CHECK(tau == doctest::Approx(brute_tau_b(x, y)).epsilon(1e-10));
    CHECK(r == doctest::Approx(brute_pearson(x, y)).epsilon(1e-10));
  }
}

TEST_CASE("tau is invariant under strictly increasing transforms") {
  Rng rng(73);
  std::vector<double> x(40), y(40), fx(40), gy(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = rng.next_uniform(-3, 3);
    y[i] = rng.next_uniform(-3, 3);
    fx[i] = std::exp(x[i]);        // strictly increasing
    gy[i] = 5.0 * y[i] + 2.0;      // strictly increasing
  }
  CHECK(kendall_tau(fx, gy) == doctest::Approx(kendall_tau(x, y)).epsilon(1e-12));
  CHECK(kendall_tau(x, y) == doctest::Approx(kendall_tau(y, x)).epsilon(1e-12));
}

TEST_CASE("pca aligns with the dominant axis") {
  std::vector<Eigen::VectorXd> points;
  for (int i = -5; i <= 5; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
    v(0) = static_cast<double>(i);
    points.push_back(v);
  }
  PcaResult pca = pca_project(points, 1);
  CHECK(std::abs(pca.components(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(pca.components(0, 0) > 0.0);  // sign rule
  CHECK(pca.explained_variance_shares[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("full-rank projection preserves pairwise distances") {
  Rng rng(79);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 60; ++i) {
    Eigen::VectorXd v(4);
    for (int k = 0; k < 4; ++k) v(k) = rng.next_uniform(-2, 2);
    points.push_back(v);
  }
  PcaResult pca = pca_project(points, 4);
  for (int i = 0; i < 20; ++i) {
    int a = static_cast<int>(rng.next_index(points.size()));
    int b = static_cast<int>(rng.next_index(points.size()));
    double original = (points[a] - points[b]).norm();
    double projected = (pca.projected.row(a) - pca.projected.row(b)).norm();
    CHECK(projected == doctest::Approx(original).epsilon(1e-8));
  }
}

TEST_CASE("projection plus reconstruction recovers centered inputs") {
  Rng rng(83);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd v(3);
    for (int k = 0; k < 3; ++k) v(k) = rng.next_uniform(-1, 1);
    points.push_back(v);
  }
  PcaResult pca = pca_project(points, 3);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd centered = points[i] - pca.mean;
    Eigen::VectorXd rebuilt = pca.components * pca.projected.row(i).transpose();
    CHECK((rebuilt - centered).norm() < 1e-8);
  }
}

TEST_CASE("isotropic clouds split variance roughly evenly") {
  Rng rng(89);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd v(3);
    for (int k = 0; k < 3; ++k) v(k) = rng.next_gaussian();
    points.push_back(v);
  }
  PcaResult pca = pca_project(points, 3);
  for (double share : pca.explained_variance_shares) {
    CHECK(share > 0.28);
    CHECK(share < 0.39);
  }
}

TEST_CASE("pca validates its inputs") {
  std::vector<Eigen::VectorXd> two = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)};
  CHECK_THROWS_AS(pca_project(two, 2), std::invalid_argument);  // need k+1 vectors
  CHECK_THROWS_AS(pca_project(two, 0), std::invalid_argument);
  CHECK_THROWS_AS(pca_project(two, 4), std::invalid_argument);
}
