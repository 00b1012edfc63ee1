#include "gemnas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "gemnas/errors.hpp"
#include "gemnas/rng.hpp"

namespace gemnas {

namespace {

// Counts strict inversions of `values` with merge sort.
std::int64_t count_inversions(std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> buffer(n);
  std::int64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(n, mid + width);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (values[b] < values[a]) {
          inversions += static_cast<std::int64_t>(mid - a);
          buffer[out++] = values[b++];
        } else {
          buffer[out++] = values[a++];
        }
      }
      while (a < mid) buffer[out++] = values[a++];
      while (b < hi) buffer[out++] = values[b++];
      std::copy(buffer.begin() + lo, buffer.begin() + hi, values.begin() + lo);
    }
  }
  return inversions;
}

std::int64_t tie_pair_count(std::int64_t run) { return run * (run - 1) / 2; }

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("kendall_tau: length mismatch");
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least 2 observations");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  const std::int64_t n0 = static_cast<std::int64_t>(n) * (n - 1) / 2;

  // Tie pair counts: x ties (n1), joint ties (n3) from the (x, y)-sorted order,
  // y ties (n2) from a y-sorted pass.
  std::int64_t n1 = 0, n3 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    n1 += tie_pair_count(static_cast<std::int64_t>(j - i));
    for (std::size_t a = i; a < j;) {
      std::size_t b = a;
      while (b < j && y[order[b]] == y[order[a]]) ++b;
      n3 += tie_pair_count(static_cast<std::int64_t>(b - a));
      a = b;
    }
    i = j;
  }

  std::vector<double> y_sorted(y.begin(), y.end());
  std::sort(y_sorted.begin(), y_sorted.end());
  std::int64_t n2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && y_sorted[j] == y_sorted[i]) ++j;
    n2 += tie_pair_count(static_cast<std::int64_t>(j - i));
    i = j;
  }

  if (n0 == n1 || n0 == n2)
    throw UndefinedStatisticError("kendall_tau: all observations tied in one list");

  // y in x-sorted order; strict inversions are exactly the discordant pairs.
  std::vector<double> y_in_x_order(n);
  for (std::size_t i = 0; i < n; ++i) y_in_x_order[i] = y[order[i]];
  const std::int64_t discordant = count_inversions(y_in_x_order);

  const std::int64_t con_minus_dis = n0 - n1 - n2 + n3 - 2 * discordant;
  return static_cast<double>(con_minus_dis) /
         std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (n < 2) throw std::invalid_argument("pearson: need at least 2 observations");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedStatisticError("pearson: zero variance input");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

constexpr double kPowerTolerance = 1e-10;
constexpr int kPowerMaxIterations = 10000;

// Deterministic start vector; any fixed seed works, it only needs a nonzero
// projection onto the dominant eigenvector.
Eigen::VectorXd start_vector(int d) {
  Rng rng(0x5deece66dull);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.next_uniform(-1.0, 1.0);
  if (v.norm() == 0.0) v(0) = 1.0;
  return v / v.norm();
}

void orthogonalize(Eigen::VectorXd& v, const Eigen::MatrixXd& components, int found) {
  for (int c = 0; c < found; ++c) v -= components.col(c).dot(v) * components.col(c);
}

// Deterministic unit vector orthogonal to the found components, for
// zero-variance residual directions.
Eigen::VectorXd null_direction(const Eigen::MatrixXd& components, int found) {
  const int d = static_cast<int>(components.rows());
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(d, i);
    orthogonalize(v, components, found);
    if (v.norm() > 1e-6) return v / v.norm();
  }
  throw std::logic_error("pca: no orthogonal direction left");
}

}  // namespace

PcaResult pca_project(const std::vector<Eigen::VectorXd>& vectors, int k) {
  if (vectors.empty()) throw std::invalid_argument("pca_project: empty input");
  const int d = static_cast<int>(vectors[0].size());
  const int m = static_cast<int>(vectors.size());
  if (k < 1 || k > d) throw std::invalid_argument("pca_project: need 1 <= k <= d");
  if (m < k + 1) throw std::invalid_argument("pca_project: need at least k+1 vectors");
  for (const auto& v : vectors)
    if (v.size() != d) throw std::invalid_argument("pca_project: inconsistent dimensions");

  PcaResult result;
  result.mean = Eigen::VectorXd::Zero(d);
  for (const auto& v : vectors) result.mean += v;
  result.mean /= static_cast<double>(m);

  Eigen::MatrixXd centered(m, d);
  for (int i = 0; i < m; ++i) centered.row(i) = (vectors[i] - result.mean).transpose();

  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(m - 1);
  const double total_variance = cov.trace();
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());

  result.components = Eigen::MatrixXd::Zero(d, k);
  result.eigenvalues = Eigen::VectorXd::Zero(k);

  Eigen::MatrixXd residual = cov;
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd v = start_vector(d);
    orthogonalize(v, result.components, c);
    if (v.norm() < 1e-12) v = null_direction(result.components, c);
    v.normalize();

    double eigenvalue = 0.0;
    bool converged = false;
    for (int iter = 0; iter < kPowerMaxIterations; ++iter) {
      Eigen::VectorXd w = residual * v;
      orthogonalize(w, result.components, c);
      const double norm = w.norm();
      if (norm <= 1e-14 * scale) {
        // Residual is numerically zero along every remaining direction.
        v = null_direction(result.components, c);
        eigenvalue = 0.0;
        converged = true;
        break;
      }
      w /= norm;
      if (w.dot(v) < 0.0) w = -w;
      const double delta = (w - v).cwiseAbs().maxCoeff();
      v = w;
      if (delta < kPowerTolerance) {
        eigenvalue = v.dot(residual * v);
        converged = true;
        break;
      }
    }
    if (!converged)
      throw ConvergenceError("pca_project: power iteration did not converge for component " +
                                 std::to_string(c),
                             kPowerMaxIterations);

    // Sign rule: largest-magnitude entry positive.
    Eigen::Index max_idx;
    v.cwiseAbs().maxCoeff(&max_idx);
    if (v(max_idx) < 0.0) v = -v;

    result.components.col(c) = v;
    result.eigenvalues(c) = std::max(0.0, eigenvalue);
    residual -= eigenvalue * v * v.transpose();
  }

  result.projected = centered * result.components;
  result.explained_variance_shares.resize(k);
  for (int c = 0; c < k; ++c)
    result.explained_variance_shares[c] =
        total_variance > 0.0 ? result.eigenvalues(c) / total_variance : 0.0;
  return result;
}

}  // namespace gemnas
