#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace gemnas {

struct CorrelationReport {
  double kendall_tau = 0.0;
  double pearson_r = 0.0;
  int n_pairs = 0;
};

// Tie-corrected Kendall tau-b via merge-sort inversion counting,
// O(n log n). Throws UndefinedStatisticError when either list is all-tied.
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Sample Pearson correlation. Throws UndefinedStatisticError on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct PcaResult {
  Eigen::MatrixXd projected;          // m x k, row per input vector
  Eigen::MatrixXd components;         // d x k, orthonormal columns
  Eigen::VectorXd eigenvalues;        // k, descending
  std::vector<double> explained_variance_shares;  // eigenvalue_i / total variance
  Eigen::VectorXd mean;               // d
};

// Mean-centered projection onto the top-k covariance eigenvectors, computed by
// power iteration with deflation (tolerance 1e-10, at most 10^4 iterations per
// component; ConvergenceError on failure). Each component's sign is fixed so
// its largest-magnitude entry is positive.
PcaResult pca_project(const std::vector<Eigen::VectorXd>& vectors, int k);

}  // namespace gemnas
