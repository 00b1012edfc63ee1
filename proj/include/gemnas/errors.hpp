#pragma once

#include <stdexcept>
#include <string>

namespace gemnas {

// Configuration / usage problems. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Pruning removed every node reachable from the cell input.
class DegenerateCellError : public std::runtime_error {
 public:
  explicit DegenerateCellError(const std::string& what) : std::runtime_error(what) {}
};

// A graph hash is absent from a benchmark table.
class MissingArchitectureError : public std::runtime_error {
 public:
  explicit MissingArchitectureError(const std::string& what) : std::runtime_error(what) {}
};

// Network parameters became NaN/Inf during training.
class TrainingDivergenceError : public std::runtime_error {
 public:
  explicit TrainingDivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Cosine similarity requested on a (near-)zero vector.
class ZeroVectorError : public std::runtime_error {
 public:
  explicit ZeroVectorError(const std::string& what) : std::runtime_error(what) {}
};

// A statistic is undefined for the given input (all-tied ranks, zero variance).
class UndefinedStatisticError : public std::runtime_error {
 public:
  explicit UndefinedStatisticError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver ran out of iterations.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, long iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  long iterations() const { return iterations_; }

 private:
  long iterations_;
};

}  // namespace gemnas
