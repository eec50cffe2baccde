#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace emac {

/// A requested capability (quadrature degree, element type, ...) does not exist.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse factorization failed or produced an unusable solution.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::string diagnostic)
      : std::runtime_error(what + ": " + diagnostic), diagnostic_(std::move(diagnostic)) {}
  const std::string& diagnostic() const { return diagnostic_; }

 private:
  std::string diagnostic_;
};

/// Newton iteration hit its iteration cap.
class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  /// H1 norms of the successive Newton updates.
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace emac
