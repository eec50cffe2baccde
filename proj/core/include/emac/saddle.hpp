#pragma once

#include <memory>
#include <span>
#include <vector>

#include "emac/space.hpp"
#include "emac/sparse.hpp"

namespace emac {

struct DirichletValue {
  int dof;
  double value;
};

/// Blocked velocity-pressure system
///
///   [ A  -B^T  0 ] [u]   [rhs_u]
///   [ B   0    c ] [p] = [rhs_p]
///   [ 0   c^T  0 ] [l]   [  0  ]
///
/// where c holds the integrals of the pressure basis, so the multiplier l
/// pins the pressure mean to zero and absorbs any incompatibility of rhs_p.
struct SaddleSystem {
  SpacePtr space;
  SparseMatrix a;                   // velocity block
  SparseMatrix b;                   // pressure rows x velocity columns
  std::vector<double> mean_row;     // integrals of pressure basis functions
  std::vector<double> rhs_u;
  std::vector<double> rhs_p;
  std::vector<DirichletValue> dirichlet;
  bool dirichlet_applied = false;
};

/// Strong Dirichlet conditions by symmetric elimination: constrained rows of A
/// become identity rows with the prescribed value on the right-hand side and
/// the constrained columns of A and B are moved to the right-hand side.
/// Conflicting duplicate prescriptions throw std::invalid_argument.
SaddleSystem apply_dirichlet(SaddleSystem system);

struct SaddleSolution {
  FEFunction velocity;
  FEFunction pressure;
  double multiplier = 0.0;
  double relative_residual = 0.0;
};

/// Sparse direct solver (LU with fill-reducing column ordering). Reuses the
/// symbolic analysis while the sparsity pattern is unchanged. Not thread-safe;
/// use one instance per simulation.
class DirectSolver {
 public:
  DirectSolver();
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  /// Factorizes a square matrix; throws SolverError when singular.
  void factorize(const SparseMatrix& matrix);
  /// Solves with the last factorization, with iterative refinement against
  /// `matrix` until the relative residual is below 1e-13 (at most 3 sweeps).
  std::vector<double> solve(const SparseMatrix& matrix, std::span<const double> rhs, double* relative_residual = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot sparse direct solve.
std::vector<double> solve_sparse(const SparseMatrix& matrix, std::span<const double> rhs);

/// Solves saddle systems, caching the assembled block pattern and the
/// symbolic factorization between calls.
class SaddleSolver {
 public:
  /// Applies pending Dirichlet conditions, solves, and checks the algebraic
  /// residual (<= 1e-11 relative) before returning.
  SaddleSolution solve(const SaddleSystem& system);

 private:
  SparseMatrix global_;
  DirectSolver direct_;
};

/// Convenience wrapper around a fresh SaddleSolver.
SaddleSolution solve(const SaddleSystem& system);

}  // namespace emac
