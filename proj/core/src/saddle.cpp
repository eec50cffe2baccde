#include "emac/saddle.hpp"

#include <Eigen/Sparse>
#ifdef EMAC_HAVE_UMFPACK
#include <umfpack.h>

#include "umfpack_loader.hpp"
#endif

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "emac/errors.hpp"

namespace emac {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

ColMatrix to_eigen(const SparseMatrix& m) {
  Eigen::Map<const RowMatrix> view(m.rows(), m.cols(), m.nnz(), m.row_offsets().data(), m.col_indices().data(),
                                   m.values().data());
  return ColMatrix(view);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

class LuFactorization {
 public:
  virtual ~LuFactorization() = default;
  virtual void analyze(const ColMatrix& m) = 0;
  virtual void factorize(const ColMatrix& m) = 0;
  virtual Eigen::VectorXd solve(const Eigen::VectorXd& b) = 0;
};

class EigenLu final : public LuFactorization {
 public:
  void analyze(const ColMatrix& m) override { lu_.analyzePattern(m); }
  void factorize(const ColMatrix& m) override {
    lu_.factorize(m);
    if (lu_.info() != Eigen::Success) throw SolverError("sparse LU factorization failed", lu_.lastErrorMessage());
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) override { return lu_.solve(b); }

 private:
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

#ifdef EMAC_HAVE_UMFPACK
class UmfpackLu final : public LuFactorization {
 public:
  explicit UmfpackLu(const detail::UmfpackApi& api) : api_(api) {
    api_.defaults(control_);
    control_[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
    control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  }
  ~UmfpackLu() override { release(); }
  UmfpackLu(const UmfpackLu&) = delete;
  UmfpackLu& operator=(const UmfpackLu&) = delete;

  void analyze(const ColMatrix& m) override {
    release();
    double info[UMFPACK_INFO];
    int status = api_.symbolic(static_cast<int>(m.rows()), static_cast<int>(m.cols()), m.outerIndexPtr(),
                               m.innerIndexPtr(), m.valuePtr(), &symbolic_, control_, info);
    if (status != UMFPACK_OK && control_[UMFPACK_ORDERING] != UMFPACK_ORDERING_AMD) {
      // UMFPACK builds without METIS reject that ordering.
      control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_AMD;
      status = api_.symbolic(static_cast<int>(m.rows()), static_cast<int>(m.cols()), m.outerIndexPtr(),
                             m.innerIndexPtr(), m.valuePtr(), &symbolic_, control_, info);
    }
    if (status != UMFPACK_OK) {
      symbolic_ = nullptr;
      throw SolverError("sparse LU analysis failed", "UMFPACK status " + std::to_string(status));
    }
  }
  void factorize(const ColMatrix& m) override {
    if (numeric_) api_.free_numeric(&numeric_);
    numeric_ = nullptr;
    matrix_ = &m;
    double info[UMFPACK_INFO];
    const int status =
        api_.numeric(m.outerIndexPtr(), m.innerIndexPtr(), m.valuePtr(), symbolic_, &numeric_, control_, info);
    if (status != UMFPACK_OK) {
      if (numeric_) api_.free_numeric(&numeric_);
      numeric_ = nullptr;
      throw SolverError("sparse LU factorization failed",
                        status == UMFPACK_WARNING_singular_matrix ? "matrix is singular"
                                                                  : "UMFPACK status " + std::to_string(status));
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) override {
    Eigen::VectorXd x(b.size());
    double info[UMFPACK_INFO];
    const int status = api_.solve(UMFPACK_A, matrix_->outerIndexPtr(), matrix_->innerIndexPtr(), matrix_->valuePtr(),
                                  x.data(), b.data(), numeric_, control_, info);
    if (status != UMFPACK_OK) throw SolverError("sparse LU solve failed", "UMFPACK status " + std::to_string(status));
    return x;
  }

 private:
  void release() {
    if (numeric_) api_.free_numeric(&numeric_);
    if (symbolic_) api_.free_symbolic(&symbolic_);
    numeric_ = nullptr;
    symbolic_ = nullptr;
  }

  const detail::UmfpackApi& api_;
  double control_[UMFPACK_CONTROL];
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  const ColMatrix* matrix_ = nullptr;
};
#endif

std::unique_ptr<LuFactorization> make_lu() {
#ifdef EMAC_HAVE_UMFPACK
  if (const detail::UmfpackApi* api = detail::umfpack_api()) return std::make_unique<UmfpackLu>(*api);
#endif
  return std::make_unique<EigenLu>();
}

}  // namespace

struct DirectSolver::Impl {
  std::unique_ptr<LuFactorization> lu = make_lu();
  // The UMFPACK solve phase reads the factorized matrix again.
  ColMatrix matrix;
  std::vector<int> offsets;
  std::vector<int> cols;
  bool analyzed = false;
  bool factorized = false;
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::factorize(const SparseMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("DirectSolver: matrix not square");
  if (!all_finite(matrix.values())) throw SolverError("DirectSolver", "matrix contains non-finite entries");
  impl_->factorized = false;
  impl_->matrix = to_eigen(matrix);
  const ColMatrix& cm = impl_->matrix;
  const bool same = impl_->analyzed && std::ranges::equal(impl_->offsets, matrix.row_offsets()) &&
                    std::ranges::equal(impl_->cols, matrix.col_indices());
  if (!same) {
    impl_->analyzed = false;
    impl_->lu->analyze(cm);
    impl_->offsets.assign(matrix.row_offsets().begin(), matrix.row_offsets().end());
    impl_->cols.assign(matrix.col_indices().begin(), matrix.col_indices().end());
    impl_->analyzed = true;
  }
  impl_->lu->factorize(cm);
  impl_->factorized = true;
}

std::vector<double> DirectSolver::solve(const SparseMatrix& matrix, std::span<const double> rhs,
                                        double* relative_residual) {
  if (!impl_->factorized) throw std::logic_error("DirectSolver::solve called before a successful factorize");
  if (rhs.size() != static_cast<std::size_t>(matrix.rows())) throw std::invalid_argument("DirectSolver: rhs size");
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  Eigen::VectorXd x = impl_->lu->solve(b);
  const double bnorm = b.norm();
  std::vector<double> ax(rhs.size());
  double rel = 0.0;
  for (int sweep = 0; sweep <= 3; ++sweep) {
    matrix.multiply(std::span<const double>(x.data(), x.size()), ax);
    Eigen::VectorXd r = b - Eigen::Map<const Eigen::VectorXd>(ax.data(), static_cast<Eigen::Index>(ax.size()));
    rel = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
    if (rel <= 1e-13 || sweep == 3) break;
    x += impl_->lu->solve(r);
  }
  std::vector<double> out(x.data(), x.data() + x.size());
  if (!all_finite(out)) throw SolverError("sparse LU solve failed", "solution contains non-finite entries");
  if (relative_residual) *relative_residual = rel;
  return out;
}

std::vector<double> solve_sparse(const SparseMatrix& matrix, std::span<const double> rhs) {
  DirectSolver solver;
  solver.factorize(matrix);
  return solver.solve(matrix, rhs);
}

SaddleSystem apply_dirichlet(SaddleSystem system) {
  if (system.dirichlet_applied || system.dirichlet.empty()) {
    system.dirichlet_applied = true;
    return system;
  }
  const int nu = system.a.rows();
  std::vector<char> fixed(nu, 0);
  std::vector<double> value(nu, 0.0);
  for (const DirichletValue& d : system.dirichlet) {
    if (d.dof < 0 || d.dof >= nu) throw std::invalid_argument("apply_dirichlet: DOF out of range");
    if (!std::isfinite(d.value)) throw std::invalid_argument("apply_dirichlet: non-finite prescribed value");
    if (fixed[d.dof] && value[d.dof] != d.value) {
      throw std::invalid_argument("apply_dirichlet: conflicting values for DOF " + std::to_string(d.dof));
    }
    fixed[d.dof] = 1;
    value[d.dof] = d.value;
  }

  auto eliminate_columns = [&](SparseMatrix& m, std::vector<double>& rhs, bool skip_constrained_rows) {
    const auto off = m.row_offsets();
    const auto cols = m.col_indices();
    auto vals = m.values();
    for (int i = 0; i < m.rows(); ++i) {
      if (skip_constrained_rows && fixed[i]) continue;
      for (int k = off[i]; k < off[i + 1]; ++k) {
        const int j = cols[k];
        if (fixed[j]) {
          rhs[i] -= vals[k] * value[j];
          vals[k] = 0.0;
        }
      }
    }
  };
  eliminate_columns(system.a, system.rhs_u, true);
  eliminate_columns(system.b, system.rhs_p, false);

  // The -B^T coupling of constrained rows vanishes with the zeroed B columns.
  const auto off = system.a.row_offsets();
  const auto cols = system.a.col_indices();
  auto vals = system.a.values();
  for (int i = 0; i < nu; ++i) {
    if (!fixed[i]) continue;
    for (int k = off[i]; k < off[i + 1]; ++k) vals[k] = (cols[k] == i) ? 1.0 : 0.0;
    if (system.a.find(i, i) < 0) throw std::invalid_argument("apply_dirichlet: velocity block lacks a diagonal entry");
    system.rhs_u[i] = value[i];
  }
  system.dirichlet_applied = true;
  return system;
}

namespace {

void check_dimensions(const SaddleSystem& s) {
  if (!s.space) throw std::invalid_argument("SaddleSystem: missing space");
  const int nu = s.space->num_vel_dofs();
  const int np = s.space->num_pr_dofs();
  if (s.a.rows() != nu || s.a.cols() != nu || s.b.rows() != np || s.b.cols() != nu ||
      s.mean_row.size() != static_cast<std::size_t>(np) || s.rhs_u.size() != static_cast<std::size_t>(nu) ||
      s.rhs_p.size() != static_cast<std::size_t>(np)) {
    throw std::invalid_argument("SaddleSystem: inconsistent block dimensions");
  }
}

SparseMatrix assemble_global(const SaddleSystem& s) {
  const int nu = s.a.rows();
  const int np = s.b.rows();
  const int n = nu + np + 1;
  const SparseMatrix bt = s.b.transposed();
  std::vector<int> offsets;
  offsets.reserve(n + 1);
  offsets.push_back(0);
  std::vector<int> cols;
  std::vector<double> vals;
  const std::size_t nnz = s.a.nnz() + 2 * static_cast<std::size_t>(s.b.nnz()) + 2 * np;
  cols.reserve(nnz);
  vals.reserve(nnz);
  auto append_row = [&](const SparseMatrix& m, int row, int col_shift, double factor) {
    const auto off = m.row_offsets();
    const auto ci = m.col_indices();
    const auto v = m.values();
    for (int k = off[row]; k < off[row + 1]; ++k) {
      cols.push_back(ci[k] + col_shift);
      vals.push_back(factor * v[k]);
    }
  };
  for (int i = 0; i < nu; ++i) {
    append_row(s.a, i, 0, 1.0);
    append_row(bt, i, nu, -1.0);
    offsets.push_back(static_cast<int>(cols.size()));
  }
  for (int k = 0; k < np; ++k) {
    append_row(s.b, k, 0, -1.0);
    cols.push_back(nu + np);
    vals.push_back(s.mean_row[k]);
    offsets.push_back(static_cast<int>(cols.size()));
  }
  for (int k = 0; k < np; ++k) {
    cols.push_back(nu + k);
    vals.push_back(s.mean_row[k]);
  }
  offsets.push_back(static_cast<int>(cols.size()));
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace

SaddleSolution SaddleSolver::solve(const SaddleSystem& input) {
  check_dimensions(input);
  const SaddleSystem s = input.dirichlet_applied ? input : apply_dirichlet(input);
  const int nu = s.a.rows();
  const int np = s.b.rows();
  global_ = assemble_global(s);
  std::vector<double> rhs(nu + np + 1, 0.0);
  std::copy(s.rhs_u.begin(), s.rhs_u.end(), rhs.begin());
  for (int k = 0; k < np; ++k) rhs[nu + k] = -s.rhs_p[k];

  direct_.factorize(global_);
  double rel = 0.0;
  std::vector<double> x = direct_.solve(global_, rhs, &rel);
  if (!(rel <= 1e-11)) {
    throw SolverError("saddle solve inaccurate", "relative residual " + std::to_string(rel) + " exceeds 1e-11");
  }
  SaddleSolution out{FEFunction(s.space, FieldKind::Velocity, std::vector<double>(x.begin(), x.begin() + nu)),
                     FEFunction(s.space, FieldKind::Pressure, std::vector<double>(x.begin() + nu, x.begin() + nu + np)),
                     -x.back(), rel};
  return out;
}

SaddleSolution solve(const SaddleSystem& system) {
  SaddleSolver solver;
  return solver.solve(system);
}

}  // namespace emac
