#pragma once

#include <span>
#include <vector>

namespace emac {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row sparse matrix. Column indices are sorted and unique within
/// each row; explicitly stored zeros are allowed so that matrices assembled
/// on one sparsity pattern can be combined entrywise.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<int> row_offsets, std::vector<int> col_indices,
               std::vector<double> values);

  /// Duplicate entries are summed.
  static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> triplets);
  /// Same pattern, all stored values zero.
  static SparseMatrix zeros_like(const SparseMatrix& pattern);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  std::span<const int> row_offsets() const { return offsets_; }
  std::span<const int> col_indices() const { return cols_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Storage position of (i, j), or -1 if not in the pattern.
  int find(int i, int j) const;
  /// Stored value, zero when outside the pattern.
  double at(int i, int j) const;

  bool same_pattern(const SparseMatrix& other) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  /// y += alpha * A^T x
  void transpose_multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;

  /// this += alpha * other; requires an identical pattern.
  SparseMatrix& axpy(double alpha, const SparseMatrix& other);
  SparseMatrix& scale(double alpha);

  SparseMatrix transposed() const;
  bool is_symmetric(double tol) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> cols_idx_;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
/// x^T A y
double bilinear(const SparseMatrix& a, std::span<const double> x, std::span<const double> y);

}  // namespace emac
