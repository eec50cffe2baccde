#include "emac/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace emac {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<int> row_offsets, std::vector<int> col_indices,
                           std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(row_offsets)), cols_idx_(std::move(col_indices)),
      values_(std::move(values)) {
  if (rows < 0 || cols < 0 || offsets_.size() != static_cast<std::size_t>(rows) + 1 || offsets_.front() != 0 ||
      offsets_.back() != static_cast<int>(cols_idx_.size()) || cols_idx_.size() != values_.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
  }
  for (int i = 0; i < rows_; ++i) {
    if (offsets_[i] > offsets_[i + 1]) throw std::invalid_argument("SparseMatrix: decreasing row offsets");
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (cols_idx_[k] < 0 || cols_idx_[k] >= cols_) throw std::invalid_argument("SparseMatrix: column out of range");
      if (k > offsets_[i] && cols_idx_[k] <= cols_idx_[k - 1]) {
        throw std::invalid_argument("SparseMatrix: columns not sorted and unique");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::span<const Triplet> triplets) {
  std::vector<int> count(rows + 1, 0);
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw std::invalid_argument("SparseMatrix::from_triplets: index out of range");
    }
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::pair<int, double>> buf(triplets.size());
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (const Triplet& t : triplets) buf[fill[t.row]++] = {t.col, t.value};

  std::vector<int> offsets{0};
  std::vector<int> cidx;
  std::vector<double> vals;
  offsets.reserve(rows + 1);
  for (int i = 0; i < rows; ++i) {
    auto first = buf.begin() + count[i];
    auto last = buf.begin() + count[i + 1];
    std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last; ++it) {
      if (!cidx.empty() && static_cast<int>(cidx.size()) > offsets.back() && cidx.back() == it->first) {
        vals.back() += it->second;
      } else {
        cidx.push_back(it->first);
        vals.push_back(it->second);
      }
    }
    offsets.push_back(static_cast<int>(cidx.size()));
  }
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cidx), std::move(vals));
}

SparseMatrix SparseMatrix::zeros_like(const SparseMatrix& pattern) {
  SparseMatrix out = pattern;
  std::fill(out.values_.begin(), out.values_.end(), 0.0);
  return out;
}

int SparseMatrix::find(int i, int j) const {
  const auto first = cols_idx_.begin() + offsets_[i];
  const auto last = cols_idx_.begin() + offsets_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? static_cast<int>(it - cols_idx_.begin()) : -1;
}

double SparseMatrix::at(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : values_[k];
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && offsets_ == other.offsets_ && cols_idx_ == other.cols_idx_;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(cols_) || y.size() != static_cast<std::size_t>(rows_)) {
    throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
  }
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[cols_idx_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

void SparseMatrix::transpose_multiply_add(std::span<const double> x, std::span<double> y, double alpha) const {
  if (x.size() != static_cast<std::size_t>(rows_) || y.size() != static_cast<std::size_t>(cols_)) {
    throw std::invalid_argument("SparseMatrix::transpose_multiply_add: size mismatch");
  }
  for (int i = 0; i < rows_; ++i) {
    const double xi = alpha * x[i];
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) y[cols_idx_[k]] += values_[k] * xi;
  }
}

SparseMatrix& SparseMatrix::axpy(double alpha, const SparseMatrix& other) {
  if (!same_pattern(other)) throw std::invalid_argument("SparseMatrix::axpy: pattern mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += alpha * other.values_[k];
  return *this;
}

SparseMatrix& SparseMatrix::scale(double alpha) {
  for (double& v : values_) v *= alpha;
  return *this;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<int> offsets(cols_ + 1, 0);
  for (int c : cols_idx_) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<int> cidx(cols_idx_.size());
  std::vector<double> vals(values_.size());
  std::vector<int> fill(offsets.begin(), offsets.end() - 1);
  for (int i = 0; i < rows_; ++i) {
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      const int pos = fill[cols_idx_[k]]++;
      cidx[pos] = i;
      vals[pos] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(cidx), std::move(vals));
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < rows_; ++i) {
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (std::abs(values_[k] - at(cols_idx_[k], i)) > tol * scale) return false;
    }
  }
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double bilinear(const SparseMatrix& a, std::span<const double> x, std::span<const double> y) {
  if (x.size() != static_cast<std::size_t>(a.rows()) || y.size() != static_cast<std::size_t>(a.cols())) {
    throw std::invalid_argument("bilinear: size mismatch");
  }
  const auto off = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double r = 0.0;
    for (int k = off[i]; k < off[i + 1]; ++k) r += vals[k] * y[cols[k]];
    s += x[i] * r;
  }
  return s;
}

}  // namespace emac
