#include "linkopt/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace linkopt {

SparseMatrix SparseMatrix::from_triplets(int n, std::span<const int> rows,
                                         std::span<const int> cols,
                                         std::span<const double> vals) {
  if (rows.size() != cols.size() || rows.size() != vals.size())
    throw std::invalid_argument("triplet arrays must have equal length");
  SparseMatrix m;
  m.n_ = n;
  const std::size_t nnz = rows.size();

  std::vector<std::size_t> order(nnz);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a] != rows[b]) return rows[a] < rows[b];
    return cols[a] < cols[b];
  });

  m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  m.col_.resize(nnz);
  m.val_.resize(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    const std::size_t t = order[k];
    if (rows[t] < 0 || rows[t] >= n || cols[t] < 0 || cols[t] >= n)
      throw std::invalid_argument("triplet index out of range");
    if (vals[t] < 0.0) throw std::invalid_argument("matrix values must be nonnegative");
    if (k > 0 && rows[order[k - 1]] == rows[t] && cols[order[k - 1]] == cols[t])
      throw std::invalid_argument("duplicate coordinate in triplets");
    m.col_[k] = cols[t];
    m.val_[k] = vals[t];
    ++m.row_ptr_[static_cast<std::size_t>(rows[t]) + 1];
  }
  for (int i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  return m;
}

void SparseMatrix::matvec(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += val_[k] * x[col_[k]];
    y[i] = acc;
  }
}

void SparseMatrix::tmatvec(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < n_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[col_[k]] += val_[k] * xi;
  }
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> s(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s[i] += val_[k];
  return s;
}

double SparseMatrix::value_sum() const {
  double s = 0.0;
  for (double v : val_) s += v;
  return s;
}

}  // namespace linkopt
