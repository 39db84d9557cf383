#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace linkopt {

/// Square nonnegative matrix in compressed sparse row layout.
/// Structural entries may hold the value zero; the pattern is part of the
/// matrix identity (set_values never changes it).
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Builds from coordinate triplets.  Duplicate coordinates are rejected.
  static SparseMatrix from_triplets(int n, std::span<const int> rows, std::span<const int> cols,
                                    std::span<const double> vals);

  int n() const { return n_; }
  std::size_t nnz() const { return col_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_; }
  const std::vector<double>& values() const { return val_; }
  std::vector<double>& values() { return val_; }

  /// y = A x.  Plain per-row accumulation, so the result does not depend on
  /// any internal parallelization over rows.
  void matvec(std::span<const double> x, std::span<double> y) const;

  /// y = A^T x.
  void tmatvec(std::span<const double> x, std::span<double> y) const;

  std::vector<double> row_sums() const;
  double value_sum() const;

 private:
  int n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

/// Matrix-free linear operator; the spectral iterations only need products
/// with M and M^T.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual int dim() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  virtual void apply_transpose(std::span<const double> x, std::span<double> y) const = 0;
};

class CsrOperator final : public LinearOperator {
 public:
  explicit CsrOperator(const SparseMatrix& m) : m_(&m) {}
  int dim() const override { return m_->n(); }
  void apply(std::span<const double> x, std::span<double> y) const override { m_->matvec(x, y); }
  void apply_transpose(std::span<const double> x, std::span<double> y) const override {
    m_->tmatvec(x, y);
  }

 private:
  const SparseMatrix* m_;
};

}  // namespace linkopt
