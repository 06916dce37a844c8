#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace bilicut {

using Vector = std::vector<double>;

/// Row-major dense matrix. Small and value-semantic; sizes here stay in the
/// hundreds.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<double> entries() noexcept { return entries_; }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }

  Vector column(std::size_t j) const;
  DenseMatrix transpose() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
Vector operator*(const DenseMatrix& a, std::span<const double> x);

/// a·b' for vectors a, b.
DenseMatrix outer(std::span<const double> a, std::span<const double> b);
/// F·F'. PSD by construction.
DenseMatrix gram(const DenseMatrix& f);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// a' M b.
double bilinear(std::span<const double> a, const DenseMatrix& m,
                std::span<const double> b);

struct SvdResult {
  DenseMatrix u;                  // rows × k, orthonormal columns
  std::vector<double> singular_values;  // descending, k = min(rows, cols)
  DenseMatrix v;                  // cols × k, orthonormal columns
};

struct EigResult {
  std::vector<double> eigenvalues;  // descending
  DenseMatrix z;                    // eigenvectors in columns
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Throws kNonSymmetric when |M - M'| exceeds 1e-12 relative, kNonFinite on
/// NaN/Inf entries.
EigResult sym_eig(const DenseMatrix& m);

/// Thin SVD by one-sided (Hestenes) Jacobi. Columns of U for zero singular
/// values are completed to an orthonormal set. The first nonzero entry of
/// every u is made nonnegative, v flipped alongside.
SvdResult svd(const DenseMatrix& m);

double min_eigenvalue(const DenseMatrix& m);

/// Count of singular values above 1e-7·max(1, σ₁).
std::size_t count_nonzero_singular(std::span<const double> sigma);
double singular_zero_threshold(std::span<const double> sigma);

/// Range of c'z over the box lo ≤ z ≤ hi. Infinite bounds propagate, but a
/// zero coefficient contributes nothing regardless of its bounds.
std::pair<double, double> interval_dot(std::span<const double> c,
                                       std::span<const double> lo,
                                       std::span<const double> hi);

}  // namespace bilicut
