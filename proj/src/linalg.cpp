#include "bilicut/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bilicut/error.hpp"

namespace bilicut {

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kMaxSweeps = 100;

void check_finite(const DenseMatrix& m, const char* what) {
  if (!m.all_finite()) {
    throw Error(ErrorCode::kNonFinite, std::string(what) + " has NaN/Inf");
  }
}

// First entry above noise level made nonnegative; returns the applied sign.
double canonical_sign(std::span<const double> col) {
  double scale = 0.0;
  for (double e : col) scale = std::max(scale, std::abs(e));
  for (double e : col) {
    if (std::abs(e) > 1e-12 * scale) return e < 0.0 ? -1.0 : 1.0;
  }
  return 1.0;
}

std::vector<std::size_t> descending_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });
  return order;
}

// Extend orthonormal columns `basis` (each of length dim) with unit vectors
// orthogonal to all of them, until `target` columns exist.
void complete_orthonormal(std::vector<Vector>& basis, std::size_t dim,
                          std::size_t target) {
  for (std::size_t k = 0; k < dim && basis.size() < target; ++k) {
    Vector cand(dim, 0.0);
    cand[k] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& b : basis) {
        const double proj = dot(cand, b);
        for (std::size_t i = 0; i < dim; ++i) cand[i] -= proj * b[i];
      }
    }
    const double nrm = norm2(cand);
    if (nrm > 0.5) {
      for (double& e : cand) e /= nrm;
      basis.push_back(std::move(cand));
    }
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "entries length does not match rows*cols");
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged initializer");
    }
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Vector DenseMatrix::column(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

double DenseMatrix::frobenius_norm() const { return norm2(entries_); }

double DenseMatrix::max_abs() const {
  double out = 0.0;
  for (double e : entries_) out = std::max(out, std::abs(e));
  return out;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](double e) { return std::isfinite(e); });
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix product");
  }
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix difference");
  }
  DenseMatrix out = a;
  auto dst = out.entries();
  auto src = b.entries();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= src[k];
  return out;
}

Vector operator*(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix-vector product");
  }
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

DenseMatrix outer(std::span<const double> a, std::span<const double> b) {
  DenseMatrix out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = a[i] * b[j];
  return out;
}

DenseMatrix gram(const DenseMatrix& f) {
  const std::size_t n = f.rows();
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = dot(f.row(i), f.row(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "dot product");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double bilinear(std::span<const double> a, const DenseMatrix& m,
                std::span<const double> b) {
  return dot(a, m * b);
}

EigResult sym_eig(const DenseMatrix& m) {
  if (!m.is_square()) {
    throw Error(ErrorCode::kDimensionMismatch, "sym_eig needs a square matrix");
  }
  check_finite(m, "sym_eig input");
  const std::size_t n = m.rows();
  const double scale = std::max(1.0, m.max_abs());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) {
        throw Error(ErrorCode::kNonSymmetric, "sym_eig input is not symmetric");
      }

  DenseMatrix a = m;
  DenseMatrix z = DenseMatrix::identity(n);
  const double floor = 1e-300 + 1e-18 * m.frobenius_norm();

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= floor ||
            std::abs(apq) <= kJacobiTol * std::sqrt(std::abs(a(p, p) * a(q, q)))) {
          continue;
        }
        rotated = true;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double zkp = z(k, p);
          const double zkq = z(k, q);
          z(k, p) = c * zkp - s * zkq;
          z(k, q) = s * zkp + c * zkq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  const auto order = descending_order(diag);

  EigResult out;
  out.eigenvalues.resize(n);
  out.z = DenseMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.eigenvalues[c] = diag[src];
    const Vector col = z.column(src);
    const double sign = canonical_sign(col);
    for (std::size_t k = 0; k < n; ++k) out.z(k, c) = sign * col[k];
  }
  return out;
}

SvdResult svd(const DenseMatrix& m) {
  check_finite(m, "svd input");
  if (m.rows() < m.cols()) {
    SvdResult t = svd(m.transpose());
    // Re-canonicalise: the sign rule applies to u, which was v of M'.
    SvdResult out{std::move(t.v), std::move(t.singular_values), std::move(t.u)};
    for (std::size_t c = 0; c < out.u.cols(); ++c) {
      const double sign = canonical_sign(out.u.column(c));
      if (sign < 0.0) {
        for (std::size_t k = 0; k < out.u.rows(); ++k) out.u(k, c) = -out.u(k, c);
        for (std::size_t k = 0; k < out.v.rows(); ++k) out.v(k, c) = -out.v(k, c);
      }
    }
    return out;
  }

  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<Vector> g(cols, Vector(rows));
  std::vector<Vector> v(cols, Vector(cols, 0.0));
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) g[j][i] = m(i, j);
    v[j][j] = 1.0;
  }

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        const double alpha = dot(g[p], g[p]);
        const double beta = dot(g[q], g[q]);
        const double gamma = dot(g[p], g[q]);
        if (gamma == 0.0 || std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < rows; ++k) {
          const double gp = g[p][k];
          const double gq = g[q][k];
          g[p][k] = c * gp - s * gq;
          g[q][k] = s * gp + c * gq;
        }
        for (std::size_t k = 0; k < cols; ++k) {
          const double vp = v[p][k];
          const double vq = v[q][k];
          v[p][k] = c * vp - s * vq;
          v[q][k] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sigma(cols);
  for (std::size_t j = 0; j < cols; ++j) sigma[j] = norm2(g[j]);
  const auto order = descending_order(sigma);
  const double smax = cols ? sigma[order[0]] : 0.0;
  const double zero = std::max(1e-300, 1e-14 * smax);

  std::vector<Vector> ucols;
  std::vector<Vector> vcols;
  Vector svals;
  std::vector<std::size_t> nonzero_positions;
  for (std::size_t c = 0; c < cols; ++c) {
    const std::size_t src = order[c];
    svals.push_back(sigma[src]);
    vcols.push_back(v[src]);
    if (sigma[src] > zero) {
      Vector u = g[src];
      for (double& e : u) e /= sigma[src];
      ucols.push_back(std::move(u));
      nonzero_positions.push_back(c);
    }
  }
  // Numerically zero singular values: complete U to an orthonormal set.
  std::vector<Vector> basis = ucols;
  complete_orthonormal(basis, rows, cols);
  std::vector<Vector> ordered_u(cols);
  std::size_t next_nz = 0;
  std::size_t next_fill = ucols.size();
  for (std::size_t c = 0; c < cols; ++c) {
    if (next_nz < nonzero_positions.size() && nonzero_positions[next_nz] == c) {
      ordered_u[c] = basis[next_nz++];
    } else {
      ordered_u[c] = basis[next_fill++];
      svals[c] = 0.0;
    }
  }

  SvdResult out;
  out.u = DenseMatrix(rows, cols);
  out.v = DenseMatrix(cols, cols);
  out.singular_values = std::move(svals);
  for (std::size_t c = 0; c < cols; ++c) {
    const double sign = canonical_sign(ordered_u[c]);
    for (std::size_t k = 0; k < rows; ++k) out.u(k, c) = sign * ordered_u[c][k];
    for (std::size_t k = 0; k < cols; ++k) out.v(k, c) = sign * vcols[c][k];
  }
  return out;
}

double min_eigenvalue(const DenseMatrix& m) {
  if (m.rows() == 0) return 0.0;
  return sym_eig(m).eigenvalues.back();
}

double singular_zero_threshold(std::span<const double> sigma) {
  const double s1 = sigma.empty() ? 0.0 : sigma.front();
  return 1e-7 * std::max(1.0, s1);
}

std::size_t count_nonzero_singular(std::span<const double> sigma) {
  const double thr = singular_zero_threshold(sigma);
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > thr; }));
}

std::pair<double, double> interval_dot(std::span<const double> c,
                                       std::span<const double> lo,
                                       std::span<const double> hi) {
  if (c.size() != lo.size() || c.size() != hi.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "interval_dot operand lengths");
  }
  double mn = 0.0;
  double mx = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    const double a = c[i] * lo[i];
    const double b = c[i] * hi[i];
    mn += std::min(a, b);
    mx += std::max(a, b);
  }
  return {mn, mx};
}

}  // namespace bilicut
