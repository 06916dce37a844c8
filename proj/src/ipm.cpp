// Primal-dual interior point method for convex QPs of the form
//   min c'x + ½x'Px  s.t.  Ax = b,  Gx ≤ h,  l ≤ x ≤ u.
// Each Newton step solves the regularized quasidefinite augmented system
//   [ P + D + δ     A'      G'        ] [dx]
//   [ A            −δ       0         ] [dy]
//   [ G             0      −S/Z − δ   ] [dz]
// with a sparse signed LDLᵀ factorization (AMD ordering computed once per solve),
// followed by iterative refinement against the unregularized matrix. δ starts
// at 1e-8 and grows tenfold whenever a factorization breaks down.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/OrderingMethods>

#include "bilicut/error.hpp"
#include "bilicut/solver.hpp"

namespace bilicut {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double, int>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRegInitial = 1e-8;
constexpr double kRegMax = 1e-5;
constexpr double kStepFraction = 0.995;
constexpr int kRefineSteps = 3;

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

enum class RowKind { kDropped, kEquality, kInequality };

struct RowMap {
  RowKind kind = RowKind::kDropped;
  int pos = 0;
  double sign_scale = 1.0;  // internal dual × sign_scale = model dual
};

// Internal standard form with row equilibration.
struct StandardForm {
  int n = 0;
  SpMat P;  // full symmetric
  Vec c;
  SpMat A;
  Vec b;
  SpMat G;
  Vec h;
  std::vector<int> lower_idx;
  Vec lower;
  std::vector<int> upper_idx;
  Vec upper;
  std::vector<RowMap> row_map;
  bool trivially_infeasible = false;
};

StandardForm standardize(const QuadraticModel& model) {
  StandardForm sf;
  const int n = model.num_vars;
  sf.n = n;
  sf.c = Eigen::Map<const Vec>(model.objective_linear.data(), n);

  std::vector<Triplet> pt;
  for (const QuadTerm& t : model.objective_quadratic) {
    if (t.value == 0.0) continue;
    pt.emplace_back(t.i, t.j, t.value);
    if (t.i != t.j) pt.emplace_back(t.j, t.i, t.value);
  }
  sf.P.resize(n, n);
  sf.P.setFromTriplets(pt.begin(), pt.end());

  std::vector<Triplet> at;
  std::vector<Triplet> gt;
  std::vector<double> b;
  std::vector<double> h;
  sf.row_map.resize(model.rows.size());
  for (std::size_t r = 0; r < model.rows.size(); ++r) {
    const LinearRow& row = model.rows[r];
    double scale = 0.0;
    for (const auto& [idx, coeff] : row.coeffs) scale = std::max(scale, std::abs(coeff));
    if (scale == 0.0) {
      const bool ok = (row.sense == Sense::kLe && row.rhs >= -1e-12) ||
                      (row.sense == Sense::kGe && row.rhs <= 1e-12) ||
                      (row.sense == Sense::kEq && std::abs(row.rhs) <= 1e-12);
      if (!ok) sf.trivially_infeasible = true;
      continue;
    }
    const double inv = 1.0 / scale;
    if (row.sense == Sense::kEq) {
      const int pos = static_cast<int>(b.size());
      for (const auto& [idx, coeff] : row.coeffs) at.emplace_back(pos, idx, coeff * inv);
      b.push_back(row.rhs * inv);
      sf.row_map[r] = {RowKind::kEquality, pos, inv};
    } else {
      const double sgn = row.sense == Sense::kLe ? 1.0 : -1.0;
      const int pos = static_cast<int>(h.size());
      for (const auto& [idx, coeff] : row.coeffs) gt.emplace_back(pos, idx, sgn * coeff * inv);
      h.push_back(sgn * row.rhs * inv);
      sf.row_map[r] = {RowKind::kInequality, pos, sgn * inv};
    }
  }

  std::vector<double> lo;
  std::vector<double> hi;
  for (int j = 0; j < n; ++j) {
    const double l = model.var_lo[static_cast<std::size_t>(j)];
    const double u = model.var_hi[static_cast<std::size_t>(j)];
    if (l > u) {
      sf.trivially_infeasible = true;
      continue;
    }
    if (std::isfinite(l) && std::isfinite(u) && u - l <= 1e-12 * std::max(1.0, std::abs(l))) {
      // Fixed variable: an equality row keeps the bound slacks strictly positive.
      const int pos = static_cast<int>(b.size());
      at.emplace_back(pos, j, 1.0);
      b.push_back(0.5 * (l + u));
      continue;
    }
    if (std::isfinite(l)) {
      sf.lower_idx.push_back(j);
      lo.push_back(l);
    }
    if (std::isfinite(u)) {
      sf.upper_idx.push_back(j);
      hi.push_back(u);
    }
  }

  sf.A.resize(static_cast<int>(b.size()), n);
  sf.A.setFromTriplets(at.begin(), at.end());
  sf.G.resize(static_cast<int>(h.size()), n);
  sf.G.setFromTriplets(gt.begin(), gt.end());
  sf.b = Eigen::Map<Vec>(b.data(), static_cast<int>(b.size()));
  sf.h = Eigen::Map<Vec>(h.data(), static_cast<int>(h.size()));
  sf.lower = Eigen::Map<Vec>(lo.data(), static_cast<int>(lo.size()));
  sf.upper = Eigen::Map<Vec>(hi.data(), static_cast<int>(hi.size()));
  return sf;
}

struct Iterate {
  Vec x, y, z, s, zl, zu;
};

struct Direction {
  Vec dx, dy, dz, ds, dzl, dzu;
};

// Up-looking sparse LDLᵀ for quasidefinite matrices. Pivots whose sign
// disagrees with the expected inertia (or that are nearly zero) are replaced
// by ±kPivotDelta; iterative refinement absorbs the perturbation.
//
// Once the remaining columns of L are mostly full, the up-looking pass stops
// at that point and leaves the Schur complement of the trailing block in a
// dense matrix, which is factored blockwise with dense kernels.
class SignedLdlt {
 public:
  static constexpr double kPivotEps = 1e-13;
  static constexpr double kPivotDelta = 1e-7;
  static constexpr int kMinTail = 48;
  static constexpr int kMaxTail = 6000;
  static constexpr int kBlock = 64;
  static constexpr double kDenseDiscount = 0.25;

  // `upper` holds the upper triangle including every diagonal entry.
  void analyze(const SpMat& upper, const std::vector<signed char>& sign) {
    const int size = static_cast<int>(upper.rows());
    SpMat full = upper.selfadjointView<Eigen::Upper>();
    Eigen::AMDOrdering<int> amd;
    amd(full, pinv_);
    perm_ = pinv_.inverse();
    permute(upper);

    sign_.assign(static_cast<std::size_t>(size), 1);
    for (int i = 0; i < size; ++i)
      sign_[static_cast<std::size_t>(perm_.indices()[i])] = sign[static_cast<std::size_t>(i)];

    parent_.assign(static_cast<std::size_t>(size), -1);
    std::vector<int> count(static_cast<std::size_t>(size), 0);
    std::vector<int> flag(static_cast<std::size_t>(size), -1);
    for (int k = 0; k < size; ++k) {
      flag[k] = k;
      for (SpMat::InnerIterator it(ap_, k); it; ++it) {
        for (int i = static_cast<int>(it.index()); i < k && flag[i] != k; i = parent_[i]) {
          if (parent_[i] == -1) parent_[i] = k;
          ++count[i];
          flag[i] = k;
        }
      }
    }

    // Split where the estimated work is smallest: Σ count² for the sparse
    // columns plus t³/3 for a dense tail of size t, the latter discounted
    // because the dense kernels run several times faster per flop.
    tail_start_ = size;
    {
      double sparse = 0.0;
      for (int j = 0; j < size; ++j) sparse += static_cast<double>(count[j]) * count[j];
      double best = sparse;
      for (int ts = size - 1; ts >= std::max(0, size - kMaxTail); --ts) {
        sparse -= static_cast<double>(count[ts]) * count[ts];
        const double t = size - ts;
        const double cost = sparse + kDenseDiscount * t * t * t / 3.0;
        if (cost < best && size - ts >= kMinTail) {
          best = cost;
          tail_start_ = ts;
        }
      }
    }

    lp_.assign(static_cast<std::size_t>(size) + 1, 0);
    for (int k = 0; k < size; ++k) lp_[k + 1] = lp_[k] + (k < tail_start_ ? count[k] : 0);
    li_.assign(static_cast<std::size_t>(lp_[size]), 0);
    lx_.assign(static_cast<std::size_t>(lp_[size]), 0.0);
    d_.assign(static_cast<std::size_t>(size), 0.0);
    const int t = size - tail_start_;
    dense_.resize(t, t);
  }

  void factorize(const SpMat& upper) {
    permute(upper);
    const int size = static_cast<int>(ap_.rows());
    const int ts = tail_start_;
    std::vector<double> y(static_cast<std::size_t>(size), 0.0);
    std::vector<int> pattern(static_cast<std::size_t>(size));
    std::vector<int> flag(static_cast<std::size_t>(size), -1);
    std::vector<int> filled(static_cast<std::size_t>(size), 0);
    for (int k = 0; k < size; ++k) {
      int top = size;
      flag[k] = k;
      for (SpMat::InnerIterator it(ap_, k); it; ++it) {
        int i = static_cast<int>(it.index());
        if (i > k) continue;
        y[i] += it.value();
        int len = 0;
        for (; i < ts && flag[i] != k; i = parent_[i]) {
          pattern[len++] = i;
          flag[i] = k;
        }
        while (len > 0) pattern[--top] = pattern[--len];
      }
      double d = y[k];
      y[k] = 0.0;
      for (; top < size; ++top) {
        const int i = pattern[top];
        const double yi = y[i];
        y[i] = 0.0;
        const int end = lp_[i] + filled[i];
        for (int p = lp_[i]; p < end; ++p) y[li_[p]] -= lx_[p] * yi;
        const double l_ki = yi / d_[i];
        d -= l_ki * yi;
        li_[end] = k;
        lx_[end] = l_ki;
        ++filled[i];
      }
      if (!std::isfinite(d)) {
        throw Error(ErrorCode::kNumericalFailure, "KKT factorization broke down");
      }
      if (k < ts) {
        if (sign_[k] * d < kPivotEps) d = sign_[k] * kPivotDelta;
        d_[k] = d;
      } else {
        // Row k of the Schur complement, lower triangle.
        for (int j = ts; j < k; ++j) {
          dense_(k - ts, j - ts) = y[j];
          y[j] = 0.0;
        }
        dense_(k - ts, k - ts) = d;
      }
    }
    if (ts < size) factorize_dense();
  }

  Vec solve(const Vec& b) const {
    const int size = static_cast<int>(b.size());
    const int ts = tail_start_;
    Vec x = perm_ * b;
    for (int j = 0; j < ts; ++j)
      for (int p = lp_[j]; p < lp_[j + 1]; ++p) x[li_[p]] -= lx_[p] * x[j];
    for (int j = 0; j < ts; ++j) x[j] /= d_[j];
    if (ts < size) {
      auto tail = x.tail(size - ts);
      dense_.triangularView<Eigen::UnitLower>().solveInPlace(tail);
      tail.array() /= Eigen::Map<const Vec>(d_.data() + ts, size - ts).array();
      dense_.triangularView<Eigen::UnitLower>().transpose().solveInPlace(tail);
    }
    for (int j = ts - 1; j >= 0; --j)
      for (int p = lp_[j]; p < lp_[j + 1]; ++p) x[j] -= lx_[p] * x[li_[p]];
    return pinv_ * x;
  }

 private:
  void permute(const SpMat& upper) {
    ap_.resize(upper.rows(), upper.cols());
    ap_.selfadjointView<Eigen::Upper>() = upper.selfadjointView<Eigen::Upper>().twistedBy(perm_);
  }

  // Right-looking blocked LDLᵀ of the lower triangle of dense_, in place,
  // with the same signed pivot rule as the sparse part.
  void factorize_dense() {
    const int t = static_cast<int>(dense_.rows());
    const int ts = tail_start_;
    for (int j0 = 0; j0 < t; j0 += kBlock) {
      const int jb = std::min(kBlock, t - j0);
      for (int j = j0; j < j0 + jb; ++j) {
        double d = dense_(j, j);
        if (!std::isfinite(d)) {
          throw Error(ErrorCode::kNumericalFailure, "KKT factorization broke down");
        }
        const signed char s = sign_[static_cast<std::size_t>(ts + j)];
        if (s * d < kPivotEps) d = s * kPivotDelta;
        d_[static_cast<std::size_t>(ts + j)] = d;
        const int below = t - j - 1;
        dense_.col(j).tail(below) /= d;
        // Update the remaining columns of this panel.
        for (int c = j + 1; c < j0 + jb; ++c) {
          const double f = dense_(c, j) * d;
          dense_.col(c).tail(t - c) -= f * dense_.col(j).tail(t - c);
        }
      }
      const int rest = t - j0 - jb;
      if (rest == 0) continue;
      const auto panel = dense_.block(j0 + jb, j0, rest, jb);
      const Eigen::Map<const Vec> dp(d_.data() + ts + j0, jb);
      const Eigen::MatrixXd scaled = panel * dp.asDiagonal();
      dense_.bottomRightCorner(rest, rest).triangularView<Eigen::Lower>() -=
          scaled * panel.transpose();
    }
  }

  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv_;
  SpMat ap_;
  std::vector<signed char> sign_;
  std::vector<int> parent_;
  std::vector<int> lp_;
  std::vector<int> li_;
  std::vector<double> lx_;
  std::vector<double> d_;
  int tail_start_ = 0;
  Eigen::MatrixXd dense_;
};

class KktSystem {
 public:
  explicit KktSystem(const StandardForm& sf) : sf_(sf) {
    const int n = sf.n;
    const int me = static_cast<int>(sf.A.rows());
    const int mi = static_cast<int>(sf.G.rows());
    dim_ = n + me + mi;
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(sf.P.nonZeros() + sf.A.nonZeros() + sf.G.nonZeros() + dim_));
    for (int k = 0; k < dim_; ++k) t.emplace_back(k, k, 0.0);
    for (int col = 0; col < sf.P.outerSize(); ++col)
      for (SpMat::InnerIterator it(sf.P, col); it; ++it)
        if (it.row() < col) t.emplace_back(it.row(), col, it.value());
    for (int col = 0; col < sf.A.outerSize(); ++col)
      for (SpMat::InnerIterator it(sf.A, col); it; ++it)
        t.emplace_back(col, n + it.row(), it.value());
    for (int col = 0; col < sf.G.outerSize(); ++col)
      for (SpMat::InnerIterator it(sf.G, col); it; ++it)
        t.emplace_back(col, n + me + it.row(), it.value());
    k_.resize(dim_, dim_);
    k_.setFromTriplets(t.begin(), t.end());
    k_.makeCompressed();

    diag_pos_.resize(static_cast<std::size_t>(dim_));
    for (int col = 0; col < dim_; ++col) {
      const int begin = k_.outerIndexPtr()[col];
      const int end = k_.outerIndexPtr()[col + 1];
      for (int p = begin; p < end; ++p)
        if (k_.innerIndexPtr()[p] == col) diag_pos_[static_cast<std::size_t>(col)] = p;
    }
    p_diag_ = sf.P.diagonal();
    std::vector<signed char> sign(static_cast<std::size_t>(dim_), -1);
    std::fill(sign.begin(), sign.begin() + n, 1);
    ldlt_.analyze(k_, sign);
    scaled_ = k_;
    scale_ = Vec::Ones(dim_);
  }

  // Sets the iterate-dependent diagonals and factorizes.
  void factorize(const Vec& dx_diag, const Vec& dz_diag) {
    const int n = sf_.n;
    const int me = static_cast<int>(sf_.A.rows());
    double* vals = k_.valuePtr();
    for (int j = 0; j < n; ++j) vals[diag_pos_[j]] = p_diag_[j] + dx_diag[j] + reg_;
    for (int r = 0; r < me; ++r) vals[diag_pos_[n + r]] = -reg_;
    for (int r = 0; r < dz_diag.size(); ++r) vals[diag_pos_[n + me + r]] = -dz_diag[r] - reg_;

    // Symmetric scaling S K S with S = diag(1/√max(1, |K_ii|)) caps the
    // diagonal at unit size, so barrier terms near the boundary do not
    // swamp the regularization inside the factorization.
    for (int k = 0; k < dim_; ++k)
      scale_[k] = 1.0 / std::sqrt(std::max(1.0, std::abs(vals[diag_pos_[k]])));
    const int* outer = k_.outerIndexPtr();
    const int* inner = k_.innerIndexPtr();
    double* out = scaled_.valuePtr();
    for (int col = 0; col < dim_; ++col)
      for (int p = outer[col]; p < outer[col + 1]; ++p)
        out[p] = vals[p] * scale_[inner[p]] * scale_[col];
    ldlt_.factorize(scaled_);
  }

  Vec solve(const Vec& rhs) const {
    Vec sol = scaled_solve(rhs);
    for (int step = 0; step < kRefineSteps; ++step) {
      Vec res = rhs - apply_unregularized(sol);
      if (inf_norm(res) <= 1e-14 * (1.0 + inf_norm(rhs))) break;
      sol += scaled_solve(res);
    }
    if (!sol.allFinite()) {
      throw Error(ErrorCode::kNumericalFailure, "KKT solve produced NaN/Inf");
    }
    return sol;
  }

  int dim() const { return dim_; }

  // Raises the static regularization after a breakdown; false once capped.
  bool increase_regularization() {
    if (reg_ >= kRegMax) return false;
    reg_ *= 10.0;
    return true;
  }

 private:
  Vec scaled_solve(const Vec& rhs) const {
    return scale_.cwiseProduct(ldlt_.solve(scale_.cwiseProduct(rhs)));
  }

  Vec apply_unregularized(const Vec& v) const {
    Vec out = k_.selfadjointView<Eigen::Upper>() * v;
    const int n = sf_.n;
    out.head(n) -= reg_ * v.head(n);
    out.tail(dim_ - n) += reg_ * v.tail(dim_ - n);
    return out;
  }

  const StandardForm& sf_;
  int dim_ = 0;
  double reg_ = kRegInitial;
  SpMat k_;
  SpMat scaled_;
  Vec scale_;
  std::vector<int> diag_pos_;
  Vec p_diag_;
  SignedLdlt ldlt_;
};

Vec gather(const Vec& x, const std::vector<int>& idx) {
  Vec out(static_cast<int>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<int>(k)] = x[idx[k]];
  return out;
}

void scatter_add(Vec& x, const std::vector<int>& idx, const Vec& v) {
  for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] += v[static_cast<int>(k)];
}

double max_step(const Vec& v, const Vec& dv) {
  double alpha = 1.0;
  for (int k = 0; k < v.size(); ++k)
    if (dv[k] < 0.0) alpha = std::min(alpha, -v[k] / dv[k]);
  return alpha;
}

class Ipm {
 public:
  Ipm(const StandardForm& sf, const SolverOptions& opts)
      : sf_(sf), opts_(opts), kkt_(sf) {
    n_ = sf.n;
    me_ = static_cast<int>(sf.A.rows());
    mi_ = static_cast<int>(sf.G.rows());
    nl_ = static_cast<int>(sf.lower_idx.size());
    nu_ = static_cast<int>(sf.upper_idx.size());
    ncomp_ = mi_ + nl_ + nu_;
    is_lp_ = sf.P.nonZeros() == 0;
    bnorm_ = std::max(inf_norm(sf.b), inf_norm(sf.h));
    cnorm_ = inf_norm(sf.c);
  }

  SolveResult run(Iterate& it);

 private:
  void initial_point(Iterate& it);
  void residuals(const Iterate& it);
  double mu(const Iterate& it) const;
  void step(Iterate& it, double m);
  Direction newton(const Iterate& it, const Vec& r_sz, const Vec& r_l, const Vec& r_u);

  const StandardForm& sf_;
  SolverOptions opts_;
  KktSystem kkt_;
  int n_ = 0, me_ = 0, mi_ = 0, nl_ = 0, nu_ = 0, ncomp_ = 0;
  bool is_lp_ = true;
  double bnorm_ = 0.0, cnorm_ = 0.0;

  Vec rd_, rp_, ri_, wl_, wu_;
};

void Ipm::initial_point(Iterate& it) {
  it.x = Vec::Zero(n_);
  Vec lo = Vec::Constant(n_, -kInf);
  Vec hi = Vec::Constant(n_, kInf);
  for (int k = 0; k < nl_; ++k) lo[sf_.lower_idx[k]] = sf_.lower[k];
  for (int k = 0; k < nu_; ++k) hi[sf_.upper_idx[k]] = sf_.upper[k];
  for (int j = 0; j < n_; ++j) {
    const bool fl = std::isfinite(lo[j]);
    const bool fh = std::isfinite(hi[j]);
    if (fl && fh) it.x[j] = 0.5 * (lo[j] + hi[j]);
    else if (fl) it.x[j] = std::max(lo[j] + 1.0, 0.0);
    else if (fh) it.x[j] = std::min(hi[j] - 1.0, 0.0);
  }
  it.y = Vec::Zero(me_);
  const Vec slack = sf_.h - sf_.G * it.x;
  it.s = slack.cwiseMax(1.0);
  it.z = Vec::Ones(mi_);
  it.zl = Vec::Ones(nl_);
  it.zu = Vec::Ones(nu_);
}

void Ipm::residuals(const Iterate& it) {
  rd_ = sf_.P * it.x + sf_.c;
  if (me_) rd_ += sf_.A.transpose() * it.y;
  if (mi_) rd_ += sf_.G.transpose() * it.z;
  scatter_add(rd_, sf_.lower_idx, -it.zl);
  scatter_add(rd_, sf_.upper_idx, it.zu);
  rp_ = sf_.A * it.x - sf_.b;
  ri_ = sf_.G * it.x + it.s - sf_.h;
  wl_ = gather(it.x, sf_.lower_idx) - sf_.lower;
  wu_ = sf_.upper - gather(it.x, sf_.upper_idx);
}

double Ipm::mu(const Iterate& it) const {
  if (ncomp_ == 0) return 0.0;
  return (it.s.dot(it.z) + wl_.dot(it.zl) + wu_.dot(it.zu)) / ncomp_;
}

Direction Ipm::newton(const Iterate& it, const Vec& r_sz, const Vec& r_l,
                      const Vec& r_u) {
  Vec rhs(kkt_.dim());
  Vec rx = -rd_;
  scatter_add(rx, sf_.lower_idx, r_l.cwiseQuotient(wl_));
  scatter_add(rx, sf_.upper_idx, -r_u.cwiseQuotient(wu_));
  rhs.head(n_) = rx;
  rhs.segment(n_, me_) = -rp_;
  rhs.tail(mi_) = -ri_ - r_sz.cwiseQuotient(it.z);
  const Vec sol = kkt_.solve(rhs);

  Direction d;
  d.dx = sol.head(n_);
  d.dy = sol.segment(n_, me_);
  d.dz = sol.tail(mi_);
  d.ds = -ri_ - sf_.G * d.dx;
  d.dzl = (r_l - it.zl.cwiseProduct(gather(d.dx, sf_.lower_idx))).cwiseQuotient(wl_);
  d.dzu = (r_u + it.zu.cwiseProduct(gather(d.dx, sf_.upper_idx))).cwiseQuotient(wu_);
  return d;
}

void Ipm::step(Iterate& it, double m) {
    Vec dx_diag = Vec::Zero(n_);
    scatter_add(dx_diag, sf_.lower_idx, it.zl.cwiseQuotient(wl_));
    scatter_add(dx_diag, sf_.upper_idx, it.zu.cwiseQuotient(wu_));
    kkt_.factorize(dx_diag, it.s.cwiseQuotient(it.z));

    // Predictor.
    const Direction aff = newton(it, -it.s.cwiseProduct(it.z), -wl_.cwiseProduct(it.zl),
                                 -wu_.cwiseProduct(it.zu));
    const double ap_aff = std::min({max_step(it.s, aff.ds),
                                    max_step(wl_, gather(aff.dx, sf_.lower_idx)),
                                    max_step(wu_, -gather(aff.dx, sf_.upper_idx))});
    const double ad_aff = std::min({max_step(it.z, aff.dz), max_step(it.zl, aff.dzl),
                                    max_step(it.zu, aff.dzu)});
    double sigma = 0.0;
    if (ncomp_ > 0) {
      const Vec s_a = it.s + ap_aff * aff.ds;
      const Vec z_a = it.z + ad_aff * aff.dz;
      const Vec wl_a = wl_ + ap_aff * gather(aff.dx, sf_.lower_idx);
      const Vec wu_a = wu_ - ap_aff * gather(aff.dx, sf_.upper_idx);
      const Vec zl_a = it.zl + ad_aff * aff.dzl;
      const Vec zu_a = it.zu + ad_aff * aff.dzu;
      const double mu_aff = (s_a.dot(z_a) + wl_a.dot(zl_a) + wu_a.dot(zu_a)) / ncomp_;
      sigma = std::pow(std::clamp(mu_aff / m, 0.0, 1.0), 3);
    }

    // Corrector.
    const Vec dxl = gather(aff.dx, sf_.lower_idx);
    const Vec dxu = gather(aff.dx, sf_.upper_idx);
    const Direction d = newton(
        it,
        Vec::Constant(mi_, sigma * m) - it.s.cwiseProduct(it.z) - aff.ds.cwiseProduct(aff.dz),
        Vec::Constant(nl_, sigma * m) - wl_.cwiseProduct(it.zl) - dxl.cwiseProduct(aff.dzl),
        Vec::Constant(nu_, sigma * m) - wu_.cwiseProduct(it.zu) + dxu.cwiseProduct(aff.dzu));

    double ap = std::min({max_step(it.s, d.ds), max_step(wl_, gather(d.dx, sf_.lower_idx)),
                          max_step(wu_, -gather(d.dx, sf_.upper_idx))});
    double ad = std::min({max_step(it.z, d.dz), max_step(it.zl, d.dzl), max_step(it.zu, d.dzu)});
    ap = std::min(1.0, kStepFraction * ap);
    ad = std::min(1.0, kStepFraction * ad);
    if (!is_lp_) ap = ad = std::min(ap, ad);

    it.x += ap * d.dx;
    it.s += ap * d.ds;
    it.y += ad * d.dy;
    it.z += ad * d.dz;
    it.zl += ad * d.dzl;
    it.zu += ad * d.dzu;
}

SolveResult Ipm::run(Iterate& it) {
  initial_point(it);
  SolveResult result;
  result.status = SolveStatus::kIterationLimit;

  double best_merit = kInf;
  int stall = 0;
  for (int iter = 0; iter <= opts_.max_iterations; ++iter) {
    residuals(it);
    const double m = mu(it);
    const double xPx = it.x.dot(sf_.P * it.x);
    const double pobj = sf_.c.dot(it.x) + 0.5 * xPx;
    double dobj = -0.5 * xPx - sf_.b.dot(it.y) - sf_.h.dot(it.z);
    if (nl_) dobj += sf_.lower.dot(it.zl);
    if (nu_) dobj -= sf_.upper.dot(it.zu);
    const double pres = std::max(inf_norm(rp_), inf_norm(ri_)) / (1.0 + bnorm_);
    const double dres = inf_norm(rd_) / (1.0 + cnorm_);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    result.iterations = iter;
    result.primal_residual = pres;
    result.dual_residual = dres;
    result.relative_gap = gap;

    if (pres <= opts_.tolerance && dres <= opts_.tolerance && gap <= opts_.tolerance) {
      result.status = SolveStatus::kOptimal;
      return result;
    }

    // Infeasibility: the dual iterates align with a Farkas ray.
    {
      const double dnorm = std::max({inf_norm(it.y), inf_norm(it.z), inf_norm(it.zl), inf_norm(it.zu)});
      if (dnorm > 1e8 && pres > opts_.accept_tolerance) {
        Vec ray = Vec::Zero(n_);
        if (me_) ray += sf_.A.transpose() * it.y;
        if (mi_) ray += sf_.G.transpose() * it.z;
        scatter_add(ray, sf_.lower_idx, -it.zl);
        scatter_add(ray, sf_.upper_idx, it.zu);
        const double ray_obj = dobj + 0.5 * xPx;
        if (ray_obj > 1e-6 * dnorm && inf_norm(ray) <= 1e-6 * ray_obj) {
          result.status = SolveStatus::kInfeasible;
          return result;
        }
      }
      const double xnorm = inf_norm(it.x);
      if (xnorm > 1e9 && dres > opts_.accept_tolerance) {
        const Vec dir = it.x / xnorm;
        if (sf_.c.dot(dir) < -1e-8 && inf_norm(sf_.P * dir) <= 1e-6) {
          result.status = SolveStatus::kUnbounded;
          return result;
        }
      }
    }

    const double merit = std::max({pres, dres, gap});
    if (merit < 0.5 * best_merit) {
      best_merit = merit;
      stall = 0;
    } else if (++stall >= 15 || iter == opts_.max_iterations) {
      if (merit <= opts_.accept_tolerance) result.status = SolveStatus::kOptimal;
      return result;
    }
    if (iter == opts_.max_iterations) break;

    try {
      step(it, m);
    } catch (const Error& e) {
      // A breakdown this late means the iterate sits on the boundary; keep it
      // when it already meets the contract.
      if (e.code() != ErrorCode::kNumericalFailure) throw;
      if (merit <= opts_.accept_tolerance) {
        result.status = SolveStatus::kOptimal;
        return result;
      }
      if (!kkt_.increase_regularization()) throw;
    }
  }
  return result;
}

}  // namespace

SolveResult solve_ipm(const QuadraticModel& model, const SolverOptions& options) {
  if (model.objective_linear.size() != static_cast<std::size_t>(model.num_vars) ||
      model.var_lo.size() != static_cast<std::size_t>(model.num_vars) ||
      model.var_hi.size() != static_cast<std::size_t>(model.num_vars)) {
    throw Error(ErrorCode::kDimensionMismatch, "model vectors do not match num_vars");
  }
  const StandardForm sf = standardize(model);
  SolveResult result;
  if (sf.trivially_infeasible) {
    result.status = SolveStatus::kInfeasible;
    return result;
  }

  Iterate it;
  Ipm ipm(sf, options);
  result = ipm.run(it);

  result.point.assign(it.x.data(), it.x.data() + it.x.size());
  result.objective = model.objective(result.point);
  result.duals.assign(model.rows.size(), 0.0);
  for (std::size_t r = 0; r < model.rows.size(); ++r) {
    const RowMap& rm = sf.row_map[r];
    if (rm.kind == RowKind::kEquality) result.duals[r] = it.y[rm.pos] * rm.sign_scale;
    if (rm.kind == RowKind::kInequality) result.duals[r] = it.z[rm.pos] * rm.sign_scale;
  }
  return result;
}

}  // namespace bilicut
