#include "bilicut/relaxations.hpp"

#include <algorithm>
#include <cmath>

#include "bilicut/error.hpp"

namespace bilicut {

namespace {

void check_bounds(double a, double b) {
  if (!(a <= b)) {
    throw Error(ErrorCode::kBoundInverted, "McCormick bounds inverted: [" +
                                               std::to_string(a) + ", " + std::to_string(b) + "]");
  }
}

// Appends weight·form into row, then merges duplicate indices (sorted).
void accumulate(LinearRow& row, const LinearForm& form, double weight) {
  if (weight == 0.0) return;
  for (const auto& [idx, c] : form.coeffs) row.coeffs.emplace_back(idx, weight * c);
  row.rhs -= weight * form.constant;
}

void merge_duplicates(LinearRow& row) {
  auto& c = row.coeffs;
  std::sort(c.begin(), c.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (out > 0 && c[out - 1].first == c[k].first) {
      c[out - 1].second += c[k].second;
    } else {
      c[out++] = c[k];
    }
  }
  c.resize(out);
  c.erase(std::remove_if(c.begin(), c.end(), [](const auto& e) { return e.second == 0.0; }),
          c.end());
}

LinearRow make_row(const LinearForm& s, double ws, const LinearForm& p1, double w1,
                   const LinearForm& p2, double w2, Sense sense, double rhs) {
  LinearRow row;
  row.sense = sense;
  row.rhs = rhs;
  accumulate(row, s, ws);
  accumulate(row, p1, w1);
  accumulate(row, p2, w2);
  merge_duplicates(row);
  return row;
}

}  // namespace

VariableMap::VariableMap(Layout layout, std::size_t n, std::size_t m)
    : layout_(layout), n_(n), m_(m) {
  const std::size_t nm = n + m;
  num_vars_ = static_cast<int>(layout == Layout::kBilinear ? nm + n * m
                                                           : nm + nm * (nm + 1) / 2);
}

int VariableMap::x(std::size_t i) const { return static_cast<int>(i); }
int VariableMap::y(std::size_t j) const { return static_cast<int>(n_ + j); }
int VariableMap::w(std::size_t i, std::size_t j) const {
  return static_cast<int>(n_ + m_ + i * m_ + j);
}
int VariableMap::h(std::size_t k) const { return static_cast<int>(k); }
int VariableMap::hh(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  const std::size_t dim = n_ + m_;
  // Rows 0..a-1 of the upper triangle hold dim, dim-1, ... entries.
  return static_cast<int>(dim + a * dim - (a * (a + 1)) / 2 + b);
}

double LinearForm::eval(std::span<const double> z) const {
  double v = constant;
  for (const auto& [idx, c] : coeffs) v += c * z[static_cast<std::size_t>(idx)];
  return v;
}

LiftedPoint LiftedPoint::exact(std::span<const double> x, std::span<const double> y) {
  LiftedPoint p;
  p.x.assign(x.begin(), x.end());
  p.y.assign(y.begin(), y.end());
  p.W = outer(x, y);
  return p;
}

Vector LiftedPoint::flatten() const {
  Vector z;
  z.reserve(x.size() + y.size() + x.size() * y.size());
  z.insert(z.end(), x.begin(), x.end());
  z.insert(z.end(), y.begin(), y.end());
  auto w = W.entries();
  z.insert(z.end(), w.begin(), w.end());
  return z;
}

LiftedPoint LiftedPoint::from_bilinear(const VariableMap& map, std::span<const double> z) {
  LiftedPoint p;
  const std::size_t n = map.n();
  const std::size_t m = map.m();
  p.x.assign(z.begin(), z.begin() + static_cast<long>(n));
  p.y.assign(z.begin() + static_cast<long>(n), z.begin() + static_cast<long>(n + m));
  p.W = DenseMatrix(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) p.W(i, j) = z[static_cast<std::size_t>(map.w(i, j))];
  return p;
}

LiftedPoint LiftedPoint::from_symmetric(const VariableMap& map, std::span<const double> z) {
  LiftedPoint p;
  const std::size_t n = map.n();
  const std::size_t m = map.m();
  const std::size_t dim = n + m;
  p.h.assign(z.begin(), z.begin() + static_cast<long>(dim));
  p.H = DenseMatrix(dim, dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a; b < dim; ++b) {
      const double v = z[static_cast<std::size_t>(map.hh(a, b))];
      p.H(a, b) = v;
      p.H(b, a) = v;
    }
  p.x.assign(p.h.begin(), p.h.begin() + static_cast<long>(n));
  p.y.assign(p.h.begin() + static_cast<long>(n), p.h.end());
  p.W = DenseMatrix(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) p.W(i, j) = p.H(i, n + j);
  return p;
}

std::array<LinearRow, 4> mccormick_rows(const LinearForm& s, const LinearForm& p1,
                                        const LinearForm& p2, double a1, double b1,
                                        double a2, double b2) {
  check_bounds(a1, b1);
  check_bounds(a2, b2);
  return {
      make_row(s, 1.0, p1, -b2, p2, -a1, Sense::kLe, -a1 * b2),
      make_row(s, 1.0, p1, -a2, p2, -b1, Sense::kLe, -a2 * b1),
      make_row(s, 1.0, p1, -a2, p2, -a1, Sense::kGe, -a1 * a2),
      make_row(s, 1.0, p1, -b2, p2, -b1, Sense::kGe, -b1 * b2),
  };
}

std::array<LinearRow, 4> mccormick_rows(int prod_index, int f1_index, int f2_index,
                                        double a1, double b1, double a2, double b2) {
  const LinearForm s{{{prod_index, 1.0}}, 0.0};
  const LinearForm p1{{{f1_index, 1.0}}, 0.0};
  const LinearForm p2{{{f2_index, 1.0}}, 0.0};
  return mccormick_rows(s, p1, p2, a1, b1, a2, b2);
}

std::pair<QuadraticModel, VariableMap> build_bmc(const CheckedInstance& checked) {
  if (!checked.convex()) {
    throw Error(ErrorCode::kNotConvex, "B.Mc needs PSD Q and R (min eigenvalues " +
                                           std::to_string(checked.min_eig_q()) + ", " +
                                           std::to_string(checked.min_eig_r()) + ")");
  }
  const BilinearInstance& inst = checked.data();
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;
  VariableMap map(Layout::kBilinear, n, m);
  QuadraticModel model(map.num_vars());

  for (std::size_t i = 0; i < n; ++i) {
    model.var_lo[i] = inst.ax[i];
    model.var_hi[i] = inst.bx[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    model.var_lo[n + j] = inst.ay[j];
    model.var_hi[n + j] = inst.by[j];
  }
  // ½z'Pz with P = blockdiag(2Q, 2R, 0) reproduces x'Qx + y'Ry.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      if (inst.Q(a, b) != 0.0)
        model.objective_quadratic.push_back({map.x(a), map.x(b), 2.0 * inst.Q(a, b)});
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b)
      if (inst.R(a, b) != 0.0)
        model.objective_quadratic.push_back({map.y(a), map.y(b), 2.0 * inst.R(a, b)});

  model.rows.reserve(4 * n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      model.objective_linear[static_cast<std::size_t>(map.w(i, j))] = inst.A(i, j);
      for (auto& row : mccormick_rows(map.w(i, j), map.x(i), map.y(j), inst.ax[i], inst.bx[i],
                                      inst.ay[j], inst.by[j]))
        model.rows.push_back(std::move(row));
    }
  return {std::move(model), map};
}

std::pair<QuadraticModel, VariableMap> build_smc(const CheckedInstance& checked) {
  const BilinearInstance& inst = checked.data();
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;
  const std::size_t dim = n + m;
  VariableMap map(Layout::kSymmetric, n, m);
  QuadraticModel model(map.num_vars());
  const DenseMatrix gamma = symmetrized_matrix(inst);

  Vector lo(dim);
  Vector hi(dim);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = inst.ax[i];
    hi[i] = inst.bx[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    lo[n + j] = inst.ay[j];
    hi[n + j] = inst.by[j];
  }
  for (std::size_t k = 0; k < dim; ++k) {
    model.var_lo[k] = lo[k];
    model.var_hi[k] = hi[k];
  }
  model.rows.reserve(4 * dim * (dim + 1) / 2);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a; b < dim; ++b) {
      const int idx = map.hh(a, b);
      model.objective_linear[static_cast<std::size_t>(idx)] =
          (a == b ? 1.0 : 2.0) * gamma(a, b);
      for (auto& row : mccormick_rows(idx, map.h(a), map.h(b), lo[a], hi[a], lo[b], hi[b]))
        model.rows.push_back(std::move(row));
    }
  return {std::move(model), map};
}

DenseMatrix symmetrized_matrix(const BilinearInstance& inst) {
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;
  DenseMatrix gamma(n + m, n + m);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) gamma(a, b) = inst.Q(a, b);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) gamma(n + a, n + b) = inst.R(a, b);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      gamma(i, n + j) = 0.5 * inst.A(i, j);
      gamma(n + j, i) = 0.5 * inst.A(i, j);
    }
  return gamma;
}

double true_objective(const BilinearInstance& inst, std::span<const double> x,
                      std::span<const double> y) {
  return bilinear(x, inst.A, y) + bilinear(x, inst.Q, x) + bilinear(y, inst.R, y);
}

std::pair<Vector, Vector> lifted_bounds(const BilinearInstance& inst, const VariableMap& map) {
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;
  Vector lo(static_cast<std::size_t>(map.num_vars()));
  Vector hi(lo.size());
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = inst.ax[i];
    hi[i] = inst.bx[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    lo[n + j] = inst.ay[j];
    hi[n + j] = inst.by[j];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double c[4] = {inst.ax[i] * inst.ay[j], inst.ax[i] * inst.by[j],
                           inst.bx[i] * inst.ay[j], inst.bx[i] * inst.by[j]};
      const auto k = static_cast<std::size_t>(map.w(i, j));
      lo[k] = *std::min_element(c, c + 4);
      hi[k] = *std::max_element(c, c + 4);
    }
  return {std::move(lo), std::move(hi)};
}

std::vector<LinearRow> bound_rows(const QuadraticModel& model) {
  std::vector<LinearRow> rows;
  for (int j = 0; j < model.num_vars; ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (std::isfinite(model.var_lo[k])) {
      rows.push_back(LinearRow{{{j, -1.0}}, Sense::kLe, -model.var_lo[k]});
    }
    if (std::isfinite(model.var_hi[k])) {
      rows.push_back(LinearRow{{{j, 1.0}}, Sense::kLe, model.var_hi[k]});
    }
  }
  return rows;
}

std::pair<double, Vector> solve_relaxation(const QuadraticModel& model) {
  SolveResult res = solve(model);
  if (res.status != SolveStatus::kOptimal) {
    throw Error(ErrorCode::kNumericalFailure,
                "relaxation solve ended with status " + std::string(to_string(res.status)));
  }
  return {res.objective, std::move(res.point)};
}

}  // namespace bilicut
