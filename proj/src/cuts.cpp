#include "bilicut/cuts.hpp"

#include <algorithm>
#include <cmath>

#include "bilicut/error.hpp"

namespace bilicut {

namespace {

// Σ weight·form, with duplicate indices merged and exact zeros dropped.
LinearForm combine(std::initializer_list<std::pair<const LinearForm*, double>> terms) {
  LinearForm out;
  for (const auto& [form, weight] : terms) {
    if (weight == 0.0) continue;
    for (const auto& [idx, c] : form->coeffs) out.coeffs.emplace_back(idx, weight * c);
    out.constant += weight * form->constant;
  }
  auto& c = out.coeffs;
  std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t k = 0;
  for (std::size_t p = 0; p < c.size(); ++p) {
    if (k > 0 && c[k - 1].first == c[p].first) {
      c[k - 1].second += c[p].second;
    } else {
      c[k++] = c[p];
    }
  }
  c.resize(k);
  std::erase_if(c, [](const auto& e) { return e.second == 0.0; });
  return out;
}

// The row  form ≤ 0  (or ≥ 0) with the constant moved to the right side.
LinearRow row_of(const LinearForm& form, Sense sense) {
  return LinearRow{form.coeffs, sense, -form.constant};
}

LinearForm x_part(std::span<const double> u, const VariableMap& map, double scale) {
  LinearForm f;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0.0) f.coeffs.emplace_back(map.x(i), scale * u[i]);
  return f;
}

LinearForm y_part(std::span<const double> v, const VariableMap& map, double scale) {
  LinearForm f;
  for (std::size_t j = 0; j < v.size(); ++j)
    if (v[j] != 0.0) f.coeffs.emplace_back(map.y(j), scale * v[j]);
  return f;
}

LinearForm w_part(std::span<const double> u, std::span<const double> v, const VariableMap& map) {
  LinearForm f;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    for (std::size_t j = 0; j < v.size(); ++j)
      if (v[j] != 0.0) f.coeffs.emplace_back(map.w(i, j), u[i] * v[j]);
  }
  return f;
}

Interval range_of(std::span<const double> cx, std::span<const double> cy,
                  const BilinearInstance& inst) {
  Vector c(cx.begin(), cx.end());
  c.insert(c.end(), cy.begin(), cy.end());
  Vector lo(inst.ax);
  lo.insert(lo.end(), inst.ay.begin(), inst.ay.end());
  Vector hi(inst.bx);
  hi.insert(hi.end(), inst.by.begin(), inst.by.end());
  const auto [a, b] = interval_dot(c, lo, hi);
  return {a, b};
}

Vector scaled(std::span<const double> v, double s) {
  Vector out(v.begin(), v.end());
  for (double& e : out) e *= s;
  return out;
}

// lo ≤ f ≤ hi as two rows.
void push_interval_rows(std::vector<LinearRow>& rows, const LinearForm& f, const Interval& iv) {
  LinearForm lower = f;
  lower.constant -= iv.lo;
  rows.push_back(row_of(lower, Sense::kGe));
  LinearForm upper = f;
  upper.constant -= iv.hi;
  rows.push_back(row_of(upper, Sense::kLe));
}

std::array<Interval, 2> halves(const Interval& range, double split) {
  return {Interval{range.lo, split}, Interval{split, range.hi}};
}

}  // namespace

std::vector<SingularPair> violation_svd(const DenseMatrix& W_hat, std::span<const double> x_hat,
                                        std::span<const double> y_hat) {
  if (W_hat.rows() != x_hat.size() || W_hat.cols() != y_hat.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "violation_svd: W is not x by y");
  }
  const SvdResult s = svd(W_hat - outer(x_hat, y_hat));
  const std::size_t count = count_nonzero_singular(s.singular_values);
  std::vector<SingularPair> pairs;
  pairs.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    pairs.push_back({s.singular_values[k], s.u.column(k), s.v.column(k)});
  return pairs;
}

LinearForm SeparableForm::q1_form(const VariableMap& map) const {
  const LinearForm fx = x_part(u, map, 0.5);
  const LinearForm fy = y_part(v, map, 0.5);
  return combine({{&fx, 1.0}, {&fy, 1.0}});
}

LinearForm SeparableForm::q2_form(const VariableMap& map) const {
  const LinearForm fx = x_part(u, map, 0.5);
  const LinearForm fy = y_part(v, map, 0.5);
  return combine({{&fx, 1.0}, {&fy, -1.0}});
}

LinearForm SeparableForm::r_form(const VariableMap& map) const { return w_part(u, v, map); }

SeparableForm separable_form(std::span<const double> u, std::span<const double> v,
                             const BilinearInstance& inst) {
  if (u.size() != inst.n || v.size() != inst.m) {
    throw Error(ErrorCode::kDimensionMismatch, "separable_form: u, v do not match the instance");
  }
  SeparableForm f;
  f.u.assign(u.begin(), u.end());
  f.v.assign(v.begin(), v.end());
  const Vector hu = scaled(u, 0.5);
  const Vector hv = scaled(v, 0.5);
  f.q1 = range_of(hu, hv, inst);
  f.q2 = range_of(hu, scaled(v, -0.5), inst);
  return f;
}

double QuadraticRow::violation(std::span<const double> z) const {
  const double g_val = g.eval(z);
  return linear.activity(z) + g_val * g_val - linear.rhs;
}

std::array<QuadraticRow, 2> secant_inequalities(const SeparableForm& form, const VariableMap& map,
                                                const Interval& q1, const Interval& q2) {
  const LinearForm f1 = form.q1_form(map);
  const LinearForm f2 = form.q2_form(map);
  const LinearForm r = form.r_form(map);
  // r − (l+u)q + lu ≤ 0 with the g² term kept aside.
  LinearForm lin1 = combine({{&r, 1.0}, {&f1, -(q1.lo + q1.hi)}});
  lin1.constant += q1.lo * q1.hi;
  LinearForm lin2 = combine({{&r, -1.0}, {&f2, -(q2.lo + q2.hi)}});
  lin2.constant += q2.lo * q2.hi;
  return {QuadraticRow{row_of(lin1, Sense::kLe), f2}, QuadraticRow{row_of(lin2, Sense::kLe), f1}};
}

LinearRow tangent_linearize(const QuadraticRow& row, std::span<const double> z_hat) {
  const double g_hat = row.g.eval(z_hat);
  // g² ≥ 2ĝg − ĝ², so substituting the tangent keeps the row valid.
  LinearForm lin{row.linear.coeffs, -row.linear.rhs};
  LinearForm tangent = combine({{&lin, 1.0}, {&row.g, 2.0 * g_hat}});
  tangent.constant -= g_hat * g_hat;
  return row_of(tangent, Sense::kLe);
}

std::vector<LinearRow> unit_vector_rows(const BilinearInstance& inst, const VariableMap& map,
                                        std::span<const double> z_hat) {
  std::vector<LinearRow> rows;
  rows.reserve(8 * inst.n * inst.m);
  Vector u(inst.n, 0.0);
  Vector v(inst.m, 0.0);
  for (std::size_t i = 0; i < inst.n; ++i)
    for (std::size_t j = 0; j < inst.m; ++j)
      for (double su : {1.0, -1.0})
        for (double sv : {1.0, -1.0}) {
          u[i] = su;
          v[j] = sv;
          const SeparableForm form = separable_form(u, v, inst);
          for (const QuadraticRow& q : secant_inequalities(form, map))
            rows.push_back(tangent_linearize(q, z_hat));
          u[i] = 0.0;
          v[j] = 0.0;
        }
  return rows;
}

LinearForm ProductForm::p1_form(const VariableMap& map) const { return x_part(u, map, 1.0); }
LinearForm ProductForm::p2_form(const VariableMap& map) const { return y_part(v, map, 1.0); }
LinearForm ProductForm::s_form(const VariableMap& map) const { return w_part(u, v, map); }

ProductForm product_form(std::span<const double> u, std::span<const double> v,
                         const BilinearInstance& inst) {
  if (u.size() != inst.n || v.size() != inst.m) {
    throw Error(ErrorCode::kDimensionMismatch, "product_form: u, v do not match the instance");
  }
  ProductForm f;
  f.u.assign(u.begin(), u.end());
  f.v.assign(v.begin(), v.end());
  const auto [a1, b1] = interval_dot(u, inst.ax, inst.bx);
  const auto [a2, b2] = interval_dot(v, inst.ay, inst.by);
  f.p1 = {a1, b1};
  f.p2 = {a2, b2};
  return f;
}

std::array<LinearRow, 4> extended_mccormick_rows(const ProductForm& form, const VariableMap& map) {
  return mccormick_rows(form.s_form(map), form.p1_form(map), form.p2_form(map), form.p1.lo,
                        form.p1.hi, form.p2.lo, form.p2.hi);
}

bool Disjunction::covers(std::span<const double> z, double tol) const {
  return std::any_of(disjuncts.begin(), disjuncts.end(), [&](const std::vector<LinearRow>& rows) {
    return std::all_of(rows.begin(), rows.end(),
                       [&](const LinearRow& r) { return r.violation(z) <= tol; });
  });
}

double split_point(const Interval& range, double value) {
  const double w = range.width();
  if (!(w >= 1e-9)) {
    throw Error(ErrorCode::kDegenerateInterval,
                "cannot split an interval of width " + std::to_string(w));
  }
  return std::clamp(value, range.lo + 0.05 * w, range.hi - 0.05 * w);
}

Disjunction disjunction_saxena(const SeparableForm& form, const VariableMap& map,
                               std::span<const double> z_hat) {
  const LinearForm f1 = form.q1_form(map);
  const LinearForm f2 = form.q2_form(map);
  Disjunction d;
  d.split = {split_point(form.q1, f1.eval(z_hat)), split_point(form.q2, f2.eval(z_hat))};
  for (const Interval& i1 : halves(form.q1, d.split[0]))
    for (const Interval& i2 : halves(form.q2, d.split[1])) {
      std::vector<LinearRow> rows;
      push_interval_rows(rows, f1, i1);
      push_interval_rows(rows, f2, i2);
      for (const QuadraticRow& q : secant_inequalities(form, map, i1, i2))
        rows.push_back(tangent_linearize(q, z_hat));
      d.disjuncts.push_back(std::move(rows));
    }
  return d;
}

Disjunction disjunction_mccormick(const ProductForm& form, const VariableMap& map,
                                  std::span<const double> z_hat) {
  const LinearForm p1 = form.p1_form(map);
  const LinearForm p2 = form.p2_form(map);
  const LinearForm s = form.s_form(map);
  Disjunction d;
  d.split = {split_point(form.p1, p1.eval(z_hat)), split_point(form.p2, p2.eval(z_hat))};
  for (const Interval& i1 : halves(form.p1, d.split[0]))
    for (const Interval& i2 : halves(form.p2, d.split[1])) {
      std::vector<LinearRow> rows;
      push_interval_rows(rows, p1, i1);
      push_interval_rows(rows, p2, i2);
      for (LinearRow& r : mccormick_rows(s, p1, p2, i1.lo, i1.hi, i2.lo, i2.hi))
        rows.push_back(std::move(r));
      d.disjuncts.push_back(std::move(rows));
    }
  return d;
}

std::string_view to_string(CutVariant variant) {
  switch (variant) {
    case CutVariant::kDisj: return "Disj";
    case CutVariant::kExtDisj: return "ExtDisj";
    case CutVariant::kSymmetric: return "Symmetric";
  }
  return "Unknown";
}

}  // namespace bilicut
