// Cut-generating LP over a disjunction of polyhedra P_k = {z : C_k z ≤ c_k}:
//
//   max  α'ẑ − β
//   s.t. α = C_k'μ_k,  β ≥ c_k'μ_k,  μ_k ≥ 0   for every k,
//        Σ_k 1'μ_k = 1.
//
// The solver's multipliers are only approximately feasible, so the returned
// right-hand side is recomputed from the multipliers with the residual
// α − C_k'μ_k bounded over the variable box.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "bilicut/cuts.hpp"
#include "bilicut/error.hpp"

namespace bilicut {

namespace {

bool row_less(const LinearRow& a, const LinearRow& b) {
  if (a.coeffs != b.coeffs) return a.coeffs < b.coeffs;
  return a.rhs < b.rhs;
}

bool row_equal(const LinearRow& a, const LinearRow& b) {
  return a.coeffs == b.coeffs && a.rhs == b.rhs;
}

void push_canonical(std::vector<LinearRow>& out, LinearRow row) {
  auto& c = row.coeffs;
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
  double scale = 0.0;
  for (const auto& e : c) scale = std::max(scale, std::abs(e.second));
  if (scale == 0.0) {
    // 0 ≤ rhs: vacuous when rhs ≥ 0, otherwise an empty polyhedron.
    if (row.rhs >= 0.0) return;
    row.rhs = -1.0;
    out.push_back(std::move(row));
    return;
  }
  for (auto& e : c) e.second /= scale;
  row.rhs /= scale;
  out.push_back(std::move(row));
}

// Bound of (coeff·z) over lo ≤ z ≤ hi.
double max_over_box(double coeff, double lo, double hi) {
  if (coeff == 0.0) return 0.0;
  return std::max(coeff * lo, coeff * hi);
}

}  // namespace

std::vector<LinearRow> canonical_le_rows(std::span<const LinearRow> rows) {
  std::vector<LinearRow> out;
  out.reserve(rows.size());
  for (const LinearRow& r : rows) {
    if (r.sense == Sense::kEq) {
      push_canonical(out, LinearRow{r.coeffs, Sense::kLe, r.rhs});
      push_canonical(out, LinearRow{r.coeffs, Sense::kGe, r.rhs}.as_le());
    } else {
      push_canonical(out, r.as_le());
    }
  }
  std::sort(out.begin(), out.end(), row_less);
  out.erase(std::unique(out.begin(), out.end(), row_equal), out.end());
  return out;
}

std::optional<Cut> solve_cglp(std::span<const LinearRow> base_rows, const Disjunction& disjunction,
                              std::span<const double> z_hat, std::span<const double> lo,
                              std::span<const double> hi, const CglpOptions& options) {
  const int dim = static_cast<int>(z_hat.size());
  if (lo.size() != z_hat.size() || hi.size() != z_hat.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_cglp: bounds do not match the point");
  }
  const std::size_t nk = disjunction.disjuncts.size();
  if (nk == 0) return std::nullopt;

  const std::vector<LinearRow> base = canonical_le_rows(base_rows);
  std::vector<std::vector<LinearRow>> systems;
  systems.reserve(nk);
  for (const auto& rows : disjunction.disjuncts) {
    std::vector<LinearRow> own = canonical_le_rows(rows);
    std::vector<LinearRow> merged;
    merged.reserve(base.size() + own.size());
    std::set_union(base.begin(), base.end(), own.begin(), own.end(), std::back_inserter(merged),
                   row_less);
    systems.push_back(std::move(merged));
  }
  for (const auto& sys : systems)
    for (const LinearRow& r : sys)
      for (const auto& [idx, c] : r.coeffs)
        if (idx < 0 || idx >= dim) {
          throw Error(ErrorCode::kDimensionMismatch, "solve_cglp: row index out of range");
        }

  // Variables: α (dim), β, then μ_k blocks.
  const int beta = dim;
  std::vector<int> offset(nk + 1);
  offset[0] = dim + 1;
  for (std::size_t k = 0; k < nk; ++k)
    offset[k + 1] = offset[k] + static_cast<int>(systems[k].size());
  const int nvars = offset[nk];

  QuadraticModel lp(nvars);
  for (int j = 0; j < dim; ++j) lp.objective_linear[static_cast<std::size_t>(j)] = -z_hat[j];
  lp.objective_linear[static_cast<std::size_t>(beta)] = 1.0;
  for (int j = offset[0]; j < nvars; ++j) lp.var_lo[static_cast<std::size_t>(j)] = 0.0;
  // Rows are scaled to unit max-coefficient and Σμ = 1, so |α_j| ≤ 1 and
  // |β| ≤ max|c| at the optimum. Finite bounds keep the interior point
  // iteration away from free-variable pivots without cutting anything off.
  double rhs_max = 0.0;
  for (const auto& sys : systems)
    for (const LinearRow& r : sys) rhs_max = std::max(rhs_max, std::abs(r.rhs));
  for (int j = 0; j < dim; ++j) {
    lp.var_lo[static_cast<std::size_t>(j)] = -2.0;
    lp.var_hi[static_cast<std::size_t>(j)] = 2.0;
  }
  lp.var_lo[static_cast<std::size_t>(beta)] = -2.0 * rhs_max - 1.0;
  lp.var_hi[static_cast<std::size_t>(beta)] = 2.0 * rhs_max + 1.0;

  LinearRow normalization{{}, Sense::kEq, 1.0};
  normalization.coeffs.reserve(static_cast<std::size_t>(nvars - offset[0]));
  for (std::size_t k = 0; k < nk; ++k) {
    std::vector<LinearRow> alpha_rows(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) alpha_rows[static_cast<std::size_t>(j)] = {{{j, 1.0}}, Sense::kEq, 0.0};
    LinearRow beta_row{{{beta, 1.0}}, Sense::kGe, 0.0};
    for (std::size_t r = 0; r < systems[k].size(); ++r) {
      const int mu = offset[k] + static_cast<int>(r);
      const LinearRow& row = systems[k][r];
      for (const auto& [idx, c] : row.coeffs)
        alpha_rows[static_cast<std::size_t>(idx)].coeffs.emplace_back(mu, -c);
      if (row.rhs != 0.0) beta_row.coeffs.emplace_back(mu, -row.rhs);
      normalization.coeffs.emplace_back(mu, 1.0);
    }
    for (auto& r : alpha_rows) lp.rows.push_back(std::move(r));
    lp.rows.push_back(std::move(beta_row));
  }
  lp.rows.push_back(std::move(normalization));

  SolverOptions lp_options;
  lp_options.tolerance = 1e-7;
  lp_options.accept_tolerance = 1e-6;
  const SolveResult res = solve(lp, lp_options);
  if (res.status != SolveStatus::kOptimal) {
    throw Error(ErrorCode::kCglpNumericalFailure,
                "cut-generating LP ended with status " + std::string(to_string(res.status)));
  }
  if (-res.objective <= 0.0) return std::nullopt;

  Vector alpha(res.point.begin(), res.point.begin() + dim);
  double alpha_max = 0.0;
  for (double a : alpha) alpha_max = std::max(alpha_max, std::abs(a));
  if (alpha_max == 0.0) return std::nullopt;
  for (double& a : alpha)
    if (std::abs(a) < options.zero_tolerance * alpha_max) a = 0.0;

  // For z in P_k:  α'z = μ'C_k z + (α − C_k'μ)'z ≤ μ'c_k + max_box (α − C_k'μ)'z.
  double beta_safe = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nk; ++k) {
    Vector resid = alpha;
    double rhs = 0.0;
    for (std::size_t r = 0; r < systems[k].size(); ++r) {
      const double mu = std::max(0.0, res.point[static_cast<std::size_t>(offset[k]) + r]);
      if (mu == 0.0) continue;
      const LinearRow& row = systems[k][r];
      for (const auto& [idx, c] : row.coeffs) resid[static_cast<std::size_t>(idx)] -= mu * c;
      rhs += mu * row.rhs;
    }
    for (int j = 0; j < dim; ++j) rhs += max_over_box(resid[j], lo[j], hi[j]);
    beta_safe = std::max(beta_safe, rhs);
  }

  alpha_max = 0.0;
  for (double a : alpha) alpha_max = std::max(alpha_max, std::abs(a));
  Cut cut;
  cut.row.sense = Sense::kLe;
  for (int j = 0; j < dim; ++j)
    if (alpha[j] != 0.0) cut.row.coeffs.emplace_back(j, alpha[j] / alpha_max);
  cut.row.rhs = beta_safe / alpha_max;
  cut.violation = cut.row.activity(z_hat) - cut.row.rhs;
  if (!(cut.violation > options.violation_threshold)) return std::nullopt;
  return cut;
}

}  // namespace bilicut
