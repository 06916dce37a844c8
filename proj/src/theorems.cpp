#include "bilicut/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "bilicut/error.hpp"
#include "bilicut/rng.hpp"

namespace bilicut {

namespace {

void require_psd_slack(const DenseMatrix& big, std::span<const double> v, const char* name) {
  const DenseMatrix slack = big - outer(v, v);
  const double lam = min_eigenvalue(slack);
  if (lam < -1e-8) {
    throw Error(ErrorCode::kPsdViolated, std::string(name) + " − outer product has eigenvalue " +
                                             std::to_string(lam));
  }
}

// Bound on z'h over the h-box.
Interval linear_range(std::span<const double> z, std::span<const double> lo,
                      std::span<const double> hi) {
  const auto [a, b] = interval_dot(z, lo, hi);
  return {a, b};
}

}  // namespace

ImplicationReport check_symmetric_implication(const LiftedSample& s, std::span<const double> u,
                                              std::span<const double> v, double tol) {
  const std::size_t n = s.x.size();
  const std::size_t m = s.y.size();
  if (u.size() != n || v.size() != m || s.W.rows() != n || s.W.cols() != m || s.X.rows() != n ||
      s.X.cols() != n || s.Y.rows() != m || s.Y.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "sample shapes do not agree");
  }
  require_psd_slack(s.X, s.x, "X");
  require_psd_slack(s.Y, s.y, "Y");

  const double ux = dot(u, s.x);
  const double vy = dot(v, s.y);
  ImplicationReport r;
  r.bilinear_lhs = bilinear(u, s.W, v) - ux * vy;

  // Direct evaluation of ⟨zz', H⟩ − (z'h)² with z = (u; v)/√2.
  const double zHz = 0.5 * (bilinear(u, s.X, u) + 2.0 * bilinear(u, s.W, v) + bilinear(v, s.Y, v));
  const double zh = (ux + vy) / std::sqrt(2.0);
  r.symmetric_lhs = zHz - zh * zh;

  r.chain_value = 0.5 * ((ux * ux - bilinear(u, s.X, u)) + (vy * vy - bilinear(v, s.Y, v)));
  r.holds = !(r.symmetric_lhs <= tol) || r.bilinear_lhs <= tol;
  return r;
}

bool verify_theorem1(const LiftedSample& sample, std::span<const double> u,
                     std::span<const double> v) {
  const ImplicationReport r = check_symmetric_implication(sample, u, v);
  return r.holds && r.chain_value <= 1e-10;
}

namespace {

Vector uniform_vector(Xoshiro256& rng, std::size_t size, double lo, double hi) {
  Vector v(size);
  for (double& e : v) e = rng.uniform(lo, hi);
  return v;
}

DenseMatrix uniform_matrix(Xoshiro256& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix m(rows, cols);
  for (double& e : m.entries()) e = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

Theorem1SuiteResult theorem1_property_suite(int samples, std::uint64_t seed) {
  Theorem1SuiteResult out;
  for (int s = 0; s < samples; ++s) {
    Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    const std::size_t n = 1 + rng.below(6);
    const std::size_t m = 1 + rng.below(6);
    LiftedSample sample;
    sample.x = uniform_vector(rng, n, -1.0, 1.0);
    sample.y = uniform_vector(rng, m, -1.0, 1.0);
    const Vector u = uniform_vector(rng, n, -1.0, 1.0);
    const Vector v = uniform_vector(rng, m, -1.0, 1.0);
    const DenseMatrix G = uniform_matrix(rng, n, n);
    const DenseMatrix K = uniform_matrix(rng, m, m);
    const double spread = rng.uniform(0.0, 1.0);
    sample.X = outer(sample.x, sample.x);
    sample.Y = outer(sample.y, sample.y);
    const DenseMatrix GG = gram(G);
    const DenseMatrix KK = gram(K);
    for (std::size_t i = 0; i < n * n; ++i) sample.X.entries()[i] += spread * GG.entries()[i];
    for (std::size_t i = 0; i < m * m; ++i) sample.Y.entries()[i] += spread * KK.entries()[i];
    const double kappa = rng.uniform(-2.0, 2.0);
    const double noise = rng.uniform(0.0, 0.5);
    sample.W = outer(sample.x, sample.y);
    const DenseMatrix uv = outer(u, v);
    for (std::size_t i = 0; i < n * m; ++i)
      sample.W.entries()[i] += -kappa * uv.entries()[i] + noise * rng.uniform(-1.0, 1.0);

    const ImplicationReport r = check_symmetric_implication(sample, u, v);
    ++out.samples;
    if (r.symmetric_lhs <= 1e-9) {
      ++out.premise_held;
      if (!r.holds) ++out.falsified;
    }
    out.max_chain = s == 0 ? r.chain_value : std::max(out.max_chain, r.chain_value);
  }
  return out;
}

Theorem2SuiteResult theorem2_property_suite(int draws, std::uint64_t seed) {
  Theorem2SuiteResult out;
  constexpr int kGrid = 101;
  for (int d = 0; d < draws; ++d) {
    Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
    const std::size_t n = 1 + rng.below(5);
    const std::size_t m = 1 + rng.below(5);
    Vector lo_x(n), hi_x(n), lo_y(m), hi_y(m);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.uniform(-2.0, 2.0);
      lo_x[i] = a;
      hi_x[i] = a + rng.uniform(0.1, 2.0);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double a = rng.uniform(-2.0, 2.0);
      lo_y[j] = a;
      hi_y[j] = a + rng.uniform(0.1, 2.0);
    }
    const Vector u = uniform_vector(rng, n, -1.0, 1.0);
    Vector v = uniform_vector(rng, m, -1.0, 1.0);
    const auto [a1, b1] = interval_dot(u, lo_x, hi_x);

    // (i) p₂ is the same form as p₁.
    const ProductBox same{a1, b1, a1, b1};
    for (int k = 0; k < kGrid; ++k) {
      const double p = a1 + (b1 - a1) * k / (kGrid - 1);
      out.max_diagonal_mismatch = std::max(
          out.max_diagonal_mismatch, std::abs(addmc_rhs(same, p, p) - saxmf_rhs(same, p, p)));
    }

    // (ii) v rescaled to give p₂ the width of p₁.
    auto [a2, b2] = interval_dot(v, lo_y, hi_y);
    if (b2 - a2 > 1e-12) {
      const double scale = (b1 - a1) / (b2 - a2);
      for (double& e : v) e *= scale;
      std::tie(a2, b2) = interval_dot(v, lo_y, hi_y);
      const ProductBox equal{a1, b1, a2, b2};
      const auto grid = box_grid(equal, kGrid);
      for (const auto& [p1, p2] : grid)
        out.max_equal_width_excess = std::max(out.max_equal_width_excess,
                                              saxmf_rhs(equal, p1, p2) - addmc_rhs(equal, p1, p2));
    }

    // (iii) an independent second range.
    const double c2 = rng.uniform(-2.0, 2.0);
    const ProductBox unequal{a1, b1, c2, c2 + rng.uniform(0.1, 3.0)};
    const double w = (unequal.a1 - unequal.b1) - (unequal.a2 - unequal.b2);
    out.max_midpoint_error =
        std::max(out.max_midpoint_error, std::abs(midpoint_gap(unequal) - w * w / 16.0));
    ++out.draws;
  }
  return out;
}

double addmc_rhs(const ProductBox& b, double p1, double p2) {
  return 0.5 * ((b.a2 + b.b2) * p1 + (b.a1 + b.b1) * p2 - b.a1 * b.b2 - b.a2 * b.b1);
}

double saxmf_rhs(const ProductBox& b, double p1, double p2) {
  const double sum = b.a1 + b.b1 + b.a2 + b.b2;
  const double q2 = 0.5 * (p1 - p2);
  return 0.25 * sum * (p1 + p2) - 0.25 * (b.a1 + b.a2) * (b.b1 + b.b2) - q2 * q2;
}

std::string_view to_string(Dominance d) {
  switch (d) {
    case Dominance::kEquivalent: return "equivalent";
    case Dominance::kSaxmfDominates: return "saxmf_dominates";
    case Dominance::kAddmcDominates: return "addmc_dominates";
    case Dominance::kIncomparable: return "incomparable";
  }
  return "unknown";
}

DominanceReport compare_addmc_saxmf(const ProductBox& box,
                                    std::span<const std::pair<double, double>> points,
                                    double tol) {
  if (!(box.a1 <= box.b1) || !(box.a2 <= box.b2)) {
    throw Error(ErrorCode::kBoundInverted, "compare_addmc_saxmf: inverted box");
  }
  DominanceReport r;
  if (points.empty()) return r;
  r.min_difference = std::numeric_limits<double>::infinity();
  r.max_difference = -std::numeric_limits<double>::infinity();
  for (const auto& [p1, p2] : points) {
    const double d = addmc_rhs(box, p1, p2) - saxmf_rhs(box, p1, p2);
    r.min_difference = std::min(r.min_difference, d);
    r.max_difference = std::max(r.max_difference, d);
  }
  if (r.min_difference >= -tol && r.max_difference <= tol) {
    r.verdict = Dominance::kEquivalent;
  } else if (r.min_difference >= -tol) {
    r.verdict = Dominance::kSaxmfDominates;
  } else if (r.max_difference <= tol) {
    r.verdict = Dominance::kAddmcDominates;
  } else {
    r.verdict = Dominance::kIncomparable;
  }
  return r;
}

std::vector<std::pair<double, double>> box_grid(const ProductBox& box, int grid) {
  if (grid < 2) throw Error(ErrorCode::kInvalidParams, "box_grid needs at least 2 points per side");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    const double t1 = static_cast<double>(i) / (grid - 1);
    const double p1 = box.a1 + t1 * (box.b1 - box.a1);
    for (int j = 0; j < grid; ++j) {
      const double t2 = static_cast<double>(j) / (grid - 1);
      pts.emplace_back(p1, box.a2 + t2 * (box.b2 - box.a2));
    }
  }
  return pts;
}

double midpoint_gap(const ProductBox& box) {
  const double p1 = 0.5 * (box.a1 + box.b1);
  const double p2 = 0.5 * (box.a2 + box.b2);
  return saxmf_rhs(box, p1, p2) - addmc_rhs(box, p1, p2);
}

SymmetricCutReport symmetric_single_cut(const CheckedInstance& checked) {
  const BilinearInstance& inst = checked.data();
  auto [model, map] = build_smc(checked);
  SymmetricCutReport report;
  auto [lb, z] = solve_relaxation(model);
  report.lb_before = lb;
  report.lb_after = lb;

  const std::size_t dim = inst.n + inst.m;
  Vector hlo(inst.ax);
  hlo.insert(hlo.end(), inst.ay.begin(), inst.ay.end());
  Vector hhi(inst.bx);
  hhi.insert(hhi.end(), inst.by.begin(), inst.by.end());

  const LiftedPoint pt = LiftedPoint::from_symmetric(map, z);
  const EigResult eig = sym_eig(pt.H - outer(pt.h, pt.h));
  report.eigenvalue = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues[0];
  if (!(report.eigenvalue > singular_zero_threshold(eig.eigenvalues))) return report;
  const Vector zvec = eig.z.column(0);

  // t = z'h and ⟨zz', H⟩ as linear forms.
  LinearForm t;
  for (std::size_t a = 0; a < dim; ++a)
    if (zvec[a] != 0.0) t.coeffs.emplace_back(map.h(a), zvec[a]);
  LinearForm zhz;
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a; b < dim; ++b) {
      const double c = (a == b ? 1.0 : 2.0) * zvec[a] * zvec[b];
      if (c != 0.0) zhz.coeffs.emplace_back(map.hh(a, b), c);
    }

  const Interval range = linear_range(zvec, hlo, hhi);
  const double split = split_point(range, t.eval(z));
  Disjunction d;
  d.split = {split, split};
  for (const Interval piece : {Interval{range.lo, split}, Interval{split, range.hi}}) {
    std::vector<LinearRow> rows;
    LinearRow lower{t.coeffs, Sense::kGe, piece.lo};
    LinearRow upper{t.coeffs, Sense::kLe, piece.hi};
    // ⟨zz', H⟩ ≤ t² ≤ (lo+hi)t − lo·hi on the piece.
    LinearRow secant{zhz.coeffs, Sense::kLe, -piece.lo * piece.hi};
    for (const auto& [idx, c] : t.coeffs) secant.add(idx, -(piece.lo + piece.hi) * c);
    rows.push_back(std::move(lower));
    rows.push_back(std::move(upper));
    rows.push_back(std::move(secant));
    d.disjuncts.push_back(std::move(rows));
  }

  // Bounds on every symmetric-layout variable from the h-box.
  Vector lo(static_cast<std::size_t>(map.num_vars()));
  Vector hi(lo.size());
  for (std::size_t a = 0; a < dim; ++a) {
    lo[a] = hlo[a];
    hi[a] = hhi[a];
  }
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a; b < dim; ++b) {
      const auto k = static_cast<std::size_t>(map.hh(a, b));
      if (a == b) {
        const double c1 = hlo[a] * hlo[a];
        const double c2 = hhi[a] * hhi[a];
        lo[k] = (hlo[a] <= 0.0 && hhi[a] >= 0.0) ? 0.0 : std::min(c1, c2);
        hi[k] = std::max(c1, c2);
      } else {
        const double c[4] = {hlo[a] * hlo[b], hlo[a] * hhi[b], hhi[a] * hlo[b], hhi[a] * hhi[b]};
        lo[k] = *std::min_element(c, c + 4);
        hi[k] = *std::max_element(c, c + 4);
      }
    }

  std::vector<LinearRow> base = model.rows;
  for (LinearRow& r : bound_rows(model)) base.push_back(std::move(r));
  const std::optional<Cut> cut = solve_cglp(base, d, z, lo, hi);
  if (!cut) return report;
  report.cut_found = true;
  report.cut_violation = cut->violation;
  model.rows.push_back(cut->row);
  report.lb_after = solve_relaxation(model).first;
  return report;
}

}  // namespace bilicut
