#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "bilicut/instances.hpp"
#include "bilicut/relaxations.hpp"
#include "bilicut/solver.hpp"

namespace bilicut {

/// One left/right singular pair of Ŵ − x̂ŷ'.
struct SingularPair {
  double sigma = 0.0;
  Vector u;
  Vector v;
};

/// Pairs for every singular value above the zero threshold, descending.
std::vector<SingularPair> violation_svd(const DenseMatrix& W_hat, std::span<const double> x_hat,
                                        std::span<const double> y_hat);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// q₁ = (u'x + v'y)/2, q₂ = (u'x − v'y)/2 and r = ⟨uv', W⟩ over the bilinear layout.
/// Feasible points (W = xy') satisfy r = q₁² − q₂².
struct SeparableForm {
  Vector u;
  Vector v;
  Interval q1;
  Interval q2;

  LinearForm q1_form(const VariableMap& map) const;
  LinearForm q2_form(const VariableMap& map) const;
  LinearForm r_form(const VariableMap& map) const;
};

SeparableForm separable_form(std::span<const double> u, std::span<const double> v,
                             const BilinearInstance& inst);

/// A row of the shape  linear(z) + g(z)² ≤ rhs  with g affine.
struct QuadraticRow {
  LinearRow linear;  // sense is always ≤
  LinearForm g;

  double violation(std::span<const double> z) const;
};

/// sec1:  r + q₂² ≤ (l₁+u₁)q₁ − l₁u₁
/// sec2: −r + q₁² ≤ (l₂+u₂)q₂ − l₂u₂
/// The secants are taken over the given intervals for q₁ and q₂.
std::array<QuadraticRow, 2> secant_inequalities(const SeparableForm& form, const VariableMap& map,
                                                const Interval& q1, const Interval& q2);
inline std::array<QuadraticRow, 2> secant_inequalities(const SeparableForm& form,
                                                       const VariableMap& map) {
  return secant_inequalities(form, map, form.q1, form.q2);
}

/// Replaces g² by its tangent 2ĝg − ĝ² at ĝ = g(z_hat); the result is implied by
/// the quadratic row everywhere.
LinearRow tangent_linearize(const QuadraticRow& row, std::span<const double> z_hat);

/// sec1 and sec2 for every (u, v) = (±eᵢ, ±eⱼ), tangent-linearized at z_hat:
/// exactly 8nm rows.
std::vector<LinearRow> unit_vector_rows(const BilinearInstance& inst, const VariableMap& map,
                                        std::span<const double> z_hat);

/// p₁ = u'x, p₂ = v'y, s = ⟨uv', W⟩ with box-derived bounds on p₁, p₂.
struct ProductForm {
  Vector u;
  Vector v;
  Interval p1;
  Interval p2;

  LinearForm p1_form(const VariableMap& map) const;
  LinearForm p2_form(const VariableMap& map) const;
  LinearForm s_form(const VariableMap& map) const;
};

ProductForm product_form(std::span<const double> u, std::span<const double> v,
                         const BilinearInstance& inst);

/// McCormick rows for s = p₁p₂ over the form's p-box.
std::array<LinearRow, 4> extended_mccormick_rows(const ProductForm& form, const VariableMap& map);

/// A union of polyhedra, one row list per disjunct.
struct Disjunction {
  std::vector<std::vector<LinearRow>> disjuncts;
  std::array<double, 2> split{};

  /// True if z satisfies every row of some disjunct to tol.
  bool covers(std::span<const double> z, double tol = 1e-9) const;
};

/// Split point for [lo, hi] at value, clamped into [lo + 5%·width, hi − 5%·width].
/// Throws kDegenerateInterval when the width is below 1e-9.
double split_point(const Interval& range, double value);

/// 4-way disjunction on the q₁ and q₂ ranges split at their values at z_hat.
Disjunction disjunction_saxena(const SeparableForm& form, const VariableMap& map,
                               std::span<const double> z_hat);

/// 4 sub-boxes of the p-box split at p(z_hat), each with its own McCormick rows.
Disjunction disjunction_mccormick(const ProductForm& form, const VariableMap& map,
                                  std::span<const double> z_hat);

enum class CutVariant { kDisj, kExtDisj, kSymmetric };
std::string_view to_string(CutVariant variant);

struct Provenance {
  CutVariant variant = CutVariant::kDisj;
  int singular_index = 0;
  int iteration = 0;
};

struct Cut {
  LinearRow row;  // α'z ≤ β with ‖α‖∞ = 1
  double violation = 0.0;
  Provenance provenance;
};

struct CglpOptions {
  double violation_threshold = 1e-6;
  double zero_tolerance = 1e-10;  // relative to ‖α‖∞
};

/// Cut-generating LP for the disjunction with the base rows added to every
/// disjunct. lo/hi are finite bounds on every lifted variable, valid for the
/// feasible set; they make the returned cut robust to solver inaccuracy.
/// Returns nothing when the best cut is violated by less than the threshold.
/// Throws kCglpNumericalFailure when the LP solve fails.
std::optional<Cut> solve_cglp(std::span<const LinearRow> base_rows, const Disjunction& disjunction,
                              std::span<const double> z_hat, std::span<const double> lo,
                              std::span<const double> hi, const CglpOptions& options = {});

/// Drops rows without coefficients and exact duplicates; returns ≤ rows
/// (equalities become two rows).
std::vector<LinearRow> canonical_le_rows(std::span<const LinearRow> rows);

}  // namespace bilicut
