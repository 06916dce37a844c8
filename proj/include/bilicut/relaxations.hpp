#pragma once

#include <array>
#include <utility>

#include "bilicut/instances.hpp"
#include "bilicut/solver.hpp"

namespace bilicut {

enum class Layout { kBilinear, kSymmetric };

/// Index layout of the lifted variable vector.
///   Bilinear:  x → [0, n), y → [n, n+m), W(i,j) → n + m + i·m + j
///   Symmetric: h → [0, n+m), H(i,j) for i ≤ j stored once, row-major over
///              the upper triangle, after h
class VariableMap {
 public:
  VariableMap(Layout layout, std::size_t n, std::size_t m);

  Layout layout() const noexcept { return layout_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  int num_vars() const noexcept { return num_vars_; }

  int x(std::size_t i) const;
  int y(std::size_t j) const;
  int w(std::size_t i, std::size_t j) const;
  int h(std::size_t k) const;
  /// H entry for the unordered pair {a, b}.
  int hh(std::size_t a, std::size_t b) const;

 private:
  Layout layout_;
  std::size_t n_;
  std::size_t m_;
  int num_vars_;
};

/// A relaxation solution (x, y, W), optionally with the symmetric (h, H).
struct LiftedPoint {
  Vector x;
  Vector y;
  DenseMatrix W;
  Vector h;
  DenseMatrix H;

  static LiftedPoint exact(std::span<const double> x, std::span<const double> y);
  /// Flattened vector in the bilinear layout.
  Vector flatten() const;
  static LiftedPoint from_bilinear(const VariableMap& map, std::span<const double> z);
  static LiftedPoint from_symmetric(const VariableMap& map, std::span<const double> z);
};

/// The four McCormick rows for s = p₁p₂ with p₁ ∈ [a1, b1], p₂ ∈ [a2, b2]:
///   I.1  s ≤ b₂p₁ + a₁p₂ − a₁b₂      I.3  s ≥ a₂p₁ + a₁p₂ − a₁a₂
///   I.2  s ≤ a₂p₁ + b₁p₂ − a₂b₁      I.4  s ≥ b₂p₁ + b₁p₂ − b₁b₂
/// Throws kBoundInverted when a > b.
std::array<LinearRow, 4> mccormick_rows(int prod_index, int f1_index, int f2_index,
                                        double a1, double b1, double a2, double b2);

/// Sparse linear form Σ coeffs·z + constant.
struct LinearForm {
  std::vector<std::pair<int, double>> coeffs;
  double constant = 0.0;

  double eval(std::span<const double> z) const;
};

/// McCormick rows for s(z) = p₁(z)·p₂(z) where s, p₁, p₂ are linear forms.
std::array<LinearRow, 4> mccormick_rows(const LinearForm& s, const LinearForm& p1,
                                        const LinearForm& p2, double a1, double b1,
                                        double a2, double b2);

/// min ⟨A,W⟩ + x'Qx + y'Ry with 4nm McCormick rows on W = xy' and the box on
/// x, y as variable bounds; W is otherwise free. Throws kNotConvex.
std::pair<QuadraticModel, VariableMap> build_bmc(const CheckedInstance& inst);

/// min ⟨Γ,H⟩, Γ = [Q ½A; ½A' R], with 4 McCormick rows per unordered pair
/// (diagonal included) over the h-box. Pure LP; valid for nonconvex Q, R.
std::pair<QuadraticModel, VariableMap> build_smc(const CheckedInstance& inst);

/// x'Ay + x'Qx + y'Ry.
double true_objective(const BilinearInstance& inst, std::span<const double> x,
                      std::span<const double> y);

/// Γ = [Q ½A; ½A' R].
DenseMatrix symmetrized_matrix(const BilinearInstance& inst);

/// Per-variable bounds of the bilinear layout implied by the box: x, y from
/// the box, W(i,j) from the corner products.
std::pair<Vector, Vector> lifted_bounds(const BilinearInstance& inst, const VariableMap& map);

/// Bound constraints of a model expressed as rows (for cut-generating LPs).
std::vector<LinearRow> bound_rows(const QuadraticModel& model);

/// Lower bound of a relaxation: solves and returns (objective, point).
/// Throws kNumericalFailure if the solver does not report Optimal.
std::pair<double, Vector> solve_relaxation(const QuadraticModel& model);

}  // namespace bilicut
