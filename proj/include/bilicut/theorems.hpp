#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bilicut/cuts.hpp"
#include "bilicut/instances.hpp"
#include "bilicut/linalg.hpp"

namespace bilicut {

// ---------------------------------------------------------------------------
// Symmetric versus bilinear lifting inequality.
//
// With h = (x; y), H = [X W; W' Y] and z = (u; v)/√2,
//   ⟨zz', H⟩ − (z'h)²  =  ⟨uv', W⟩ − (u'x)(v'y)  +  ½[u'(X − xx')u + v'(Y − yy')v],
// so whenever X ⪰ xx' and Y ⪰ yy' the symmetric inequality ⟨zz', H⟩ ≤ (z'h)²
// implies the bilinear one ⟨uv', W⟩ ≤ (u'x)(v'y).

struct LiftedSample {
  Vector x;
  Vector y;
  DenseMatrix W;
  DenseMatrix X;
  DenseMatrix Y;
};

struct ImplicationReport {
  double symmetric_lhs = 0.0;  // ⟨zz', H⟩ − (z'h)²
  double bilinear_lhs = 0.0;   // ⟨uv', W⟩ − (u'x)(v'y)
  double chain_value = 0.0;    // ½[u'(xx' − X)u + v'(yy' − Y)v], ≤ 0 under the PSD premise
  bool holds = false;          // symmetric ≤ tol ⇒ bilinear ≤ tol
};

/// Throws kPsdViolated unless X − xx' and Y − yy' are PSD to 1e-8, and
/// kDimensionMismatch on inconsistent shapes.
ImplicationReport check_symmetric_implication(const LiftedSample& sample,
                                              std::span<const double> u,
                                              std::span<const double> v, double tol = 1e-9);

/// True when the implication holds at the sample for the pair (u, v).
bool verify_theorem1(const LiftedSample& sample, std::span<const double> u,
                     std::span<const double> v);

struct Theorem1SuiteResult {
  int samples = 0;
  int premise_held = 0;   // samples where the symmetric inequality held
  int falsified = 0;      // premise held but the bilinear inequality did not
  double max_chain = 0.0;  // largest chain value seen
};

/// Random (x, y, W, X, Y, u, v) with X = xx' + GG', Y = yy' + KK' and W
/// pushed along uv' by a random amount so both outcomes of the premise occur.
Theorem1SuiteResult theorem1_property_suite(int samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Two upper estimates of s = p₁p₂ on [a₁,b₁] × [a₂,b₂].

struct ProductBox {
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
};

/// Average of the two McCormick upper rows:
///   ((a₂+b₂)p₁ + (a₁+b₁)p₂ − a₁b₂ − a₂b₁) / 2
double addmc_rhs(const ProductBox& box, double p1, double p2);

/// Secant of q₁² over the q₁ range minus q₂², with q₁ = (p₁+p₂)/2, q₂ = (p₁−p₂)/2:
///   S(p₁+p₂)/4 − (a₁+a₂)(b₁+b₂)/4 − ((p₁−p₂)/2)²,  S = a₁+b₁+a₂+b₂
double saxmf_rhs(const ProductBox& box, double p1, double p2);

enum class Dominance { kEquivalent, kSaxmfDominates, kAddmcDominates, kIncomparable };
std::string_view to_string(Dominance d);

struct DominanceReport {
  Dominance verdict = Dominance::kEquivalent;
  double min_difference = 0.0;  // min over the grid of addmc − saxmf
  double max_difference = 0.0;
};

/// Classifies addmc − saxmf over the given (p₁, p₂) points: all within tol of
/// zero → equivalent; all ≥ −tol → saxmf dominates (it is the smaller upper
/// estimate); all ≤ tol → addmc dominates; otherwise incomparable.
DominanceReport compare_addmc_saxmf(const ProductBox& box,
                                    std::span<const std::pair<double, double>> points,
                                    double tol = 1e-10);

/// grid × grid uniform points over the box (grid ≥ 2).
std::vector<std::pair<double, double>> box_grid(const ProductBox& box, int grid);

/// saxmf − addmc at the box midpoint; equals ((a₁−b₁) − (a₂−b₂))²/16.
double midpoint_gap(const ProductBox& box);

struct Theorem2SuiteResult {
  int draws = 0;
  double max_diagonal_mismatch = 0.0;  // |addmc − saxmf| on p₁ = p₂, equal ranges
  double max_equal_width_excess = 0.0;  // max of saxmf − addmc when widths agree
  double max_midpoint_error = 0.0;      // |midpoint_gap − ((a₁−b₁)−(a₂−b₂))²/16|
};

/// Draws (u, v, boxes) and the induced ranges of p₁ = u'x and p₂ = v'y:
///   (i) v = u over the same box, compared on a 101-point diagonal grid;
///   (ii) v rescaled so both ranges have equal width, on a 101 × 101 grid;
///   (iii) independent ranges, midpoint gap against its closed form.
Theorem2SuiteResult theorem2_property_suite(int draws, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Single eigenvector cut on the symmetric relaxation.

struct SymmetricCutReport {
  double lb_before = 0.0;
  double lb_after = 0.0;
  double eigenvalue = 0.0;  // top eigenvalue of Ĥ − ĥĥ'
  bool cut_found = false;
  double cut_violation = 0.0;
};

/// Solves the symmetric McCormick relaxation, takes the top eigenvector z of
/// Ĥ − ĥĥ', splits t = z'h at its incumbent value into two secant disjuncts
/// for ⟨zz', H⟩ ≤ t², separates one cut by CGLP and re-solves.
SymmetricCutReport symmetric_single_cut(const CheckedInstance& inst);

}  // namespace bilicut
