#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bilicut/linalg.hpp"

namespace bilicut {

enum class Sense { kLe, kGe, kEq };

/// Sparse linear row  Σ coeff·z[index]  (≤ | ≥ | =)  rhs.
struct LinearRow {
  std::vector<std::pair<int, double>> coeffs;
  Sense sense = Sense::kLe;
  double rhs = 0.0;

  /// Adds value to the coefficient of index, merging duplicates.
  void add(int index, double value);
  double activity(std::span<const double> z) const;
  /// Amount by which z violates the row (≤ 0 when satisfied).
  double violation(std::span<const double> z) const;
  /// Same row as an equivalent ≤ row (≥ negated); rejects =.
  LinearRow as_le() const;
};

/// Entry of the symmetric objective matrix P; store i ≤ j once.
struct QuadTerm {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

/// min c'z + ½ z'Pz + constant  s.t. rows, var_lo ≤ z ≤ var_hi.
/// P must be PSD; an LP is the case P = 0. Bounds may be ±∞.
struct QuadraticModel {
  int num_vars = 0;
  Vector objective_linear;
  std::vector<QuadTerm> objective_quadratic;
  double objective_constant = 0.0;
  std::vector<LinearRow> rows;
  Vector var_lo;
  Vector var_hi;

  explicit QuadraticModel(int nvars = 0);
  double objective(std::span<const double> z) const;
  /// Max violation over rows and bounds.
  double max_violation(std::span<const double> z) const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };
std::string_view to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::kIterationLimit;
  Vector point;
  double objective = 0.0;
  Vector duals;  // one per row; ≥ 0 for ≤ rows in the Lagrangian c + Σ dual·a
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
};

struct SolverOptions {
  int max_iterations = 200;
  double tolerance = 1e-9;       // target on residuals and relative gap
  double accept_tolerance = 1e-7;  // contract level when progress stalls
};

/// Pluggable solver seam. The reference backend is "ipm".
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const QuadraticModel& model,
                            const SolverOptions& options) const = 0;
};

/// Register a backend factory under a name usable as "solver.backend".
void register_backend(const std::string& name,
                      std::function<std::unique_ptr<SolverBackend>()> factory);
std::unique_ptr<SolverBackend> make_backend(const std::string& name);

/// Solve with the process-wide default backend (see set_default_backend).
SolveResult solve(const QuadraticModel& model, const SolverOptions& options = {});
void set_default_backend(const std::string& name);
std::string default_backend();

/// Mehrotra predictor-corrector primal-dual interior point method.
/// Throws kNumericalFailure when the KKT factorization breaks down.
SolveResult solve_ipm(const QuadraticModel& model, const SolverOptions& options = {});

}  // namespace bilicut
