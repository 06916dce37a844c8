#include "bilicut/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "bilicut/error.hpp"

namespace bilicut {

void LinearRow::add(int index, double value) {
  for (auto& [idx, coeff] : coeffs) {
    if (idx == index) {
      coeff += value;
      return;
    }
  }
  coeffs.emplace_back(index, value);
}

double LinearRow::activity(std::span<const double> z) const {
  double s = 0.0;
  for (const auto& [idx, coeff] : coeffs) s += coeff * z[static_cast<std::size_t>(idx)];
  return s;
}

double LinearRow::violation(std::span<const double> z) const {
  const double a = activity(z);
  switch (sense) {
    case Sense::kLe: return a - rhs;
    case Sense::kGe: return rhs - a;
    case Sense::kEq: return std::abs(a - rhs);
  }
  return 0.0;
}

LinearRow LinearRow::as_le() const {
  if (sense == Sense::kEq) {
    throw Error(ErrorCode::kDimensionMismatch, "equality row has no single <= form");
  }
  if (sense == Sense::kLe) return *this;
  LinearRow out;
  out.sense = Sense::kLe;
  out.rhs = -rhs;
  out.coeffs.reserve(coeffs.size());
  for (const auto& [idx, coeff] : coeffs) out.coeffs.emplace_back(idx, -coeff);
  return out;
}

QuadraticModel::QuadraticModel(int nvars)
    : num_vars(nvars),
      objective_linear(static_cast<std::size_t>(nvars), 0.0),
      var_lo(static_cast<std::size_t>(nvars), -std::numeric_limits<double>::infinity()),
      var_hi(static_cast<std::size_t>(nvars), std::numeric_limits<double>::infinity()) {}

double QuadraticModel::objective(std::span<const double> z) const {
  double f = objective_constant + dot(objective_linear, z);
  for (const QuadTerm& t : objective_quadratic) {
    const double zi = z[static_cast<std::size_t>(t.i)];
    const double zj = z[static_cast<std::size_t>(t.j)];
    f += (t.i == t.j ? 0.5 : 1.0) * t.value * zi * zj;
  }
  return f;
}

double QuadraticModel::max_violation(std::span<const double> z) const {
  double worst = 0.0;
  for (const LinearRow& r : rows) worst = std::max(worst, r.violation(z));
  for (std::size_t j = 0; j < z.size(); ++j) {
    worst = std::max(worst, var_lo[j] - z[j]);
    worst = std::max(worst, z[j] - var_hi[j]);
  }
  return worst;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnbounded: return "Unbounded";
    case SolveStatus::kIterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

namespace {

class IpmBackend final : public SolverBackend {
 public:
  std::string name() const override { return "ipm"; }
  SolveResult solve(const QuadraticModel& model,
                    const SolverOptions& options) const override {
    return solve_ipm(model, options);
  }
};

struct Registry {
  std::mutex mu;
  std::map<std::string, std::function<std::unique_ptr<SolverBackend>()>> factories{
      {"ipm", [] { return std::make_unique<IpmBackend>(); }}};
  std::string default_name = "ipm";
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_backend(const std::string& name,
                      std::function<std::unique_ptr<SolverBackend>()> factory) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.factories[name] = std::move(factory);
}

std::unique_ptr<SolverBackend> make_backend(const std::string& name) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.factories.find(name);
  if (it == r.factories.end()) {
    throw Error(ErrorCode::kUnknownBackend, "no solver backend named '" + name + "'");
  }
  return it->second();
}

void set_default_backend(const std::string& name) {
  make_backend(name);  // validates
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.default_name = name;
}

std::string default_backend() {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  return r.default_name;
}

SolveResult solve(const QuadraticModel& model, const SolverOptions& options) {
  return make_backend(default_backend())->solve(model, options);
}

}  // namespace bilicut
