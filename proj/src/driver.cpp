#include "bilicut/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "bilicut/error.hpp"
#include "bilicut/relaxations.hpp"
#include "bilicut/rng.hpp"

namespace bilicut {

std::string_view to_string(LoopVariant v) {
  switch (v) {
    case LoopVariant::kDisj: return "Disj";
    case LoopVariant::kExtDisj: return "ExtDisj";
    case LoopVariant::kMixed: return "Mixed";
  }
  return "Unknown";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kCutLimit: return "CutLimit";
    case Termination::kNoViolatedCut: return "NoViolatedCut";
    case Termination::kTimeLimit: return "TimeLimit";
    case Termination::kSolverFailure: return "SolverFailure";
  }
  return "Unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

// Rows shared by every CGLP of one round.
std::vector<LinearRow> round_base_rows(const BilinearInstance& inst, const VariableMap& map,
                                       const QuadraticModel& model,
                                       std::span<const SingularPair> pairs,
                                       std::span<const double> z, LoopVariant variant) {
  std::vector<LinearRow> base = model.rows;
  for (LinearRow& r : bound_rows(model)) base.push_back(std::move(r));
  if (variant != LoopVariant::kExtDisj) {
    for (LinearRow& r : unit_vector_rows(inst, map, z)) base.push_back(std::move(r));
    for (const SingularPair& p : pairs)
      for (const QuadraticRow& q : secant_inequalities(separable_form(p.u, p.v, inst), map))
        base.push_back(tangent_linearize(q, z));
  }
  if (variant != LoopVariant::kDisj) {
    for (const SingularPair& p : pairs)
      for (LinearRow& r : extended_mccormick_rows(product_form(p.u, p.v, inst), map))
        base.push_back(std::move(r));
  }
  return base;
}

}  // namespace

BoundTrace cutting_plane(const CheckedInstance& checked, const LoopConfig& config) {
  if (config.max_n_cuts < 1 || config.max_cuts_per_round < 1) {
    throw Error(ErrorCode::kInvalidParams, "max_n_cuts and max_cuts_per_round must be ≥ 1");
  }
  const auto start = Clock::now();
  const auto out_of_time = [&] {
    if (!config.time_limit) return false;
    return std::chrono::duration<double>(Clock::now() - start).count() >= *config.time_limit;
  };

  const BilinearInstance& inst = checked.data();
  auto [model, map] = build_bmc(checked);
  const auto [lo, hi] = lifted_bounds(inst, map);
  const CglpOptions cglp_opts{config.violation_threshold};

  BoundTrace trace;
  Vector z;
  try {
    auto [lb, point] = solve_relaxation(model);
    z = std::move(point);
    trace.root_lb = lb;
    trace.final_lb = lb;
    trace.iterations.push_back({0, lb, 0, 0, 0, 0, {}});
  } catch (const Error& e) {
    trace.termination = Termination::kSolverFailure;
    trace.failure = e.what();
    return trace;
  }
  trace.root_point = z;

  for (int iter = 1;; ++iter) {
    if (trace.total_cuts() >= config.max_n_cuts) {
      trace.termination = Termination::kCutLimit;
      break;
    }
    if (out_of_time()) {
      trace.termination = Termination::kTimeLimit;
      break;
    }
    const LiftedPoint pt = LiftedPoint::from_bilinear(map, z);
    std::vector<SingularPair> pairs = violation_svd(pt.W, pt.x, pt.y);
    const std::size_t sigma_plus = pairs.size();
    trace.iterations.back().sigma_plus = sigma_plus;
    if (pairs.empty()) {
      trace.termination = Termination::kNoViolatedCut;
      break;
    }
    const int room = config.max_n_cuts - trace.total_cuts();
    pairs.resize(std::min<std::size_t>(
        pairs.size(), static_cast<std::size_t>(std::min(config.max_cuts_per_round, room))));

    IterationRecord rec;
    rec.iteration = iter;
    bool timed_out = false;
    std::vector<Cut> accepted;
    try {
      const std::vector<LinearRow> base =
          round_base_rows(inst, map, model, pairs, z, config.variant);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (out_of_time()) {
          timed_out = true;
          break;
        }
        std::optional<Cut> best;
        const auto consider = [&](const Disjunction& d, CutVariant variant) {
          try {
            std::optional<Cut> c = solve_cglp(base, d, z, lo, hi, cglp_opts);
            if (c && (!best || c->violation > best->violation)) {
              c->provenance = {variant, static_cast<int>(k), iter};
              best = std::move(c);
            }
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kCglpNumericalFailure &&
                e.code() != ErrorCode::kNumericalFailure &&
                e.code() != ErrorCode::kDegenerateInterval)
              throw;
            ++rec.cglp_failures;
          }
        };
        if (config.variant != LoopVariant::kExtDisj)
          consider(disjunction_saxena(separable_form(pairs[k].u, pairs[k].v, inst), map, z),
                   CutVariant::kDisj);
        if (config.variant != LoopVariant::kDisj)
          consider(disjunction_mccormick(product_form(pairs[k].u, pairs[k].v, inst), map, z),
                   CutVariant::kExtDisj);
        if (best) accepted.push_back(std::move(*best));
      }
    } catch (const Error& e) {
      trace.termination = Termination::kSolverFailure;
      trace.failure = e.what();
      break;
    }

    if (accepted.empty()) {
      trace.termination = timed_out ? Termination::kTimeLimit : Termination::kNoViolatedCut;
      break;
    }
    for (const Cut& c : accepted) {
      model.rows.push_back(c.row);
      rec.cglp_violations.push_back(c.violation);
      trace.cuts.push_back(c);
    }
    rec.cuts_added = static_cast<int>(accepted.size());
    rec.cumulative_cuts = trace.total_cuts();
    try {
      auto [lb, point] = solve_relaxation(model);
      rec.lb = lb;
      z = std::move(point);
    } catch (const Error& e) {
      rec.lb = trace.final_lb;
      trace.iterations.push_back(std::move(rec));
      trace.termination = Termination::kSolverFailure;
      trace.failure = e.what();
      break;
    }
    trace.final_lb = std::max(trace.final_lb, rec.lb);
    trace.iterations.push_back(std::move(rec));
    if (timed_out) {
      trace.termination = Termination::kTimeLimit;
      break;
    }
  }
  trace.final_point = z;
  return trace;
}

namespace {

// min v'Mv + c'v over lo ≤ v ≤ hi for PSD M, by exact cyclic coordinate
// descent from the given start. Returns the objective.
double box_qp(const DenseMatrix& M, std::span<const double> c, std::span<const double> lo,
              std::span<const double> hi, Vector& v) {
  const std::size_t d = v.size();
  // g = 2Mv + c is kept current under single-coordinate updates.
  Vector g(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = c[i];
    for (std::size_t k = 0; k < d; ++k) s += 2.0 * M(i, k) * v[k];
    g[i] = s;
  }
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double biggest = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double mii = M(i, i);
      double target;
      if (mii > 0.0) {
        target = std::clamp(v[i] - g[i] / (2.0 * mii), lo[i], hi[i]);
      } else if (g[i] > 0.0) {
        target = lo[i];
      } else if (g[i] < 0.0) {
        target = hi[i];
      } else {
        target = v[i];
      }
      const double step = target - v[i];
      if (step == 0.0) continue;
      v[i] = target;
      for (std::size_t k = 0; k < d; ++k) g[k] += 2.0 * M(k, i) * step;
      biggest = std::max(biggest, std::abs(step));
    }
    if (biggest <= 1e-12) break;
  }
  double f = 0.0;
  for (std::size_t i = 0; i < d; ++i) f += v[i] * (0.5 * (g[i] - c[i]) + c[i]);
  return f;
}

}  // namespace

UpperBound upper_bound(const CheckedInstance& checked, int num_starts, std::uint64_t seed) {
  if (!checked.convex()) {
    throw Error(ErrorCode::kNotConvex, "upper_bound needs PSD Q and R");
  }
  const BilinearInstance& inst = checked.data();
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;
  const DenseMatrix At = inst.A.transpose();
  UpperBound best;
  best.z_bar = std::numeric_limits<double>::infinity();
  for (int s = 0; s < std::max(1, num_starts); ++s) {
    Vector x(n);
    Vector y(m);
    if (s == 0) {
      for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * (inst.ax[i] + inst.bx[i]);
      for (std::size_t j = 0; j < m; ++j) y[j] = 0.5 * (inst.ay[j] + inst.by[j]);
    } else {
      Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
      for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(inst.ax[i], inst.bx[i]);
      for (std::size_t j = 0; j < m; ++j) y[j] = rng.uniform(inst.ay[j], inst.by[j]);
    }
    double f = true_objective(inst, x, y);
    for (int round = 0; round < 1000; ++round) {
      box_qp(inst.Q, inst.A * std::span<const double>(y), inst.ax, inst.bx, x);
      box_qp(inst.R, At * std::span<const double>(x), inst.ay, inst.by, y);
      const double f_new = true_objective(inst, x, y);
      const bool stalled = f - f_new <= 1e-8 * std::max(1.0, std::abs(f_new));
      f = f_new;
      if (stalled) break;
    }
    if (f < best.z_bar) {
      best.z_bar = f;
      best.x = x;
      best.y = y;
    }
  }
  return best;
}

Percent relative_gap(double z_bar, double lb) {
  constexpr double kGuard = 1e-8;
  const double denom = std::abs(z_bar);
  if (denom < kGuard) return {(z_bar - lb) / kGuard * 100.0, true};
  return {(z_bar - lb) / denom * 100.0, false};
}

Percent gap_closed(double z_bar, double lb_root, double lb_final) {
  const double root_gap = z_bar - lb_root;
  if (root_gap < 1e-9) return {100.0, true};
  return {std::clamp((lb_final - lb_root) / root_gap * 100.0, 0.0, 100.0), false};
}

}  // namespace bilicut
