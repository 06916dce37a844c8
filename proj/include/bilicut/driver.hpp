#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bilicut/cuts.hpp"
#include "bilicut/instances.hpp"

namespace bilicut {

enum class LoopVariant { kDisj, kExtDisj, kMixed };
std::string_view to_string(LoopVariant v);

struct LoopConfig {
  LoopVariant variant = LoopVariant::kExtDisj;
  int max_n_cuts = 40;
  int max_cuts_per_round = 4;  // a round adds at most min(this, σ₊) cuts
  double violation_threshold = 1e-6;
  std::optional<double> time_limit;  // wall-clock seconds
};

enum class Termination { kCutLimit, kNoViolatedCut, kTimeLimit, kSolverFailure };
std::string_view to_string(Termination t);

struct IterationRecord {
  int iteration = 0;
  double lb = 0.0;
  std::size_t sigma_plus = 0;
  int cuts_added = 0;
  int cumulative_cuts = 0;
  int cglp_failures = 0;
  std::vector<double> cglp_violations;  // one per accepted cut
};

struct BoundTrace {
  std::vector<IterationRecord> iterations;
  double root_lb = 0.0;
  double final_lb = 0.0;  // best bound seen
  Termination termination = Termination::kNoViolatedCut;
  std::string failure;  // message when termination is kSolverFailure
  std::vector<Cut> cuts;
  Vector root_point;   // bilinear layout
  Vector final_point;  // bilinear layout

  int total_cuts() const { return static_cast<int>(cuts.size()); }
};

/// Solves B.Mc and then repeatedly separates disjunctive cuts along the top
/// singular pairs of Ŵ − x̂ŷ'. Throws kNotConvex; other failures end the
/// loop with kSolverFailure and the partial trace.
BoundTrace cutting_plane(const CheckedInstance& inst, const LoopConfig& config = {});

struct UpperBound {
  double z_bar = 0.0;
  Vector x;
  Vector y;
};

/// Multistart alternating minimization. Start 0 is the box center, the
/// others are drawn uniformly from the box. Each half-step is a convex box
/// QP solved by exact cyclic coordinate descent.
UpperBound upper_bound(const CheckedInstance& inst, int num_starts = 32, std::uint64_t seed = 0);

struct Percent {
  double value = 0.0;
  bool degenerate = false;  // denominator hit its guard
};

/// (z̄ − lb) / max(|z̄|, 1e-8) · 100.
Percent relative_gap(double z_bar, double lb);

/// (lb_final − lb_root) / (z̄ − lb_root) · 100, clamped to [0, 100].
/// A root gap below 1e-9 reports 100 with the degenerate flag set.
Percent gap_closed(double z_bar, double lb_root, double lb_final);

}  // namespace bilicut
