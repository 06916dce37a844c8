#pragma once

// Independent reference computations shared by the tests and the acceptance run.

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <vector>

#include "bilicut/relaxations.hpp"
#include "bilicut/rng.hpp"
#include "bilicut/solver.hpp"

namespace oracle {

using namespace bilicut;

inline LinearRow make_row(std::vector<std::pair<int, double>> coeffs, Sense sense, double rhs) {
  LinearRow r;
  for (auto [i, v] : coeffs) r.add(i, v);
  r.sense = sense;
  r.rhs = rhs;
  return r;
}

// Minimum of a bounded LP by brute force over every choice of `dim` active
// constraints among the rows and the finite bounds.
inline double lp_vertex_minimum(const QuadraticModel& lp) {
  const int d = lp.num_vars;
  std::vector<LinearRow> all;
  for (const auto& r : lp.rows) all.push_back(r.as_le());
  for (int i = 0; i < d; ++i) {
    all.push_back(make_row({{i, 1.0}}, Sense::kLe, lp.var_hi[i]));
    all.push_back(make_row({{i, -1.0}}, Sense::kLe, -lp.var_lo[i]));
  }
  const int k = static_cast<int>(all.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(d);
  for (int i = 0; i < d; ++i) pick[i] = i;
  Eigen::MatrixXd M(d, d);
  Eigen::VectorXd b(d);
  while (true) {
    M.setZero();
    for (int r = 0; r < d; ++r) {
      for (auto [j, v] : all[pick[r]].coeffs) M(r, j) += v;
      b[r] = all[pick[r]].rhs;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rank() == d) {
      const Eigen::VectorXd z = lu.solve(b);
      const Vector zv(z.data(), z.data() + d);
      const bool feasible = std::all_of(all.begin(), all.end(),
                                        [&](const LinearRow& r) { return r.violation(zv) <= 1e-9; });
      if (feasible) best = std::min(best, lp.objective(zv));
    }
    int p = d - 1;
    while (p >= 0 && pick[p] == k - d + p) --p;
    if (p < 0) break;
    ++pick[p];
    for (int q = p + 1; q < d; ++q) pick[q] = pick[q - 1] + 1;
  }
  return best;
}

// Random LP in [−1, 1]^d whose rows all pass near an interior point, so it is
// feasible and bounded.
inline QuadraticModel random_box_lp(Xoshiro256& rng, int d, int rows) {
  QuadraticModel lp(d);
  lp.objective_linear.resize(d);
  for (double& c : lp.objective_linear) c = rng.uniform(-1, 1);
  lp.var_lo.assign(d, -1.0);
  lp.var_hi.assign(d, 1.0);
  Vector centre(d);
  for (double& v : centre) v = rng.uniform(-0.5, 0.5);
  for (int r = 0; r < rows; ++r) {
    LinearRow lr;
    for (int j = 0; j < d; ++j) lr.add(j, rng.uniform(-1, 1));
    lr.sense = rng.below(2) ? Sense::kLe : Sense::kGe;
    const double slack = rng.uniform(0.0, 0.5);
    lr.rhs = lr.activity(centre) + (lr.sense == Sense::kLe ? slack : -slack);
    lp.rows.push_back(lr);
  }
  return lp;
}

// (x, y, xy') for a random box point, flattened in the bilinear layout.
// A quarter of the draws put x on a box corner, where relaxations are loosest.
inline Vector sample_lifted(Xoshiro256& rng, const BilinearInstance& inst) {
  Vector x(inst.n), y(inst.m);
  for (std::size_t i = 0; i < inst.n; ++i) x[i] = rng.uniform(inst.ax[i], inst.bx[i]);
  for (std::size_t j = 0; j < inst.m; ++j) y[j] = rng.uniform(inst.ay[j], inst.by[j]);
  if (rng.below(4) == 0)
    for (std::size_t i = 0; i < inst.n; ++i) x[i] = rng.below(2) ? inst.bx[i] : inst.ax[i];
  return LiftedPoint::exact(x, y).flatten();
}

// Exact minimum of a x y over a box: the bilinear term is extremal at a corner.
inline double corner_minimum_1x1(double a, double ax, double bx, double ay, double by) {
  double best = std::numeric_limits<double>::infinity();
  for (double x : {ax, bx})
    for (double y : {ay, by}) best = std::min(best, a * x * y);
  return best;
}

}  // namespace oracle
