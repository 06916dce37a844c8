#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bilicut/error.hpp"
#include "bilicut/rng.hpp"
#include "bilicut/solver.hpp"
#include "oracles.hpp"

using namespace bilicut;

using oracle::make_row;

TEST_CASE("small fixed LP") {
  // min x + 2y  s.t.  x + y ≥ 2, x ≤ 1, y ≤ 3, x,y ≥ 0  → x=1, y=1, obj 3
  QuadraticModel lp(2);
  lp.objective_linear = {1, 2};
  lp.rows.push_back(make_row({{0, 1}, {1, 1}}, Sense::kGe, 2));
  lp.var_lo = {0, 0};
  lp.var_hi = {1, 3};
  const SolveResult r = solve(lp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(r.point[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.point[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(r.duals[0]) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("box-constrained QP") {
  // min ½x² − 2x over [−1, 1]  → x = 1, obj −1.5
  QuadraticModel qp(1);
  qp.objective_linear = {-2};
  qp.objective_quadratic.push_back({0, 0, 1.0});
  qp.var_lo = {-1};
  qp.var_hi = {1};
  const SolveResult r = solve(qp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.point[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(-1.5).epsilon(1e-7));
}

TEST_CASE("QP with a coupling row") {
  // min x² + y²  s.t. x + y ≥ 1  → x = y = ½, obj ½ (P = 2I)
  QuadraticModel qp(2);
  qp.objective_linear = {0, 0};
  qp.objective_quadratic = {{0, 0, 2.0}, {1, 1, 2.0}};
  qp.rows.push_back(make_row({{0, 1}, {1, 1}}, Sense::kGe, 1));
  qp.var_lo = {-10, -10};
  qp.var_hi = {10, 10};
  const SolveResult r = solve(qp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(r.point[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("equality rows and free variables") {
  // min x − y  s.t. x + y = 1, x ≥ 0, y ≤ 4, y free below  → x = 0, y = 1, obj −1
  QuadraticModel lp(2);
  lp.objective_linear = {1, -1};
  lp.rows.push_back(make_row({{0, 1}, {1, 1}}, Sense::kEq, 1));
  const double inf = std::numeric_limits<double>::infinity();
  lp.var_lo = {0, -inf};
  lp.var_hi = {inf, 4};
  const SolveResult r = solve(lp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("random bounded LPs match vertex enumeration") {
  Xoshiro256 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(5));
    const QuadraticModel lp = oracle::random_box_lp(rng, d, static_cast<int>(rng.below(7)));
    const SolveResult res = solve(lp);
    REQUIRE(res.status == SolveStatus::kOptimal);
    CAPTURE(trial);
    CHECK(std::abs(res.objective - oracle::lp_vertex_minimum(lp)) <= 1e-6);
    CHECK(lp.max_violation(res.point) <= 1e-6);
  }
}

TEST_CASE("infeasible and unbounded problems") {
  QuadraticModel bad(1);
  bad.objective_linear = {1};
  bad.rows.push_back(make_row({{0, 1}}, Sense::kGe, 2));
  bad.var_lo = {0};
  bad.var_hi = {1};
  CHECK(solve(bad).status == SolveStatus::kInfeasible);

  QuadraticModel open(1);
  open.objective_linear = {-1};
  open.var_lo = {0};
  open.var_hi = {std::numeric_limits<double>::infinity()};
  CHECK(solve(open).status == SolveStatus::kUnbounded);
}

TEST_CASE("backend registry") {
  CHECK(default_backend() == "ipm");
  CHECK(make_backend("ipm")->name() == "ipm");
  CHECK_THROWS_WITH_AS(make_backend("no-such-solver"), doctest::Contains("UnknownBackend"), Error);
  CHECK_THROWS_AS(set_default_backend("no-such-solver"), Error);

  struct Fixed : SolverBackend {
    std::string name() const override { return "fixed"; }
    SolveResult solve(const QuadraticModel& m, const SolverOptions&) const override {
      SolveResult r;
      r.status = SolveStatus::kOptimal;
      r.point.assign(m.num_vars, 0.0);
      r.objective = 42.0;
      return r;
    }
  };
  register_backend("fixed", [] { return std::make_unique<Fixed>(); });
  set_default_backend("fixed");
  CHECK(solve(QuadraticModel(1)).objective == 42.0);
  set_default_backend("ipm");
  CHECK(default_backend() == "ipm");
}

TEST_CASE("LinearRow helpers") {
  LinearRow r;
  r.add(0, 1.0);
  r.add(0, 2.0);
  r.add(3, -1.0);
  r.sense = Sense::kGe;
  r.rhs = 1.0;
  REQUIRE(r.coeffs.size() == 2);
  const Vector z{1, 0, 0, 1};
  CHECK(r.activity(z) == 2.0);
  CHECK(r.violation(z) == -1.0);
  const LinearRow le = r.as_le();
  CHECK(le.rhs == -1.0);
  CHECK(le.violation(z) == -1.0);
  r.sense = Sense::kEq;
  CHECK_THROWS_AS(r.as_le(), Error);
}
