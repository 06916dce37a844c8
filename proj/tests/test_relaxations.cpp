#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bilicut/error.hpp"
#include "bilicut/relaxations.hpp"
#include "bilicut/rng.hpp"

using namespace bilicut;

namespace {

BilinearInstance unit_instance(std::size_t n, std::size_t m) {
  BilinearInstance inst;
  inst.n = n;
  inst.m = m;
  inst.A = DenseMatrix(n, m);
  inst.Q = DenseMatrix(n, n);
  inst.R = DenseMatrix(m, m);
  inst.ax.assign(n, -1.0);
  inst.bx.assign(n, 1.0);
  inst.ay.assign(m, -1.0);
  inst.by.assign(m, 1.0);
  return inst;
}

int count_rows_on(const QuadraticModel& model, int var) {
  int count = 0;
  for (const auto& r : model.rows)
    for (auto [i, v] : r.coeffs)
      if (i == var) ++count;
  return count;
}

}  // namespace

TEST_CASE("McCormick rows for p1 p2 over [0,1]^2") {
  // Variables: s = 0, p1 = 1, p2 = 2.
  const auto rows = mccormick_rows(0, 1, 2, 0.0, 1.0, 0.0, 1.0);
  SUBCASE("exact products are feasible") {
    for (double p1 : {0.0, 0.3, 1.0})
      for (double p2 : {0.0, 0.7, 1.0}) {
        const Vector z{p1 * p2, p1, p2};
        for (const auto& r : rows) CHECK(r.violation(z) <= 1e-12);
      }
  }
  SUBCASE("the envelope at the centre is [0, 1/2]") {
    const Vector lo{0.0, 0.5, 0.5};
    const Vector hi{0.5, 0.5, 0.5};
    const Vector above{0.5 + 1e-6, 0.5, 0.5};
    const Vector below{-1e-6, 0.5, 0.5};
    for (const auto& r : rows) {
      CHECK(r.violation(lo) <= 1e-12);
      CHECK(r.violation(hi) <= 1e-12);
    }
    double worst_above = -1.0, worst_below = -1.0;
    for (const auto& r : rows) {
      worst_above = std::max(worst_above, r.violation(above));
      worst_below = std::max(worst_below, r.violation(below));
    }
    CHECK(worst_above > 0.0);
    CHECK(worst_below > 0.0);
  }
  SUBCASE("inverted bounds") {
    CHECK_THROWS_WITH_AS(mccormick_rows(0, 1, 2, 1.0, 0.0, 0.0, 1.0),
                         doctest::Contains("BoundInverted"), Error);
  }
}

TEST_CASE("McCormick rows over linear forms agree with the index form") {
  LinearForm s{{{0, 1.0}}, 0.0};
  LinearForm p1{{{1, 1.0}}, 0.0};
  LinearForm p2{{{2, 1.0}}, 0.0};
  const auto a = mccormick_rows(s, p1, p2, -1.0, 2.0, -0.5, 1.5);
  const auto b = mccormick_rows(0, 1, 2, -1.0, 2.0, -0.5, 1.5);
  Xoshiro256 rng(5);
  for (int t = 0; t < 100; ++t) {
    const Vector z{rng.uniform(-3, 3), rng.uniform(-1, 2), rng.uniform(-0.5, 1.5)};
    for (int k = 0; k < 4; ++k) CHECK(a[k].violation(z) == doctest::Approx(b[k].violation(z)));
  }
}

TEST_CASE("B.Mc on a 1x1 instance with A = 1") {
  BilinearInstance inst = unit_instance(1, 1);
  inst.A(0, 0) = 1.0;
  const auto [model, map] = build_bmc(validate(inst));
  CHECK(solve_relaxation(model).first == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("B.Mc with A = 0 and Q = R = 0 is zero") {
  const auto [model, map] = build_bmc(validate(unit_instance(3, 2)));
  CHECK(std::abs(solve_relaxation(model).first) <= 1e-7);
}

TEST_CASE("B.Mc model size for 2x2") {
  const auto [model, map] = build_bmc(validate(unit_instance(2, 2)));
  CHECK(model.num_vars == 8);
  CHECK(model.rows.size() == 16);
  CHECK(map.w(1, 1) == 7);
  CHECK(map.y(0) == 2);
  // Each W entry appears in exactly its own four rows.
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(count_rows_on(model, map.w(i, j)) == 4);
}

TEST_CASE("B.Mc rejects nonconvex instances") {
  BilinearInstance inst = unit_instance(1, 1);
  inst.Q(0, 0) = -1.0;
  CHECK_THROWS_WITH_AS(build_bmc(validate(inst)), doctest::Contains("NotConvex"), Error);
  // S.Mc is an LP and accepts the same data.
  const auto [model, map] = build_smc(validate(inst));
  CHECK(model.objective_quadratic.empty());
}

TEST_CASE("S.Mc on small instances") {
  SUBCASE("1x1 with A = 1") {
    BilinearInstance inst = unit_instance(1, 1);
    inst.A(0, 0) = 1.0;
    const auto [model, map] = build_smc(validate(inst));
    CHECK(solve_relaxation(model).first == doctest::Approx(-1.0).epsilon(1e-7));
  }
  SUBCASE("identity quadratic terms, A = 0") {
    // Diagonal McCormick only gives H(k,k) ≥ max(2h−1, −2h−1), which is −1 at h = 0.
    BilinearInstance inst = unit_instance(2, 3);
    inst.Q = DenseMatrix::identity(2);
    inst.R = DenseMatrix::identity(3);
    const auto [model, map] = build_smc(validate(inst));
    CHECK(solve_relaxation(model).first == doctest::Approx(-5.0).epsilon(1e-7));
  }
  SUBCASE("negative identity reaches the box corners") {
    BilinearInstance inst = unit_instance(2, 3);
    inst.Q = DenseMatrix::identity(2);
    inst.R = DenseMatrix::identity(3);
    for (std::size_t i = 0; i < 2; ++i) inst.Q(i, i) = -1.0;
    for (std::size_t j = 0; j < 3; ++j) inst.R(j, j) = -1.0;
    const auto [model, map] = build_smc(validate(inst));
    CHECK(solve_relaxation(model).first == doctest::Approx(-5.0).epsilon(1e-7));
  }
  SUBCASE("2x2 model size") {
    const auto [model, map] = build_smc(validate(unit_instance(2, 2)));
    CHECK(model.num_vars == 4 + 10);
    CHECK(model.rows.size() == 40);
    CHECK(map.hh(1, 3) == map.hh(3, 1));
  }
}

TEST_CASE("true objective and the symmetrized matrix") {
  BilinearInstance inst = unit_instance(1, 1);
  inst.A(0, 0) = 2.0;
  inst.Q(0, 0) = 1.0;
  inst.R(0, 0) = 3.0;
  CHECK(true_objective(inst, Vector{1}, Vector{-1}) == doctest::Approx(2.0));
  CHECK(true_objective(inst, Vector{0.5}, Vector{0.5}) == doctest::Approx(1.5));

  const BilinearInstance g = generate({4, 3, 0.5, 0.5, 1.0, 8});
  const DenseMatrix gamma = symmetrized_matrix(g);
  CHECK(gamma == gamma.transpose());
  Xoshiro256 rng(1);
  for (int t = 0; t < 50; ++t) {
    Vector x(4), y(3), h;
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : y) v = rng.uniform(-1, 1);
    h = x;
    h.insert(h.end(), y.begin(), y.end());
    CHECK(bilinear(h, gamma, h) == doctest::Approx(true_objective(g, x, y)).epsilon(1e-12));
  }
}

TEST_CASE("relaxation bounds never exceed sampled objective values") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const BilinearInstance inst = generate({4, 3, 1.0, 0.5, 0.5, seed});
    const CheckedInstance checked = validate(inst);
    const double bmc = solve_relaxation(build_bmc(checked).first).first;
    const double smc = solve_relaxation(build_smc(checked).first).first;
    Xoshiro256 rng(seed * 31);
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 2000; ++t) {
      Vector x(4), y(3);
      for (double& v : x) v = rng.uniform(-1, 1);
      for (double& v : y) v = rng.uniform(-1, 1);
      best = std::min(best, true_objective(inst, x, y));
    }
    CHECK(bmc <= best + 1e-7);
    CHECK(smc <= best + 1e-7);
  }
}

TEST_CASE("lifted points flatten into the bilinear layout") {
  const Vector x{0.5, -1};
  const Vector y{0.25};
  const LiftedPoint p = LiftedPoint::exact(x, y);
  const VariableMap map(Layout::kBilinear, 2, 1);
  const Vector z = p.flatten();
  REQUIRE(z.size() == static_cast<std::size_t>(map.num_vars()));
  CHECK(z[map.w(1, 0)] == doctest::Approx(-0.25));
  const LiftedPoint back = LiftedPoint::from_bilinear(map, z);
  CHECK(back.W == p.W);
  const auto [lo, hi] = lifted_bounds(unit_instance(2, 1), map);
  CHECK(lo[map.w(0, 0)] == -1.0);
  CHECK(hi[map.w(0, 0)] == 1.0);
}
