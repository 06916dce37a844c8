#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bilicut/error.hpp"
#include "bilicut/instances.hpp"

using namespace bilicut;

namespace {

std::size_t nonzeros(const DenseMatrix& m) {
  return static_cast<std::size_t>(
      std::count_if(m.entries().begin(), m.entries().end(), [](double v) { return v != 0.0; }));
}

// Numerical rank from the eigenvalues of a PSD matrix.
std::size_t psd_rank(const DenseMatrix& m) {
  const EigResult e = sym_eig(m);
  const double top = std::max(1.0, e.eigenvalues.front());
  return static_cast<std::size_t>(std::count_if(e.eigenvalues.begin(), e.eigenvalues.end(),
                                                [&](double v) { return v > 1e-9 * top; }));
}

BilinearInstance tiny() {
  BilinearInstance inst;
  inst.n = 1;
  inst.m = 1;
  inst.A = DenseMatrix{{1}};
  inst.Q = DenseMatrix{{0}};
  inst.R = DenseMatrix{{0}};
  inst.ax = {-1};
  inst.bx = {1};
  inst.ay = {-1};
  inst.by = {1};
  return inst;
}

}  // namespace

TEST_CASE("generate follows the density and rank design") {
  const BilinearInstance inst = generate({20, 4, 1.0, 1.0, 1.0, 1});
  CHECK(nonzeros(inst.A) == 80);
  CHECK(psd_rank(inst.Q) == 20);
  CHECK(psd_rank(inst.R) == 4);
  for (double v : inst.ax) CHECK(v == -1.0);
  for (double v : inst.by) CHECK(v == 1.0);

  const BilinearInstance half = generate({2, 2, 0.5, 0.5, 0.5, 3});
  CHECK(nonzeros(half.A) == 2);
  CHECK(psd_rank(half.Q) == 1);

  const BilinearInstance quarter = generate({20, 8, 0.5, 0.25, 0.75, 9});
  CHECK(nonzeros(quarter.A) == 80);
  CHECK(psd_rank(quarter.Q) == 5);
  CHECK(psd_rank(quarter.R) == 6);
  for (double v : quarter.A.entries()) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("generate is a pure function of its parameters") {
  const GenParams p{6, 5, 0.5, 0.5, 1.0, 42};
  CHECK(to_json(generate(p)) == to_json(generate(p)));
  GenParams other = p;
  other.seed = 43;
  CHECK(to_json(generate(p)) != to_json(generate(other)));
}

TEST_CASE("generate rejects invalid parameters") {
  CHECK_THROWS_AS(generate({0, 3, 1.0, 1.0, 1.0, 0}), Error);
  CHECK_THROWS_AS(generate({3, 3, 0.0, 1.0, 1.0, 0}), Error);
  CHECK_THROWS_AS(generate({3, 3, 1.0, 1.5, 1.0, 0}), Error);
}

TEST_CASE("rank_from_fraction rounds up and stays positive") {
  CHECK(rank_from_fraction(0.25, 20) == 5);
  CHECK(rank_from_fraction(0.25, 4) == 1);
  CHECK(rank_from_fraction(0.75, 8) == 6);
  CHECK(rank_from_fraction(0.01, 4) == 1);
}

TEST_CASE("validate") {
  SUBCASE("generated instances are convex") {
    CHECK(validate(generate({5, 4, 1.0, 0.5, 0.5, 1})).convex());
  }
  SUBCASE("negative eigenvalue is flagged") {
    BilinearInstance inst = tiny();
    inst.Q = DenseMatrix{{-1}};
    CHECK_FALSE(validate(inst).convex());
  }
  SUBCASE("inverted box") {
    BilinearInstance inst = tiny();
    inst.ax = {1};
    inst.bx = {0};
    CHECK_THROWS_WITH_AS(validate(inst), doctest::Contains("BoxInverted"), Error);
  }
  SUBCASE("asymmetric Q") {
    BilinearInstance inst = generate({2, 2, 1.0, 1.0, 1.0, 5});
    inst.Q(0, 1) += 1.0;
    CHECK_THROWS_WITH_AS(validate(inst), doctest::Contains("AsymmetricQ"), Error);
  }
  SUBCASE("non-finite data") {
    BilinearInstance inst = tiny();
    inst.A(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH_AS(validate(inst), doctest::Contains("NonFinite"), Error);
  }
}

TEST_CASE("JSON round trip") {
  const BilinearInstance inst = generate({7, 3, 0.5, 0.75, 0.25, 77});
  CHECK(from_json(to_json(inst)) == inst);
  CHECK(from_json(to_json(tiny())) == tiny());
}

TEST_CASE("JSON parse errors name the field") {
  const std::string text = to_json(tiny());
  std::string no_a = text;
  const auto pos = no_a.find("\"A\"");
  REQUIRE(pos != std::string::npos);
  no_a.replace(pos, 3, "\"Z\"");
  CHECK_THROWS_WITH_AS(from_json(no_a), doctest::Contains("\"A\""), Error);
  CHECK_THROWS_WITH_AS(from_json("{not json"), doctest::Contains("ParseError"), Error);
}
