#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bilicut/error.hpp"
#include "bilicut/linalg.hpp"
#include "bilicut/rng.hpp"

using namespace bilicut;

namespace {

DenseMatrix random_matrix(std::uint64_t seed, std::size_t r, std::size_t c) {
  Xoshiro256 rng(seed);
  DenseMatrix m(r, c);
  for (double& e : m.entries()) e = rng.uniform(-1.0, 1.0);
  return m;
}

DenseMatrix reconstruct_eig(const EigResult& e) {
  const std::size_t n = e.z.rows();
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < e.eigenvalues.size(); ++k)
        s += e.z(i, k) * e.eigenvalues[k] * e.z(j, k);
      out(i, j) = s;
    }
  return out;
}

double orthonormality_error(const DenseMatrix& q) {
  double worst = 0.0;
  for (std::size_t a = 0; a < q.cols(); ++a)
    for (std::size_t b = 0; b < q.cols(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < q.rows(); ++i) s += q(i, a) * q(i, b);
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST_CASE("sym_eig of a diagonal matrix") {
  const EigResult e = sym_eig(DenseMatrix{{1, 0}, {0, 3}});
  CHECK(e.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(std::abs(e.z(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.z(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig of the swap matrix") {
  const EigResult e = sym_eig(DenseMatrix{{0, 1}, {1, 0}});
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(-1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(e.z(0, 0)) == doctest::Approx(r));
  CHECK(e.z(0, 0) * e.z(1, 0) == doctest::Approx(0.5));
  CHECK(e.z(0, 1) * e.z(1, 1) == doctest::Approx(-0.5));
}

TEST_CASE("sym_eig reconstructs random symmetric matrices") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DenseMatrix f = random_matrix(seed, 5, 5);
    DenseMatrix m(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) m(i, j) = f(i, j) + f(j, i);
    const EigResult e = sym_eig(m);
    CHECK((reconstruct_eig(e) - m).frobenius_norm() <= 1e-9 * m.frobenius_norm());
    CHECK(orthonormality_error(e.z) <= 1e-10);
    for (std::size_t k = 1; k < e.eigenvalues.size(); ++k)
      CHECK(e.eigenvalues[k - 1] >= e.eigenvalues[k]);
  }
}

TEST_CASE("sym_eig of a Gram matrix is PSD") {
  const DenseMatrix g = gram(random_matrix(3, 8, 3));
  for (double lam : sym_eig(g).eigenvalues) CHECK(lam >= -1e-10);
}

TEST_CASE("sym_eig rejects bad input") {
  CHECK_THROWS_WITH_AS(sym_eig(DenseMatrix{{0, 1}, {0, 0}}), doctest::Contains("NonSymmetric"),
                       Error);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sym_eig(DenseMatrix{{nan, 0}, {0, 1}}), Error);
}

TEST_CASE("svd of small fixed matrices") {
  SvdResult s = svd(DenseMatrix{{2, 0}, {0, 1}});
  CHECK(s.singular_values[0] == doctest::Approx(2.0));
  CHECK(s.singular_values[1] == doctest::Approx(1.0));
  s = svd(DenseMatrix{{1, 1}, {1, 1}});
  CHECK(s.singular_values[0] == doctest::Approx(2.0));
  CHECK(s.singular_values[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(count_nonzero_singular(s.singular_values) == 1);
}

TEST_CASE("svd agrees with eigenvalues of M'M") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t r = 1 + seed % 8;
    const std::size_t c = 1 + (seed * 7) % 8;
    const DenseMatrix m = random_matrix(seed, r, c);
    const SvdResult s = svd(m);
    const EigResult e = sym_eig(m.transpose() * m);
    for (std::size_t i = 0; i < s.singular_values.size(); ++i) {
      const double lam = std::max(0.0, e.eigenvalues[i]);
      CHECK(std::abs(s.singular_values[i] - std::sqrt(lam)) <= 1e-8);
    }
    // U Σ V' reconstructs M.
    DenseMatrix back(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        double v = 0.0;
        for (std::size_t k = 0; k < s.singular_values.size(); ++k)
          v += s.u(i, k) * s.singular_values[k] * s.v(j, k);
        back(i, j) = v;
      }
    CHECK((back - m).frobenius_norm() <= 1e-9 * std::max(1.0, m.frobenius_norm()));
    CHECK(orthonormality_error(s.u) <= 1e-10);
    CHECK(orthonormality_error(s.v) <= 1e-10);
  }
}

TEST_CASE("svd sign convention: first nonzero entry of u is nonnegative") {
  const SvdResult s = svd(DenseMatrix{{-3, 0}, {0, -1}});
  for (std::size_t k = 0; k < 2; ++k) {
    double first = 0.0;
    for (std::size_t i = 0; i < 2 && first == 0.0; ++i) first = s.u(i, k);
    CHECK(first > 0.0);
  }
}

TEST_CASE("interval_dot") {
  SUBCASE("mixed signs") {
    const auto [lo, hi] = interval_dot(Vector{1, -2}, Vector{0, 0}, Vector{1, 1});
    CHECK(lo == -2.0);
    CHECK(hi == 1.0);
  }
  SUBCASE("zero form") {
    const auto [lo, hi] = interval_dot(Vector{0, 0}, Vector{-1, -1}, Vector{1, 1});
    CHECK(lo == 0.0);
    CHECK(hi == 0.0);
  }
  SUBCASE("matches corner enumeration") {
    Xoshiro256 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t d = 1 + rng.below(12);
      Vector c(d), lo(d), hi(d);
      for (std::size_t i = 0; i < d; ++i) {
        c[i] = rng.uniform(-2, 2);
        lo[i] = rng.uniform(-1, 0.5);
        hi[i] = lo[i] + rng.uniform(0, 1);
      }
      double best_lo = std::numeric_limits<double>::infinity();
      double best_hi = -best_lo;
      for (std::uint64_t mask = 0; mask < (1ULL << d); ++mask) {
        double v = 0.0;
        for (std::size_t i = 0; i < d; ++i) v += c[i] * ((mask >> i) & 1 ? hi[i] : lo[i]);
        best_lo = std::min(best_lo, v);
        best_hi = std::max(best_hi, v);
      }
      const auto [a, b] = interval_dot(c, lo, hi);
      CHECK(a == doctest::Approx(best_lo).epsilon(1e-12));
      CHECK(b == doctest::Approx(best_hi).epsilon(1e-12));
    }
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(interval_dot(Vector{1}, Vector{0, 0}, Vector{1, 1}), Error);
  }
}
