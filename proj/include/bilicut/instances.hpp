#pragma once

#include <cstdint>
#include <string>

#include "bilicut/linalg.hpp"

namespace bilicut {

/// min x'Ay + x'Qx + y'Ry over ax ≤ x ≤ bx, ay ≤ y ≤ by.
struct BilinearInstance {
  std::size_t n = 0;
  std::size_t m = 0;
  DenseMatrix A;  // n × m
  DenseMatrix Q;  // n × n symmetric
  DenseMatrix R;  // m × m symmetric
  Vector ax, bx;
  Vector ay, by;

  friend bool operator==(const BilinearInstance&, const BilinearInstance&) = default;
};

/// An instance that passed validate(); carries the convexity verdict.
class CheckedInstance {
 public:
  const BilinearInstance& data() const noexcept { return inst_; }
  std::size_t n() const noexcept { return inst_.n; }
  std::size_t m() const noexcept { return inst_.m; }
  bool convex() const noexcept { return convex_; }
  double min_eig_q() const noexcept { return min_eig_q_; }
  double min_eig_r() const noexcept { return min_eig_r_; }

 private:
  friend CheckedInstance validate(BilinearInstance inst);
  BilinearInstance inst_;
  bool convex_ = false;
  double min_eig_q_ = 0.0;
  double min_eig_r_ = 0.0;
};

/// Throws kBoxInverted, kAsymmetricQ (for Q or R), kNonFinite,
/// kDimensionMismatch. Convex means min eigenvalue of Q and R ≥ −1e-8.
CheckedInstance validate(BilinearInstance inst);

struct GenParams {
  std::size_t n = 0;
  std::size_t m = 0;
  double density_A = 1.0;
  double rank_frac_Q = 1.0;
  double rank_frac_R = 1.0;
  std::uint64_t seed = 0;
};

std::size_t rank_from_fraction(double frac, std::size_t dim);

/// Seeded generator. Draw order from one xoshiro256** stream:
///   1. nonzero positions of A: partial Fisher–Yates over the n·m row-major
///      slots, k = ⌈density·n·m⌉ swaps with j = i + below(nm − i);
///   2. values of A on the chosen slots in ascending slot order, U[−1, 1];
///   3. F_Q (n × ⌈rank_frac_Q·n⌉) row-major, U[−1, 1]; Q = F_Q F_Q';
///   4. F_R likewise; R = F_R F_R'.
/// Boxes are [−1, 1] in every coordinate.
BilinearInstance generate(const GenParams& params);

std::string to_json(const BilinearInstance& inst);
/// Parses the schema written by to_json. Throws kParseError naming the
/// offending field (or the parser's line/column).
BilinearInstance from_json(const std::string& text);

}  // namespace bilicut
