#include "bilicut/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "bilicut/error.hpp"
#include "bilicut/rng.hpp"

namespace bilicut {

namespace {

using nlohmann::json;

constexpr double kSymTol = 1e-12;
constexpr double kPsdTol = 1e-8;

bool symmetric(const DenseMatrix& s) {
  const double scale = std::max(1.0, s.max_abs());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j)
      if (std::abs(s(i, j) - s(j, i)) > kSymTol * scale) return false;
  return true;
}

bool finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

void require_shape(const DenseMatrix& mat, std::size_t r, std::size_t c,
                   const char* name) {
  if (mat.rows() != r || mat.cols() != c) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + " must be " + std::to_string(r) + "x" +
                    std::to_string(c));
  }
}

void require_len(const Vector& v, std::size_t len, const char* name) {
  if (v.size() != len) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + " must have length " + std::to_string(len));
  }
}

json matrix_json(const DenseMatrix& mat) {
  json rows = json::array();
  for (std::size_t i = 0; i < mat.rows(); ++i) {
    auto r = mat.row(i);
    rows.push_back(json(std::vector<double>(r.begin(), r.end())));
  }
  return rows;
}

const json& field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) {
    throw Error(ErrorCode::kParseError, std::string("missing field \"") + name + "\"");
  }
  return *it;
}

std::size_t parse_count(const json& doc, const char* name) {
  const json& f = field(doc, name);
  if (!f.is_number_unsigned() && !(f.is_number_integer() && f.get<long long>() >= 0)) {
    throw Error(ErrorCode::kParseError,
                std::string("field \"") + name + "\" must be a nonnegative integer");
  }
  return f.get<std::size_t>();
}

Vector parse_vector(const json& doc, const char* name, std::size_t len) {
  const json& f = field(doc, name);
  if (!f.is_array()) {
    throw Error(ErrorCode::kParseError, std::string("field \"") + name + "\" must be an array");
  }
  Vector out;
  out.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f[i].is_number()) {
      throw Error(ErrorCode::kParseError, std::string("field \"") + name + "\"[" +
                                              std::to_string(i) + "] is not a number");
    }
    out.push_back(f[i].get<double>());
  }
  if (out.size() != len) {
    throw Error(ErrorCode::kParseError, std::string("field \"") + name +
                                            "\" has length " + std::to_string(out.size()) +
                                            ", expected " + std::to_string(len));
  }
  return out;
}

DenseMatrix parse_matrix(const json& doc, const char* name, std::size_t rows,
                         std::size_t cols) {
  const json& f = field(doc, name);
  if (!f.is_array() || f.size() != rows) {
    throw Error(ErrorCode::kParseError, std::string("field \"") + name + "\" must be an array of " +
                                            std::to_string(rows) + " rows");
  }
  DenseMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& r = f[i];
    if (!r.is_array() || r.size() != cols) {
      throw Error(ErrorCode::kParseError, std::string("field \"") + name + "\" row " +
                                              std::to_string(i) + " must have " +
                                              std::to_string(cols) + " entries");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!r[j].is_number()) {
        throw Error(ErrorCode::kParseError, std::string("field \"") + name + "\"[" +
                                                std::to_string(i) + "][" + std::to_string(j) +
                                                "] is not a number");
      }
      out(i, j) = r[j].get<double>();
    }
  }
  return out;
}

}  // namespace

CheckedInstance validate(BilinearInstance inst) {
  require_shape(inst.A, inst.n, inst.m, "A");
  require_shape(inst.Q, inst.n, inst.n, "Q");
  require_shape(inst.R, inst.m, inst.m, "R");
  require_len(inst.ax, inst.n, "ax");
  require_len(inst.bx, inst.n, "bx");
  require_len(inst.ay, inst.m, "ay");
  require_len(inst.by, inst.m, "by");

  if (!inst.A.all_finite() || !inst.Q.all_finite() || !inst.R.all_finite() ||
      !finite(inst.ax) || !finite(inst.bx) || !finite(inst.ay) || !finite(inst.by)) {
    throw Error(ErrorCode::kNonFinite, "instance data contains NaN/Inf");
  }
  for (std::size_t i = 0; i < inst.n; ++i)
    if (inst.ax[i] > inst.bx[i]) {
      throw Error(ErrorCode::kBoxInverted, "ax > bx at index " + std::to_string(i));
    }
  for (std::size_t j = 0; j < inst.m; ++j)
    if (inst.ay[j] > inst.by[j]) {
      throw Error(ErrorCode::kBoxInverted, "ay > by at index " + std::to_string(j));
    }
  if (!symmetric(inst.Q)) throw Error(ErrorCode::kAsymmetricQ, "Q is not symmetric");
  if (!symmetric(inst.R)) throw Error(ErrorCode::kAsymmetricQ, "R is not symmetric");

  CheckedInstance out;
  out.min_eig_q_ = min_eigenvalue(inst.Q);
  out.min_eig_r_ = min_eigenvalue(inst.R);
  out.convex_ = out.min_eig_q_ >= -kPsdTol && out.min_eig_r_ >= -kPsdTol;
  out.inst_ = std::move(inst);
  return out;
}

std::size_t rank_from_fraction(double frac, std::size_t dim) {
  const auto r = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(dim) - 1e-9));
  return std::clamp<std::size_t>(r, 1, dim);
}

BilinearInstance generate(const GenParams& p) {
  auto in_unit = [](double f) { return f > 0.0 && f <= 1.0; };
  if (p.n == 0 || p.m == 0 || !in_unit(p.density_A) || !in_unit(p.rank_frac_Q) ||
      !in_unit(p.rank_frac_R)) {
    throw Error(ErrorCode::kInvalidParams,
                "need n, m ≥ 1 and density/rank fractions in (0, 1]");
  }
  Xoshiro256 rng(p.seed);
  const std::size_t n = p.n;
  const std::size_t m = p.m;
  const std::size_t slots = n * m;
  const std::size_t nnz = rank_from_fraction(p.density_A, slots);

  std::vector<std::size_t> perm(slots);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < nnz; ++i) {
    const std::size_t j = i + rng.below(slots - i);
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::size_t> chosen(perm.begin(), perm.begin() + nnz);
  std::sort(chosen.begin(), chosen.end());

  BilinearInstance inst;
  inst.n = n;
  inst.m = m;
  inst.A = DenseMatrix(n, m);
  for (std::size_t slot : chosen) {
    double v = rng.uniform(-1.0, 1.0);
    // A zero draw would silently lower the nonzero count.
    while (v == 0.0) v = rng.uniform(-1.0, 1.0);
    inst.A(slot / m, slot % m) = v;
  }

  auto factor = [&](std::size_t dim, double frac) {
    DenseMatrix f(dim, rank_from_fraction(frac, dim));
    for (double& e : f.entries()) e = rng.uniform(-1.0, 1.0);
    return f;
  };
  inst.Q = gram(factor(n, p.rank_frac_Q));
  inst.R = gram(factor(m, p.rank_frac_R));
  inst.ax.assign(n, -1.0);
  inst.bx.assign(n, 1.0);
  inst.ay.assign(m, -1.0);
  inst.by.assign(m, 1.0);
  return inst;
}

std::string to_json(const BilinearInstance& inst) {
  json doc;
  doc["n"] = inst.n;
  doc["m"] = inst.m;
  doc["A"] = matrix_json(inst.A);
  doc["Q"] = matrix_json(inst.Q);
  doc["R"] = matrix_json(inst.R);
  doc["ax"] = inst.ax;
  doc["bx"] = inst.bx;
  doc["ay"] = inst.ay;
  doc["by"] = inst.by;
  return doc.dump();
}

BilinearInstance from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "top level must be an object");
  BilinearInstance inst;
  inst.n = parse_count(doc, "n");
  inst.m = parse_count(doc, "m");
  inst.A = parse_matrix(doc, "A", inst.n, inst.m);
  inst.Q = parse_matrix(doc, "Q", inst.n, inst.n);
  inst.R = parse_matrix(doc, "R", inst.m, inst.m);
  inst.ax = parse_vector(doc, "ax", inst.n);
  inst.bx = parse_vector(doc, "bx", inst.n);
  inst.ay = parse_vector(doc, "ay", inst.m);
  inst.by = parse_vector(doc, "by", inst.m);
  return inst;
}

}  // namespace bilicut
