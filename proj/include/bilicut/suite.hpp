#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bilicut/driver.hpp"
#include "bilicut/instances.hpp"

namespace bilicut {

enum class Method { kSMc, kBMc, kDisj, kExtDisj, kMixed };

/// "S.Mc", "B.Mc", "B.Mc.Disj", "B.Mc.ExtDisj", "B.Mc.Mixed".
std::string_view to_string(Method m);
/// Accepts the names above and the short forms smc, bmc, disj, extdisj, mixed
/// (case-insensitive). Throws kInvalidParams.
Method parse_method(std::string_view name);

struct ExperimentConfig {
  std::vector<std::pair<std::size_t, std::size_t>> dims{
      {20, 4}, {20, 8}, {20, 16}, {20, 20}, {100, 4}, {100, 20}, {100, 40}, {100, 80}};
  std::vector<double> densities{0.5, 1.0};
  // Q and R share the rank fraction, giving 8 instances per (n, m).
  std::vector<double> rank_fractions{0.25, 0.5, 0.75, 1.0};
  std::uint64_t seed = 20240901;
  std::vector<Method> methods{Method::kSMc, Method::kBMc};
  LoopConfig loop;
  int ub_starts = 32;
  bool zero_quadratic = false;          // drop Q and R after generation
  std::optional<std::size_t> cut_max_n = 20;  // cut loops skip larger n
  int jobs = 1;
};

/// Instance parameters in suite order. The seed of each instance depends on
/// (seed, n, m, density, rank) only, so any sub-suite reproduces the same data.
std::vector<GenParams> suite_instances(const ExperimentConfig& config);
std::uint64_t instance_seed(std::uint64_t base, std::size_t n, std::size_t m, double density,
                            double rank_frac);

struct MethodRecord {
  GenParams params;
  Method method = Method::kBMc;
  std::string status = "ok";  // ok, skipped, failed:<ErrorCode>
  std::string message;
  double lb = 0.0;
  double root_lb = 0.0;
  double z_bar = 0.0;
  Percent relative_gap;
  std::optional<Percent> gap_closed;  // cut methods only
  int cuts = 0;
  int rounds = 0;
  std::string termination;
  double runtime = 0.0;  // seconds, excluded from the CSV
  std::optional<BoundTrace> trace;
  BilinearInstance instance;  // kept for cut loops so cuts can be audited
};

struct SuiteResult {
  std::vector<MethodRecord> records;  // sorted by (n, m, density, rank, method)
  bool any_failure() const;
};

SuiteResult run_suite(const ExperimentConfig& config);

/// Fixed schema; see kCsvColumns. Non-finite or missing numbers print "NA".
inline constexpr const char* kCsvColumns =
    "n,m,density,rank_frac_q,rank_frac_r,rank_q,rank_r,seed,method,status,lb,z_bar,"
    "relative_gap,gap_degenerate,gap_closed,cuts,rounds,termination";
std::string to_csv(const SuiteResult& result);

/// Means per (n, m, method), per (n, m, rank, method) and per (n, m, density, method).
std::string aggregates_csv(const SuiteResult& result);

/// n, m, density, rank, method, seconds. Not deterministic.
std::string timings_csv(const SuiteResult& result);

/// Full iteration traces of the cut methods as one JSON document.
std::string traces_json(const SuiteResult& result);

}  // namespace bilicut
