#include "bilicut/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "bilicut/error.hpp"
#include "bilicut/relaxations.hpp"
#include "bilicut/rng.hpp"

namespace bilicut {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kSMc: return "S.Mc";
    case Method::kBMc: return "B.Mc";
    case Method::kDisj: return "B.Mc.Disj";
    case Method::kExtDisj: return "B.Mc.ExtDisj";
    case Method::kMixed: return "B.Mc.Mixed";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string key;
  for (char c : name)
    if (c != '.' && c != '_' && c != '-') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key.starts_with("bmc") && key.size() > 3) key.erase(0, 3);
  static const std::map<std::string, Method> table{{"smc", Method::kSMc},
                                                   {"bmc", Method::kBMc},
                                                   {"disj", Method::kDisj},
                                                   {"extdisj", Method::kExtDisj},
                                                   {"mixed", Method::kMixed}};
  const auto it = table.find(key);
  if (it == table.end()) {
    throw Error(ErrorCode::kInvalidParams, "unknown method '" + std::string(name) + "'");
  }
  return it->second;
}

namespace {

std::uint64_t fixed_point(double v) { return static_cast<std::uint64_t>(std::llround(v * 1e6)); }

bool is_cut_method(Method m) {
  return m == Method::kDisj || m == Method::kExtDisj || m == Method::kMixed;
}

LoopVariant loop_variant(Method m) {
  switch (m) {
    case Method::kDisj: return LoopVariant::kDisj;
    case Method::kMixed: return LoopVariant::kMixed;
    default: return LoopVariant::kExtDisj;
  }
}

std::string num(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string frac(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// All methods on one instance. The upper bound is shared by every method.
std::vector<MethodRecord> run_instance(const GenParams& params, const ExperimentConfig& config) {
  std::vector<MethodRecord> out;
  const auto fail_all = [&](const Error& e) {
    for (Method m : config.methods) {
      MethodRecord r;
      r.params = params;
      r.method = m;
      r.status = "failed:" + std::string(to_string(e.code()));
      r.message = e.what();
      r.lb = r.z_bar = r.root_lb = std::nan("");
      r.relative_gap = {std::nan(""), false};
      out.push_back(std::move(r));
    }
    return out;
  };

  BilinearInstance inst;
  std::optional<CheckedInstance> checked;
  UpperBound ub;
  try {
    inst = generate(params);
    if (config.zero_quadratic) {
      inst.Q = DenseMatrix(inst.n, inst.n);
      inst.R = DenseMatrix(inst.m, inst.m);
    }
    checked = validate(inst);
    ub = upper_bound(*checked, config.ub_starts, derive_seed(params.seed, 0x0b));
  } catch (const Error& e) {
    return fail_all(e);
  }

  for (Method method : config.methods) {
    MethodRecord r;
    r.params = params;
    r.method = method;
    r.z_bar = ub.z_bar;
    const auto t0 = Clock::now();
    try {
      if (is_cut_method(method)) {
        if (config.cut_max_n && params.n > *config.cut_max_n) {
          r.status = "skipped";
          r.lb = r.root_lb = std::nan("");
          r.relative_gap = {std::nan(""), false};
          out.push_back(std::move(r));
          continue;
        }
        LoopConfig loop = config.loop;
        loop.variant = loop_variant(method);
        BoundTrace trace = cutting_plane(*checked, loop);
        if (trace.termination == Termination::kSolverFailure && trace.iterations.empty()) {
          throw Error(ErrorCode::kNumericalFailure, trace.failure);
        }
        r.lb = trace.final_lb;
        r.root_lb = trace.root_lb;
        r.cuts = trace.total_cuts();
        r.rounds = static_cast<int>(trace.iterations.size()) - 1;
        r.termination = std::string(to_string(trace.termination));
        r.gap_closed = gap_closed(ub.z_bar, trace.root_lb, trace.final_lb);
        if (trace.termination == Termination::kSolverFailure) r.message = trace.failure;
        r.trace = std::move(trace);
        r.instance = inst;
      } else {
        auto [model, map] = method == Method::kSMc ? build_smc(*checked) : build_bmc(*checked);
        r.lb = r.root_lb = solve_relaxation(model).first;
      }
      r.relative_gap = relative_gap(ub.z_bar, r.lb);
    } catch (const Error& e) {
      r.status = "failed:" + std::string(to_string(e.code()));
      r.message = e.what();
      r.lb = r.root_lb = std::nan("");
      r.relative_gap = {std::nan(""), false};
    }
    r.runtime = seconds_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

auto record_key(const MethodRecord& r) {
  return std::make_tuple(r.params.n, r.params.m, r.params.density_A, r.params.rank_frac_Q,
                         r.params.rank_frac_R, static_cast<int>(r.method));
}

}  // namespace

std::uint64_t instance_seed(std::uint64_t base, std::size_t n, std::size_t m, double density,
                            double rank_frac) {
  std::uint64_t s = derive_seed(base, n);
  s = derive_seed(s, m);
  s = derive_seed(s, fixed_point(density));
  return derive_seed(s, fixed_point(rank_frac));
}

std::vector<GenParams> suite_instances(const ExperimentConfig& config) {
  std::vector<GenParams> out;
  for (const auto& [n, m] : config.dims)
    for (double d : config.densities)
      for (double f : config.rank_fractions)
        out.push_back({n, m, d, f, f, instance_seed(config.seed, n, m, d, f)});
  return out;
}

bool SuiteResult::any_failure() const {
  return std::any_of(records.begin(), records.end(),
                     [](const MethodRecord& r) { return r.status.starts_with("failed"); });
}

SuiteResult run_suite(const ExperimentConfig& config) {
  if (config.jobs < 1) throw Error(ErrorCode::kInvalidParams, "jobs must be ≥ 1");
  if (config.methods.empty()) throw Error(ErrorCode::kInvalidParams, "no methods selected");
  const std::vector<GenParams> instances = suite_instances(config);
  std::vector<std::vector<MethodRecord>> slots(instances.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++)
      slots[i] = run_instance(instances[i], config);
  };
  const int workers = std::min<int>(config.jobs, static_cast<int>(instances.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  SuiteResult result;
  for (auto& s : slots)
    for (auto& r : s) result.records.push_back(std::move(r));
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const MethodRecord& a, const MethodRecord& b) {
                     return record_key(a) < record_key(b);
                   });
  return result;
}

std::string to_csv(const SuiteResult& result) {
  std::string out = std::string(kCsvColumns) + "\n";
  for (const MethodRecord& r : result.records) {
    const GenParams& p = r.params;
    const bool ok = r.status == "ok";
    out += std::to_string(p.n) + "," + std::to_string(p.m) + "," + frac(p.density_A) + "," +
           frac(p.rank_frac_Q) + "," + frac(p.rank_frac_R) + "," +
           std::to_string(rank_from_fraction(p.rank_frac_Q, p.n)) + "," +
           std::to_string(rank_from_fraction(p.rank_frac_R, p.m)) + "," + std::to_string(p.seed) +
           "," + std::string(to_string(r.method)) + "," + r.status + ",";
    out += (ok ? num(r.lb) : "NA") + "," + num(r.z_bar) + ",";
    out += (ok ? num(r.relative_gap.value) : "NA") + ",";
    out += ok ? (r.relative_gap.degenerate ? "1" : "0") : "NA";
    out += ",";
    out += (ok && r.gap_closed) ? num(r.gap_closed->value) : "NA";
    out += ",";
    if (ok && r.trace) {
      out += std::to_string(r.cuts) + "," + std::to_string(r.rounds) + "," + r.termination;
    } else {
      out += "NA,NA,NA";
    }
    out += "\n";
  }
  return out;
}

std::string aggregates_csv(const SuiteResult& result) {
  struct Acc {
    int count = 0;
    double gap = 0.0;
    int closed_count = 0;
    double closed = 0.0;
    double cuts = 0.0;
  };
  // (grouping, n, m, key, method)
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::string, int>;
  std::map<Key, Acc> groups;
  for (const MethodRecord& r : result.records) {
    if (r.status != "ok") continue;
    const int method = static_cast<int>(r.method);
    const std::string rank = frac(r.params.rank_frac_Q) + "/" + frac(r.params.rank_frac_R);
    for (const Key& k : {Key{"nm", r.params.n, r.params.m, "all", method},
                         Key{"rank", r.params.n, r.params.m, rank, method},
                         Key{"density", r.params.n, r.params.m, frac(r.params.density_A), method}}) {
      Acc& a = groups[k];
      ++a.count;
      a.gap += r.relative_gap.value;
      a.cuts += r.cuts;
      if (r.gap_closed) {
        ++a.closed_count;
        a.closed += r.gap_closed->value;
      }
    }
  }
  std::string out = "grouping,n,m,key,method,count,mean_relative_gap,mean_gap_closed,mean_cuts\n";
  for (const auto& [k, a] : groups) {
    const auto& [grouping, n, m, key, method] = k;
    out += grouping + "," + std::to_string(n) + "," + std::to_string(m) + "," + key + "," +
           std::string(to_string(static_cast<Method>(method))) + "," + std::to_string(a.count) +
           "," + num(a.gap / a.count) + "," +
           (a.closed_count ? num(a.closed / a.closed_count) : std::string("NA")) + "," +
           num(a.cuts / a.count) + "\n";
  }
  return out;
}

std::string timings_csv(const SuiteResult& result) {
  std::string out = "n,m,density,rank_frac_q,rank_frac_r,method,seconds\n";
  for (const MethodRecord& r : result.records) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.runtime);
    out += std::to_string(r.params.n) + "," + std::to_string(r.params.m) + "," +
           frac(r.params.density_A) + "," + frac(r.params.rank_frac_Q) + "," +
           frac(r.params.rank_frac_R) + "," + std::string(to_string(r.method)) + "," + buf + "\n";
  }
  return out;
}

std::string traces_json(const SuiteResult& result) {
  using nlohmann::json;
  const auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json runs = json::array();
  for (const MethodRecord& r : result.records) {
    if (!r.trace) continue;
    const BoundTrace& t = *r.trace;
    json iters = json::array();
    for (const IterationRecord& it : t.iterations) {
      iters.push_back({{"iteration", it.iteration},
                       {"lb", finite(it.lb)},
                       {"sigma_plus", it.sigma_plus},
                       {"cuts_added", it.cuts_added},
                       {"cumulative_cuts", it.cumulative_cuts},
                       {"cglp_failures", it.cglp_failures},
                       {"cglp_violations", it.cglp_violations}});
    }
    json cuts = json::array();
    for (const Cut& c : t.cuts) {
      cuts.push_back({{"variant", std::string(to_string(c.provenance.variant))},
                      {"singular_index", c.provenance.singular_index},
                      {"iteration", c.provenance.iteration},
                      {"violation", c.violation},
                      {"nonzeros", c.row.coeffs.size()},
                      {"rhs", c.row.rhs}});
    }
    runs.push_back({{"n", r.params.n},
                    {"m", r.params.m},
                    {"density", r.params.density_A},
                    {"rank_frac_q", r.params.rank_frac_Q},
                    {"rank_frac_r", r.params.rank_frac_R},
                    {"seed", r.params.seed},
                    {"method", std::string(to_string(r.method))},
                    {"z_bar", finite(r.z_bar)},
                    {"root_lb", finite(t.root_lb)},
                    {"final_lb", finite(t.final_lb)},
                    {"termination", std::string(to_string(t.termination))},
                    {"failure", t.failure},
                    {"iterations", iters},
                    {"cuts", cuts}});
  }
  return json{{"runs", runs}}.dump(1);
}

}  // namespace bilicut
