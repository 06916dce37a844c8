#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "bilicut/config.hpp"
#include "bilicut/driver.hpp"
#include "bilicut/error.hpp"
#include "bilicut/instances.hpp"
#include "bilicut/plot.hpp"
#include "bilicut/relaxations.hpp"
#include "bilicut/solver.hpp"
#include "bilicut/suite.hpp"
#include "bilicut/theorems.hpp"

namespace fs = std::filesystem;
using namespace bilicut;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidParams, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidParams, "cannot write " + path.string());
  out << text;
}

bool is_numerical(ErrorCode c) {
  return c == ErrorCode::kNumericalFailure || c == ErrorCode::kCglpNumericalFailure ||
         c == ErrorCode::kDegenerateInterval || c == ErrorCode::kPsdViolated;
}

// Flags that mirror config keys. Values are applied after the config file and
// BILICUT_SEED, so the command line always wins.
struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_option(flag, values[key], help));
  }
  void apply(HarnessConfig& config) const {
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) apply_setting(config, key, values.at(key));
  }
};

HarnessConfig load_config(const std::string& config_path, const Overrides& flags) {
  HarnessConfig config;
  if (!config_path.empty()) config = parse_config(read_file(config_path));
  apply_seed_env(config);
  flags.apply(config);
  set_default_backend(config.backend);
  return config;
}

void print_summary(const SuiteResult& result) {
  std::map<std::tuple<std::size_t, std::size_t, int>, std::pair<double, int>> mean;
  int failures = 0;
  for (const auto& r : result.records) {
    if (r.status.starts_with("failed")) ++failures;
    if (r.status != "ok") continue;
    auto& [sum, count] = mean[{r.params.n, r.params.m, static_cast<int>(r.method)}];
    sum += r.relative_gap.value;
    ++count;
  }
  std::printf("%5s %5s  %-14s %10s %6s\n", "n", "m", "method", "mean gap %", "count");
  for (const auto& [k, v] : mean) {
    const auto& [n, m, method] = k;
    std::printf("%5zu %5zu  %-14s %10.4f %6d\n", n, m,
                std::string(to_string(static_cast<Method>(method))).c_str(), v.first / v.second,
                v.second);
  }
  if (failures > 0) std::printf("%d run(s) failed; see the status column\n", failures);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lower bounds for box-constrained bilinear quadratic programs"};
  app.require_subcommand(1);
  std::string config_path;

  // generate
  auto* gen = app.add_subcommand("generate", "Write a random instance (or a whole suite) as JSON");
  GenParams gp;
  gp.density_A = 1.0;
  std::string gen_out;
  std::string gen_suite_dir;
  bool gen_zero = false;
  gen->add_option("--n", gp.n, "Dimension of x");
  gen->add_option("--m", gp.m, "Dimension of y");
  gen->add_option("--density", gp.density_A, "Fraction of nonzeros in A")->capture_default_str();
  gen->add_option("--rank-q", gp.rank_frac_Q, "Rank fraction of Q")->capture_default_str();
  gen->add_option("--rank-r", gp.rank_frac_R, "Rank fraction of R")->capture_default_str();
  auto* gen_seed = gen->add_option("--seed", gp.seed, "Generator seed");
  gen->add_flag("--zero-quadratic", gen_zero, "Set Q and R to zero");
  gen->add_option("-o,--out", gen_out, "Output file (default: stdout)");
  gen->add_option("--suite", gen_suite_dir, "Write every suite instance into this directory");
  gen->add_option("--config", config_path, "key=value config file");

  // solve
  auto* sol = app.add_subcommand("solve", "Bound one instance with one method");
  std::string sol_instance;
  std::string sol_method = "B.Mc.ExtDisj";
  std::string sol_trace;
  int sol_starts = 32;
  std::uint64_t sol_seed = 0;
  LoopConfig loop;
  double sol_time_limit = 0.0;
  sol->add_option("instance", sol_instance, "Instance JSON file")->required();
  sol->add_option("--method", sol_method, "S.Mc, B.Mc, Disj, ExtDisj or Mixed")->capture_default_str();
  sol->add_option("--max-n-cuts", loop.max_n_cuts, "Cut budget")->capture_default_str();
  sol->add_option("--max-cuts-per-round", loop.max_cuts_per_round, "Cuts per round")
      ->capture_default_str();
  sol->add_option("--time-limit", sol_time_limit, "Wall-clock seconds (0 = none)");
  sol->add_option("--ub-starts", sol_starts, "Upper bound multistarts")->capture_default_str();
  sol->add_option("--seed", sol_seed, "Upper bound seed");
  sol->add_option("--trace", sol_trace, "Write the iteration trace as JSON");
  std::string sol_backend = "ipm";
  sol->add_option("--backend", sol_backend, "Solver backend")->capture_default_str();

  // compare
  auto* cmp = app.add_subcommand("compare", "Run a suite of instances and methods");
  Overrides cmp_flags;
  std::string cmp_out = "results";
  cmp->add_option("--config", config_path, "key=value config file");
  cmp_flags.add(cmp, "--seed", "seed", "Base seed");
  cmp_flags.add(cmp, "--dims", "dims", "Dimension pairs, e.g. 20x4,20x8");
  cmp_flags.add(cmp, "--densities", "densities", "Densities of A");
  cmp_flags.add(cmp, "--rank-fractions", "rank_fractions", "Rank fractions of Q and R");
  cmp_flags.add(cmp, "--methods", "methods", "Methods, e.g. smc,bmc,extdisj");
  cmp_flags.add(cmp, "--jobs", "jobs", "Instances solved concurrently");
  cmp_flags.add(cmp, "--ub-starts", "ub_starts", "Upper bound multistarts");
  cmp_flags.add(cmp, "--cut-max-n", "cut_max_n", "Skip cut loops above this n (0 = none)");
  cmp_flags.add(cmp, "--max-n-cuts", "max_n_cuts", "Cut budget per loop");
  cmp_flags.add(cmp, "--max-cuts-per-round", "max_cuts_per_round", "Cuts per round");
  cmp_flags.add(cmp, "--time-limit", "time_limit", "Seconds per loop (0 = none)");
  cmp_flags.add(cmp, "--zero-quadratic", "zero_quadratic", "true to drop Q and R");
  cmp_flags.add(cmp, "--backend", "solver.backend", "Solver backend");
  cmp->add_option("-o,--out", cmp_out, "Output directory")->capture_default_str();

  // verify
  auto* ver = app.add_subcommand("verify", "Run the lifting and product-estimate property suites");
  int ver_samples = 1000;
  int ver_draws = 100;
  std::uint64_t ver_seed = 7;
  ver->add_option("--samples", ver_samples, "Samples for the lifting implication")
      ->capture_default_str();
  ver->add_option("--draws", ver_draws, "Draws for the product estimates")->capture_default_str();
  ver->add_option("--seed", ver_seed, "Seed")->capture_default_str();

  // plot
  auto* plt = app.add_subcommand("plot", "Group a suite CSV into per-(n,m) plot data");
  std::string plt_csv;
  std::string plt_out = "plots";
  bool plt_svg = false;
  plt->add_option("csv", plt_csv, "results.csv from compare")->required();
  plt->add_option("-o,--out", plt_out, "Output directory")->capture_default_str();
  plt->add_flag("--svg", plt_svg, "Also write SVG bar charts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      if (!gen_suite_dir.empty()) {
        HarnessConfig config = load_config(config_path, {});
        if (gen_seed->count() > 0) config.experiment.seed = gp.seed;
        for (const GenParams& p : suite_instances(config.experiment)) {
          BilinearInstance inst = generate(p);
          if (gen_zero || config.experiment.zero_quadratic) {
            inst.Q = DenseMatrix(inst.n, inst.n);
            inst.R = DenseMatrix(inst.m, inst.m);
          }
          char name[96];
          std::snprintf(name, sizeof name, "inst_n%zu_m%zu_d%g_r%g.json", p.n, p.m, p.density_A,
                        p.rank_frac_Q);
          write_file(fs::path(gen_suite_dir) / name, to_json(inst));
        }
        return kExitOk;
      }
      if (gp.n == 0 || gp.m == 0) {
        std::cerr << "generate: --n and --m are required without --suite\n";
        return kExitUsage;
      }
      if (gen_seed->count() == 0) {
        HarnessConfig seed_only;
        seed_only.experiment.seed = 0;
        apply_seed_env(seed_only);
        gp.seed = seed_only.experiment.seed;
      }
      BilinearInstance inst = generate(gp);
      if (gen_zero) {
        inst.Q = DenseMatrix(inst.n, inst.n);
        inst.R = DenseMatrix(inst.m, inst.m);
      }
      if (gen_out.empty()) {
        std::cout << to_json(inst) << "\n";
      } else {
        write_file(gen_out, to_json(inst));
      }
      return kExitOk;
    }

    if (*sol) {
      set_default_backend(sol_backend);
      const CheckedInstance inst = validate(from_json(read_file(sol_instance)));
      const Method method = parse_method(sol_method);
      const UpperBound ub = upper_bound(inst, sol_starts, sol_seed);
      std::printf("z_bar          %.10g\n", ub.z_bar);
      if (method == Method::kSMc || method == Method::kBMc) {
        auto [model, map] = method == Method::kSMc ? build_smc(inst) : build_bmc(inst);
        const double lb = solve_relaxation(model).first;
        std::printf("lb             %.10g\n", lb);
        std::printf("relative_gap   %.6f%%\n", relative_gap(ub.z_bar, lb).value);
        return kExitOk;
      }
      loop.variant = method == Method::kDisj    ? LoopVariant::kDisj
                     : method == Method::kMixed ? LoopVariant::kMixed
                                                : LoopVariant::kExtDisj;
      if (sol_time_limit > 0.0) loop.time_limit = sol_time_limit;
      SuiteResult one;
      MethodRecord rec;
      rec.params = {inst.n(), inst.m(), 0.0, 0.0, 0.0, 0};
      rec.method = method;
      rec.z_bar = ub.z_bar;
      rec.trace = cutting_plane(inst, loop);
      const BoundTrace& t = *rec.trace;
      std::printf("root_lb        %.10g\n", t.root_lb);
      std::printf("lb             %.10g\n", t.final_lb);
      std::printf("relative_gap   %.6f%%\n", relative_gap(ub.z_bar, t.final_lb).value);
      std::printf("gap_closed     %.4f%%\n", gap_closed(ub.z_bar, t.root_lb, t.final_lb).value);
      std::printf("cuts           %d\n", t.total_cuts());
      std::printf("termination    %s\n", std::string(to_string(t.termination)).c_str());
      if (!sol_trace.empty()) {
        one.records.push_back(std::move(rec));
        write_file(sol_trace, traces_json(one));
      }
      if (t.termination == Termination::kSolverFailure) {
        std::cerr << "solver failure: " << t.failure << "\n";
        return kExitNumerical;
      }
      return kExitOk;
    }

    if (*cmp) {
      const HarnessConfig config = load_config(config_path, cmp_flags);
      const SuiteResult result = run_suite(config.experiment);
      const fs::path out(cmp_out);
      write_file(out / "results.csv", to_csv(result));
      write_file(out / "aggregates.csv", aggregates_csv(result));
      write_file(out / "timings.csv", timings_csv(result));
      write_file(out / "traces.json", traces_json(result));
      print_summary(result);
      return result.any_failure() ? kExitNumerical : kExitOk;
    }

    if (*ver) {
      const Theorem1SuiteResult t1 = theorem1_property_suite(ver_samples, ver_seed);
      const Theorem2SuiteResult t2 = theorem2_property_suite(ver_draws, ver_seed);
      const bool ok1 = t1.falsified == 0 && t1.max_chain <= 1e-10;
      const bool ok2 = t2.max_diagonal_mismatch <= 1e-10 && t2.max_equal_width_excess <= 1e-10 &&
                       t2.max_midpoint_error <= 1e-10;
      std::printf("lifting implication: %d samples, premise held %d, falsified %d, max chain %.3g  %s\n",
                  t1.samples, t1.premise_held, t1.falsified, t1.max_chain, ok1 ? "PASS" : "FAIL");
      std::printf("product estimates:   %d draws, diagonal %.3g, equal-width excess %.3g, "
                  "midpoint error %.3g  %s\n",
                  t2.draws, t2.max_diagonal_mismatch, t2.max_equal_width_excess,
                  t2.max_midpoint_error, ok2 ? "PASS" : "FAIL");
      return ok1 && ok2 ? kExitOk : kExitNumerical;
    }

    if (*plt) {
      for (const fs::path& p : emit_plot_data(read_file(plt_csv), plt_out, plt_svg))
        std::cout << p.string() << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return is_numerical(e.code()) ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
