#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bilicut/config.hpp"
#include "bilicut/error.hpp"
#include "bilicut/plot.hpp"
#include "bilicut/suite.hpp"

using namespace bilicut;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.dims = {{4, 3}, {5, 2}};
  c.densities = {1.0};
  c.rank_fractions = {0.5, 1.0};
  c.methods = {Method::kSMc, Method::kBMc, Method::kExtDisj};
  c.loop.max_n_cuts = 4;
  c.ub_starts = 4;
  c.cut_max_n = 4;
  return c;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Synthetic suite CSV with every default (n, m) pair and two methods.
std::string synthetic_csv(const std::vector<std::string>& methods) {
  std::string csv = std::string(kCsvColumns) + "\n";
  for (const auto& [n, m] : ExperimentConfig{}.dims)
    for (const char* density : {"0.5", "1"})
      for (const char* rank : {"0.25", "1"})
        for (std::size_t k = 0; k < methods.size(); ++k) {
          csv += std::to_string(n) + "," + std::to_string(m) + "," + density + "," + rank + "," +
                 rank + ",1,1,7," + methods[k] + ",ok,-1,1," + std::to_string(10 * (k + 1)) +
                 ",0,NA,0,0,NA\n";
        }
  return csv;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bilicut_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(to_string(Method::kExtDisj) == "B.Mc.ExtDisj");
  CHECK(parse_method("B.Mc.ExtDisj") == Method::kExtDisj);
  CHECK(parse_method("extdisj") == Method::kExtDisj);
  CHECK(parse_method("s_mc") == Method::kSMc);
  CHECK(parse_method("BMc") == Method::kBMc);
  CHECK_THROWS_AS(parse_method("simplex"), Error);
}

TEST_CASE("instance seeds depend only on the base seed and the design point") {
  const std::uint64_t a = instance_seed(1, 20, 4, 0.5, 0.25);
  CHECK(a == instance_seed(1, 20, 4, 0.5, 0.25));
  CHECK(a != instance_seed(2, 20, 4, 0.5, 0.25));
  CHECK(a != instance_seed(1, 20, 4, 1.0, 0.25));
  CHECK(a != instance_seed(1, 20, 4, 0.5, 0.5));
  const auto list = suite_instances(ExperimentConfig{});
  CHECK(list.size() == 64);
  std::set<std::uint64_t> seeds;
  for (const auto& p : list) seeds.insert(p.seed);
  CHECK(seeds.size() == 64);
}

TEST_CASE("small suite run") {
  const ExperimentConfig c = small_config();
  const SuiteResult r = run_suite(c);
  REQUIRE(r.records.size() == 4 * 3);
  CHECK_FALSE(r.any_failure());
  for (const auto& rec : r.records) {
    CAPTURE(to_string(rec.method));
    if (rec.method == Method::kExtDisj && rec.params.n > 4) {
      CHECK(rec.status == "skipped");
      continue;
    }
    CHECK(rec.status == "ok");
    CHECK(rec.lb <= rec.z_bar + 1e-6);
    CHECK(rec.relative_gap.value >= -1e-6);
    if (rec.method == Method::kExtDisj) {
      REQUIRE(rec.gap_closed.has_value());
      CHECK(rec.cuts <= 4);
      CHECK(rec.lb >= rec.root_lb - 1e-7);
    }
  }
  // Records for one instance share z̄, and B.Mc is at least as tight as S.Mc
  // whenever Q and R are convex.
  for (std::size_t i = 0; i + 2 < r.records.size(); i += 3) {
    CHECK(r.records[i].z_bar == r.records[i + 1].z_bar);
    CHECK(r.records[i + 1].lb >= r.records[i].lb - 1e-6);
  }

  const auto rows = lines_of(to_csv(r));
  REQUIRE(rows.size() == 13);
  CHECK(rows[0] == kCsvColumns);
  CHECK(lines_of(aggregates_csv(r)).size() > 1);
  CHECK(lines_of(timings_csv(r)).size() == 13);
  CHECK(traces_json(r).find("\"root_lb\"") != std::string::npos);
}

TEST_CASE("suite CSV is byte-identical across reruns and thread counts") {
  ExperimentConfig c = small_config();
  const std::string first = to_csv(run_suite(c));
  c.jobs = 3;
  CHECK(to_csv(run_suite(c)) == first);
}

TEST_CASE("zero_quadratic drops Q and R") {
  ExperimentConfig c = small_config();
  c.dims = {{4, 3}};
  c.rank_fractions = {1.0};
  c.methods = {Method::kBMc};
  c.zero_quadratic = true;
  const SuiteResult r = run_suite(c);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].instance.Q.max_abs() == 0.0);
  CHECK(r.records[0].instance.R.max_abs() == 0.0);
}

TEST_CASE("configuration files") {
  const HarnessConfig c = parse_config(R"(
# experiment
seed = 99
dims = "20x4, 100x80"
densities = 0.5
methods = S.Mc, ExtDisj

[loop]
max_n_cuts = 10

[solver]
backend = "ipm"
)");
  CHECK(c.experiment.seed == 99);
  REQUIRE(c.experiment.dims.size() == 2);
  CHECK(c.experiment.dims[1] == std::pair<std::size_t, std::size_t>{100, 80});
  CHECK(c.experiment.densities == std::vector<double>{0.5});
  CHECK(c.experiment.methods == std::vector<Method>{Method::kSMc, Method::kExtDisj});
  CHECK(c.experiment.loop.max_n_cuts == 10);
  CHECK(c.backend == "ipm");

  HarnessConfig h;
  apply_setting(h, "cut_max_n", "0");
  CHECK_FALSE(h.experiment.cut_max_n.has_value());
  CHECK_THROWS_WITH_AS(apply_setting(h, "colour", "blue"), doctest::Contains("InvalidParams"),
                       Error);
  CHECK_THROWS_AS(apply_setting(h, "seed", "abc"), Error);
  CHECK_THROWS_WITH_AS(parse_config("seed 5\n"), doctest::Contains("ParseError"), Error);
}

TEST_CASE("seed from the environment") {
  HarnessConfig h;
  ::setenv("BILICUT_SEED", "1234", 1);
  apply_seed_env(h);
  CHECK(h.experiment.seed == 1234);
  ::unsetenv("BILICUT_SEED");
  apply_seed_env(h);
  CHECK(h.experiment.seed == 1234);
}

TEST_CASE("plot data") {
  SUBCASE("one file per (n, m) pair") {
    const fs::path dir = scratch_dir("plot8");
    const auto written = emit_plot_data(synthetic_csv({"S.Mc", "B.Mc"}), dir);
    CHECK(written.size() == 8);
    std::ifstream f(dir / "gaps_n20_m4.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "axis,key,method,mean_relative_gap,count");
    fs::remove_all(dir);
  }
  SUBCASE("means over the rank and density axes") {
    const auto groups = plot_groups(synthetic_csv({"S.Mc", "B.Mc"}));
    REQUIRE(groups.size() == 8);
    const PlotGroup& g = groups.front();
    CHECK(g.n == 20);
    CHECK(g.m == 4);
    // 2 rank keys + 2 density keys, each for 2 methods.
    CHECK(g.points.size() == 8);
    for (const auto& p : g.points) {
      CHECK(p.count == 2);
      CHECK(p.mean_relative_gap == (p.method == "S.Mc" ? 10.0 : 20.0));
    }
  }
  SUBCASE("a single method still renders") {
    const fs::path dir = scratch_dir("plot1");
    const auto written = emit_plot_data(synthetic_csv({"B.Mc"}), dir, true);
    CHECK(written.size() == 16);
    std::ifstream svg(dir / "gaps_n100_m80.svg");
    std::stringstream body;
    body << svg.rdbuf();
    CHECK(body.str().find("<rect") != std::string::npos);
    fs::remove_all(dir);
  }
  SUBCASE("missing columns") {
    CHECK_THROWS_WITH_AS(plot_groups(""), doctest::Contains("MissingColumns"), Error);
    CHECK_THROWS_WITH_AS(plot_groups("n,m,method\n1,1,S.Mc\n"), doctest::Contains("MissingColumns"),
                         Error);
  }
  SUBCASE("short rows") {
    CHECK_THROWS_AS(plot_groups(std::string(kCsvColumns) + "\n20,4\n"), Error);
  }
}
