#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bilicut {

struct PlotSeriesPoint {
  std::string axis;  // "rank" or "density"
  std::string key;   // "0.25/0.25" or "0.5"
  std::string method;
  double mean_relative_gap = 0.0;
  int count = 0;
};

struct PlotGroup {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<PlotSeriesPoint> points;
};

/// Groups a suite CSV by (n, m). Rows whose status is not "ok" are ignored.
/// Throws kMissingColumns when the header lacks n, m, density, rank_frac_q,
/// rank_frac_r, method or relative_gap, including for empty input.
std::vector<PlotGroup> plot_groups(const std::string& csv);

/// Writes gaps_n<n>_m<m>.csv per group (and a matching .svg bar chart when
/// asked) into out_dir. Returns the written paths in group order.
std::vector<std::filesystem::path> emit_plot_data(const std::string& csv,
                                                  const std::filesystem::path& out_dir,
                                                  bool svg = false);

}  // namespace bilicut
