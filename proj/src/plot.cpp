#include "bilicut/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "bilicut/error.hpp"

namespace bilicut {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Grouped bars for one axis, drawn into a panel starting at y0.
void svg_panel(std::string& out, const std::vector<PlotSeriesPoint>& pts, const std::string& axis,
               const std::vector<std::string>& methods, double y0, const std::string& title) {
  constexpr double kWidth = 720.0;
  constexpr double kHeight = 260.0;
  constexpr double kLeft = 60.0;
  constexpr double kBottom = 40.0;
  static const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};

  std::vector<std::string> keys;
  double top = 0.0;
  for (const auto& p : pts) {
    if (p.axis != axis) continue;
    if (std::find(keys.begin(), keys.end(), p.key) == keys.end()) keys.push_back(p.key);
    top = std::max(top, p.mean_relative_gap);
  }
  if (top <= 0.0) top = 1.0;
  const double plot_h = kHeight - kBottom - 30.0;
  const double base = y0 + kHeight - kBottom;
  out += "<text x=\"" + fmt(kLeft) + "\" y=\"" + fmt(y0 + 18) + "\" font-size=\"14\">" + title +
         "</text>\n";
  out += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(base) + "\" x2=\"" + fmt(kWidth - 10) +
         "\" y2=\"" + fmt(base) + "\" stroke=\"black\"/>\n";
  out += "<text x=\"5\" y=\"" + fmt(base - plot_h) + "\" font-size=\"10\">" + fmt(top, "%.3g") +
         "%</text>\n";
  if (keys.empty()) return;
  const double slot = (kWidth - kLeft - 10.0) / static_cast<double>(keys.size());
  const double bar = slot * 0.8 / static_cast<double>(std::max<std::size_t>(1, methods.size()));
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const double x0 = kLeft + slot * static_cast<double>(k) + slot * 0.1;
    out += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(base + 15) + "\" font-size=\"10\">" +
           keys[k] + "</text>\n";
    for (std::size_t s = 0; s < methods.size(); ++s) {
      for (const auto& p : pts) {
        if (p.axis != axis || p.key != keys[k] || p.method != methods[s]) continue;
        const double h = std::max(0.0, p.mean_relative_gap) / top * plot_h;
        out += "<rect x=\"" + fmt(x0 + bar * static_cast<double>(s)) + "\" y=\"" +
               fmt(base - h) + "\" width=\"" + fmt(bar) + "\" height=\"" + fmt(h) +
               "\" fill=\"" + kColors[s % 5] + "\"/>\n";
      }
    }
  }
  for (std::size_t s = 0; s < methods.size(); ++s) {
    const double lx = kLeft + 130.0 * static_cast<double>(s);
    out += "<rect x=\"" + fmt(lx) + "\" y=\"" + fmt(base + 22) +
           "\" width=\"10\" height=\"10\" fill=\"" + kColors[s % 5] + "\"/>\n";
    out += "<text x=\"" + fmt(lx + 14) + "\" y=\"" + fmt(base + 31) + "\" font-size=\"10\">" +
           methods[s] + "</text>\n";
  }
}

}  // namespace

std::vector<PlotGroup> plot_groups(const std::string& csv) {
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  const std::vector<std::string> cols = split(header, ',');
  const auto column = [&](const std::string& name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) {
      throw Error(ErrorCode::kMissingColumns, "suite CSV has no '" + name + "' column");
    }
    return static_cast<std::size_t>(it - cols.begin());
  };
  const std::size_t c_n = column("n");
  const std::size_t c_m = column("m");
  const std::size_t c_density = column("density");
  const std::size_t c_rq = column("rank_frac_q");
  const std::size_t c_rr = column("rank_frac_r");
  const std::size_t c_method = column("method");
  const std::size_t c_gap = column("relative_gap");
  const auto status = std::find(cols.begin(), cols.end(), "status");

  struct Acc {
    double sum = 0.0;
    int count = 0;
  };
  // (n, m) → (axis, key, method) → mean
  std::map<std::pair<std::size_t, std::size_t>,
           std::map<std::tuple<std::string, std::string, std::string>, Acc>>
      acc;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() < cols.size()) {
      throw Error(ErrorCode::kParseError, "short CSV row: " + line);
    }
    if (status != cols.end() && f[static_cast<std::size_t>(status - cols.begin())] != "ok") continue;
    if (f[c_gap] == "NA") continue;
    const double gap = std::stod(f[c_gap]);
    const auto nm = std::make_pair(std::stoul(f[c_n]), std::stoul(f[c_m]));
    for (const auto& [axis, key] :
         {std::pair<std::string, std::string>{"rank", f[c_rq] + "/" + f[c_rr]},
          std::pair<std::string, std::string>{"density", f[c_density]}}) {
      Acc& a = acc[nm][{axis, key, f[c_method]}];
      a.sum += gap;
      ++a.count;
    }
  }

  std::vector<PlotGroup> groups;
  for (const auto& [nm, series] : acc) {
    PlotGroup g{nm.first, nm.second, {}};
    for (const auto& [k, a] : series) {
      const auto& [axis, key, method] = k;
      g.points.push_back({axis, key, method, a.sum / a.count, a.count});
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<std::filesystem::path> emit_plot_data(const std::string& csv,
                                                  const std::filesystem::path& out_dir,
                                                  bool svg) {
  const std::vector<PlotGroup> groups = plot_groups(csv);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const PlotGroup& g : groups) {
    const std::string stem = "gaps_n" + std::to_string(g.n) + "_m" + std::to_string(g.m);
    const std::filesystem::path data = out_dir / (stem + ".csv");
    {
      std::ofstream f(data);
      f << "axis,key,method,mean_relative_gap,count\n";
      for (const auto& p : g.points)
        f << p.axis << ',' << p.key << ',' << p.method << ',' << fmt(p.mean_relative_gap, "%.10g")
          << ',' << p.count << '\n';
    }
    written.push_back(data);
    if (!svg) continue;

    std::vector<std::string> methods;
    for (const auto& p : g.points)
      if (std::find(methods.begin(), methods.end(), p.method) == methods.end())
        methods.push_back(p.method);
    std::string doc =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"540\" "
        "font-family=\"sans-serif\">\n<rect width=\"720\" height=\"540\" fill=\"white\"/>\n";
    const std::string dims = " (n=" + std::to_string(g.n) + ", m=" + std::to_string(g.m) + ")";
    svg_panel(doc, g.points, "rank", methods, 0.0, "Relative gap by rank(Q)/rank(R)" + dims);
    svg_panel(doc, g.points, "density", methods, 270.0, "Relative gap by density(A)" + dims);
    doc += "</svg>\n";
    const std::filesystem::path chart = out_dir / (stem + ".svg");
    std::ofstream(chart) << doc;
    written.push_back(chart);
  }
  return written;
}

}  // namespace bilicut
