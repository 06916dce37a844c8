#include "bilicut/config.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "bilicut/error.hpp"

namespace bilicut {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::kInvalidParams,
              "bad value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    std::string buf(text);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size()) bad_value(key, text);
  } else {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text);
  }
  return out;
}

std::vector<std::string_view> split_list(std::string_view value) {
  value = trim(value);
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']')
    value = value.substr(1, value.size() - 2);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto piece = trim(value.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (!piece.empty()) out.push_back(unquote(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

}  // namespace

void apply_setting(HarnessConfig& config, std::string_view key, std::string_view value) {
  ExperimentConfig& e = config.experiment;
  key = trim(key);
  value = unquote(trim(value));
  // [experiment] and [loop] sections only group keys; [solver] keeps its prefix.
  for (std::string_view section : {"experiment.", "loop."})
    if (key.starts_with(section)) key.remove_prefix(section.size());
  if (key == "seed") {
    e.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "dims") {
    e.dims.clear();
    for (std::string_view item : split_list(value)) {
      const auto x = item.find('x');
      if (x == std::string_view::npos) bad_value(key, item);
      e.dims.emplace_back(parse_number<std::size_t>(key, item.substr(0, x)),
                          parse_number<std::size_t>(key, item.substr(x + 1)));
      if (e.dims.back().first == 0 || e.dims.back().second == 0) bad_value(key, item);
    }
  } else if (key == "densities" || key == "rank_fractions") {
    std::vector<double> values;
    for (std::string_view item : split_list(value)) {
      const double v = parse_number<double>(key, item);
      if (!(v > 0.0 && v <= 1.0)) bad_value(key, item);
      values.push_back(v);
    }
    (key == "densities" ? e.densities : e.rank_fractions) = std::move(values);
  } else if (key == "methods") {
    e.methods.clear();
    for (std::string_view item : split_list(value)) e.methods.push_back(parse_method(item));
  } else if (key == "jobs") {
    e.jobs = parse_number<int>(key, value);
    if (e.jobs < 1) bad_value(key, value);
  } else if (key == "ub_starts") {
    e.ub_starts = parse_number<int>(key, value);
    if (e.ub_starts < 1) bad_value(key, value);
  } else if (key == "zero_quadratic") {
    e.zero_quadratic = parse_bool(key, value);
  } else if (key == "cut_max_n") {
    const auto v = parse_number<std::size_t>(key, value);
    e.cut_max_n = v == 0 ? std::nullopt : std::optional<std::size_t>(v);
  } else if (key == "max_n_cuts") {
    e.loop.max_n_cuts = parse_number<int>(key, value);
    if (e.loop.max_n_cuts < 1) bad_value(key, value);
  } else if (key == "max_cuts_per_round") {
    e.loop.max_cuts_per_round = parse_number<int>(key, value);
    if (e.loop.max_cuts_per_round < 1) bad_value(key, value);
  } else if (key == "violation_threshold") {
    e.loop.violation_threshold = parse_number<double>(key, value);
  } else if (key == "time_limit") {
    const double t = parse_number<double>(key, value);
    e.loop.time_limit = t > 0.0 ? std::optional<double>(t) : std::nullopt;
  } else if (key == "solver.backend") {
    config.backend = std::string(value);
  } else {
    throw Error(ErrorCode::kInvalidParams, "unknown config key '" + std::string(key) + "'");
  }
}

HarnessConfig parse_config(std::string_view text, HarnessConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    if (body.front() == '[' && body.back() == ']' && body.find('=') == std::string_view::npos) {
      section = std::string(trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key(trim(body.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    apply_setting(base, key, body.substr(eq + 1));
  }
  return base;
}

void apply_seed_env(HarnessConfig& config) {
  const char* env = std::getenv("BILICUT_SEED");
  if (env == nullptr) return;
  config.experiment.seed = parse_number<std::uint64_t>("BILICUT_SEED", env);
}

}  // namespace bilicut
