#pragma once

// CSV rows and summary.json for a SweepResult.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include "halfwave/experiments.hpp"
#include "json.hpp"

namespace halfwave {

inline constexpr const char* csv_header = "series,x,value,horizon,dt,richardson,partial";

namespace detail {

// Round-trippable and locale-independent.
inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace detail

inline void write_csv(std::ostream& out, const SweepResult& r) {
  out << csv_header << '\n';
  for (const auto& row : r.rows)
    out << detail::csv_field(row.series) << ',' << detail::csv_number(row.x) << ',' << detail::csv_number(row.value)
        << ',' << detail::csv_number(row.horizon) << ',' << detail::csv_number(row.dt) << ','
        << detail::csv_number(row.richardson) << ',' << (row.partial ? 1 : 0) << '\n';
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = experiment_name(c.experiment);
  j["grid"] = {{"N", c.grid.max_mode}, {"padded_len", c.grid.padded_len}};
  j["eps"] = c.eps_list;
  j["s"] = c.s;
  j["horizon"] = std::visit(
      [](const auto& h) -> nlohmann::json {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, horizon::FixedTime>) return {{"rule", "fixed"}, {"T", h.T}};
        if constexpr (std::is_same_v<T, horizon::LogHorizon>) return {{"rule", "log"}, {"c", h.c}};
        if constexpr (std::is_same_v<T, horizon::InverseSquare>) return {{"rule", "inverse_square"}, {"c", h.c}};
      },
      c.horizon);
  j["profile"] = std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, profile::SingleModePlusConstant>)
          return {{"kind", "single_mode_plus_constant"}, {"delta", p.delta}};
        if constexpr (std::is_same_v<T, profile::RandomDecay>) return {{"kind", "random_decay"}, {"rate", p.rate}};
        if constexpr (std::is_same_v<T, profile::Custom>) return {{"kind", "custom"}, {"path", p.path}};
      },
      c.profile);
  j["seed"] = c.seed;
  j["dt"] = c.dt;
  j["monitor_interval"] = c.monitor_interval;
  j["amplitude"] = c.amplitude;
  j["richardson"] = c.richardson;
  j["richardson_tolerance"] = c.richardson_tolerance;
  j["time_budget"] = c.time_budget;
  return j;
}

inline nlohmann::json summary_json(const ExperimentConfig& c, const SweepResult& r) {
  nlohmann::json j;
  j["experiment"] = experiment_name(r.experiment);
  j["pass"] = r.pass();
  j["partial"] = r.partial;
  j["config"] = config_json(c);
  j["fits"] = nlohmann::json::array();
  for (const auto& f : r.fits)
    j["fits"].push_back({{"name", f.name},
                         {"slope", f.fit.slope},
                         {"intercept", f.fit.intercept},
                         {"standard_error", f.fit.standard_error},
                         {"ci", {f.fit.interval.first, f.fit.interval.second}}});
  j["checks"] = nlohmann::json::array();
  for (const auto& ch : r.checks)
    j["checks"].push_back({{"name", ch.name}, {"value", ch.value}, {"lo", ch.lo}, {"hi", ch.hi}, {"pass", ch.pass}});
  j["diagnostics"] = nlohmann::json::object();
  for (const auto& [k, v] : r.diagnostics) j["diagnostics"][k] = v;
  j["failures"] = r.failures;
  j["runtime_seconds"] = nlohmann::json::array();
  for (const auto& row : r.rows)
    if (row.runtime > 0.0) j["runtime_seconds"].push_back({{"series", row.series}, {"x", row.x}, {"seconds", row.runtime}});
  return j;
}

/// Writes <dir>/<experiment>.csv and <dir>/summary.json.
inline void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& c, const SweepResult& r) {
  std::filesystem::create_directories(dir);
  const auto csv = dir / (experiment_name(r.experiment) + ".csv");
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  write_csv(out, r);
  std::ofstream js(dir / "summary.json");
  if (!js) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  js << summary_json(c, r).dump(2) << '\n';
}

}  // namespace halfwave
