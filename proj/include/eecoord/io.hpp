#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eecoord/baselines.hpp"
#include "eecoord/coordination.hpp"
#include "eecoord/montecarlo.hpp"

// Serialization of results. Player, carrier and position indices are written
// 1-based, matching the usual g_n^k notation; the library itself is 0-based.
namespace eecoord::io {

using json = nlohmann::ordered_json;

enum class Format { csv, json };

inline std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

inline Format format_for_path(const std::string& path) {
  return std::filesystem::path(path).extension() == ".json" ? Format::json : Format::csv;
}

// Fixed CSV header; the JSON rows use the same names.
inline constexpr const char* kCsvHeader =
    "axis_value,algorithm,mean_ee,se_ee,mean_se,prob_exact,prob_alpha_ge_threshold,"
    "mean_alpha_star";

// 12 significant digits, as written to CSV.
inline std::string format_csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline json one_based(const std::vector<std::size_t>& v) {
  json a = json::array();
  for (std::size_t x : v) a.push_back(x + 1);
  return a;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (double x : m.row(r)) row.push_back(x);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const CoordinationOutcome& out, const UtilityVector& utilities) {
  json j;
  j["algorithm"] = std::string(to_string(out.algorithm));
  j["alpha_star"] = out.alpha_star;
  j["ordering"] = one_based(out.ordering.perm);
  j["assignment"] = one_based(out.assignment);
  j["powers"] = matrix_json(out.allocation.powers());
  j["per_player_utility"] = utilities.utilities;
  return j;
}

inline json to_json(const EquilibriumReport& rep) {
  json j;
  j["is_exact"] = rep.is_exact;
  j["epsilon"] = rep.epsilon;
  j["per_player_slack"] = rep.per_player_slack;
  j["worst_player"] = rep.worst_player + 1;
  return j;
}

inline json to_json(const AssignmentOptimum& opt) {
  json j;
  j["best_assignment"] = one_based(opt.best_assignment);
  j["best_welfare"] = opt.best_welfare;
  j["per_player_max"] = opt.per_player_max;
  return j;
}

inline json to_json(const PoolingResult& pool, const UtilityVector& utilities) {
  json j;
  j["algorithm"] = "pooling";
  j["powers"] = matrix_json(pool.allocation.powers());
  j["water_level"] = pool.water_level;
  j["spectral_efficiency"] = pool.spectral_efficiency;
  j["per_player_utility"] = utilities.utilities;
  return j;
}

inline json to_json(const ScenarioSpec& s) {
  json j;
  j["players"] = s.players;
  j["carriers"] = s.carrier_count();
  j["snr_db"] = s.snr_db;
  j["noise_variance"] = noise_from_snr_db(s.snr_db);
  j["rate"] = s.rate;
  j["efficiency_order"] = s.efficiency_order;
  j["delta"] = s.delta;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  json algs = json::array();
  for (Method m : s.algorithms) algs.push_back(std::string(to_string(m)));
  j["algorithms"] = std::move(algs);
  j["pooling_budget"] = s.pooling_budget ? json(*s.pooling_budget) : json(nullptr);
  return j;
}

// Provenance record embedded in every output file.
struct RunManifest {
  std::string command;  // gamma-star | solve | run | sweep
  std::vector<std::string> inputs;
  std::string output;
  Format format = Format::csv;
  ScenarioSpec spec;
  std::optional<SweepAxis> axis;
  std::vector<double> values;
};

inline json to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["inputs"] = m.inputs;
  j["output"] = m.output;
  j["format"] = std::string(to_string(m.format));
  j["scenario"] = to_json(m.spec);
  if (m.axis) {
    j["axis"] = std::string(to_string(*m.axis));
    j["values"] = m.values;
  }
  return j;
}

inline json row_json(const SweepRow& row) {
  const AggregateMetrics& a = row.metrics;
  json j;
  j["axis_value"] = row.axis_value;
  j["algorithm"] = std::string(to_string(a.method));
  j["mean_ee"] = a.mean_ee;
  j["se_ee"] = a.se_ee;
  j["mean_se"] = a.mean_se;
  j["prob_exact"] = a.prob_exact ? json(*a.prob_exact) : json(nullptr);
  j["prob_alpha_ge_threshold"] = a.prob_alpha_ge_threshold;
  j["mean_alpha_star"] = a.mean_alpha_star;
  j["trials"] = a.trials;
  j["mean_epsilon"] = a.mean_epsilon ? json(*a.mean_epsilon) : json(nullptr);
  j["min_user_se"] = a.min_user_se;
  j["max_user_se"] = a.max_user_se;
  j["bound_violations"] = a.bound_violations;
  if (!a.mean_alpha_trace.empty()) j["mean_alpha_trace"] = a.mean_alpha_trace;
  return j;
}

/// CSV table: `# manifest: {...}` comment line, fixed header, one row per
/// (axis value, algorithm). prob_exact is empty for non-coordinated methods.
inline std::string render_csv(const RunManifest& manifest, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "# manifest: " << to_json(manifest).dump() << '\n' << kCsvHeader << '\n';
  for (const auto& row : rows) {
    const AggregateMetrics& a = row.metrics;
    out << format_csv_number(row.axis_value) << ',' << to_string(a.method) << ','
        << format_csv_number(a.mean_ee) << ',' << format_csv_number(a.se_ee) << ','
        << format_csv_number(a.mean_se) << ','
        << (a.prob_exact ? format_csv_number(*a.prob_exact) : std::string()) << ','
        << format_csv_number(a.prob_alpha_ge_threshold) << ','
        << format_csv_number(a.mean_alpha_star) << '\n';
  }
  return out.str();
}

inline std::string render_json(const RunManifest& manifest, const std::vector<SweepRow>& rows) {
  json j;
  j["manifest"] = to_json(manifest);
  json arr = json::array();
  for (const auto& row : rows) arr.push_back(row_json(row));
  j["rows"] = std::move(arr);
  return j.dump(2) + "\n";
}

inline std::string render(const RunManifest& manifest, const std::vector<SweepRow>& rows) {
  return manifest.format == Format::json ? render_json(manifest, rows)
                                         : render_csv(manifest, rows);
}

// Writes to a sibling temporary file, then renames over the target.
inline void write_atomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::ios_base::failure("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) throw std::ios_base::failure("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace eecoord::io
