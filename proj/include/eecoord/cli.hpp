#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <ios>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "eecoord/baselines.hpp"
#include "eecoord/coordination.hpp"
#include "eecoord/efficiency.hpp"
#include "eecoord/game.hpp"
#include "eecoord/io.hpp"
#include "eecoord/montecarlo.hpp"

namespace eecoord::cli {

enum ExitCode : int { ok = 0, usage = 2, numeric = 3, io_failure = 4 };

// Maps an in-flight exception to the documented exit code.
inline int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const convergence_error&) {
    return numeric;
  } catch (const no_usable_carrier&) {
    return numeric;
  } catch (const std::ios_base::failure&) {
    return io_failure;
  } catch (const std::filesystem::filesystem_error&) {
    return io_failure;
  } catch (const error&) {
    return usage;
  } catch (...) {
    return numeric;
  }
}

/// Prints γ*, γ* in dB, the exact-equilibrium threshold 1/(1+γ*) and the residual.
inline void cmd_gamma_star(int order, std::ostream& out) {
  const EfficiencyModel model(order);
  const double gs = model.gamma_star();
  out << std::setprecision(12);
  out << "order       " << order << '\n'
      << "gamma_star  " << gs << '\n'
      << "gamma_db    " << 10.0 * std::log10(gs) << '\n'
      << "threshold   " << model.equilibrium_threshold() << '\n'
      << "residual    " << model.residual() << '\n';
}

struct SolveOptions {
  std::string channel_path;
  double snr_db = 10.0;
  std::optional<double> noise_variance;  // overrides snr_db
  double rate = 1e6;
  int efficiency_order = 100;
  double delta = 1e-3;
  std::vector<Method> algorithms{Method::ocsc};
  std::uint64_t seed = 1;
  std::optional<double> pooling_budget;
  bool json = false;
};

inline io::json solve_report(const SolveOptions& opt, const ChannelMatrix& channels) {
  const double noise = opt.noise_variance.value_or(noise_from_snr_db(opt.snr_db));
  const GameConfig config = GameConfig::uniform(channels.players(), channels.carriers(), noise,
                                                opt.rate, opt.efficiency_order, opt.delta);
  const EfficiencyModel model(config.efficiency_order);

  io::json report;
  report["players"] = config.n_players;
  report["carriers"] = config.n_carriers;
  report["noise_variance"] = noise;
  report["gamma_star"] = model.gamma_star();
  report["threshold"] = model.equilibrium_threshold();
  io::json results = io::json::array();
  std::optional<AssignmentOptimum> optimum;
  for (Method m : opt.algorithms) {
    if (m == Method::pooling) {
      const auto pool = spectrum_pooling(
          config, channels, opt.pooling_budget.value_or(default_pooling_budget(config, model)));
      results.push_back(io::to_json(pool, compute_utilities(config, channels, pool.allocation, model)));
      continue;
    }
    CoordinationOutcome out;
    io::json extra;
    switch (m) {
      case Method::ocsc: {
        const auto search =
            ordering_search(quality_ratios(channels), config.delta, model.gamma_star());
        out = delta_ocsc(config, channels, model);
        extra["search_iterations"] = search.iterations;
        extra["converged_by"] = std::string(to_string(search.converged_by));
        break;
      }
      case Method::mcsc: {
        auto res = delta_mcsc(config, channels, model);
        extra["alpha_trace"] = res.alpha_trace;
        out = std::move(res.outcome);
        break;
      }
      case Method::random: out = random_coordination(config, channels, model, opt.seed); break;
      case Method::exhaustive:
        optimum = exhaustive_optimum(config, channels, model);
        out = exhaustive_outcome(config, channels, model, *optimum);
        extra["optimum"] = io::to_json(*optimum);
        break;
      case Method::pooling: break;
    }
    io::json rec = io::to_json(out, compute_utilities(config, channels, out.allocation, model));
    rec["equilibrium"] = io::to_json(equilibrium_check(config, channels, out, model));
    for (auto it = extra.begin(); it != extra.end(); ++it) rec[it.key()] = it.value();
    results.push_back(std::move(rec));
  }
  report["results"] = std::move(results);
  return report;
}

namespace detail {

inline void print_list(std::ostream& out, const io::json& arr) {
  bool first = true;
  for (const auto& v : arr) {
    out << (first ? "" : " ");
    if (v.is_number_float())
      out << v.get<double>();
    else
      out << v.dump();
    first = false;
  }
}

}  // namespace detail

inline void print_solve_report(const io::json& report, std::ostream& out) {
  out << std::setprecision(6);
  out << "instance    N=" << report["players"].get<std::size_t>()
      << " K=" << report["carriers"].get<std::size_t>()
      << " noise=" << report["noise_variance"].get<double>()
      << " gamma*=" << report["gamma_star"].get<double>() << '\n';
  for (const auto& r : report["results"]) {
    out << '\n' << "[" << r["algorithm"].get<std::string>() << "]\n";
    if (r.contains("assignment")) {
      out << "  alpha*      " << r["alpha_star"].get<double>() << '\n';
      out << "  ordering    ";
      detail::print_list(out, r["ordering"]);
      out << "\n  assignment  ";
      detail::print_list(out, r["assignment"]);
      out << "\n  powers      ";
      const auto& powers = r["powers"];
      for (std::size_t n = 0; n < powers.size(); ++n) {
        const std::size_t k = r["assignment"][n].get<std::size_t>() - 1;
        out << (n ? " " : "") << powers[n][k].get<double>();
      }
      out << "\n  utilities   ";
      detail::print_list(out, r["per_player_utility"]);
      const auto& eq = r["equilibrium"];
      out << "\n  equilibrium " << (eq["is_exact"].get<bool>() ? "exact" : "approximate")
          << " epsilon=" << eq["epsilon"].get<double>()
          << " worst_player=" << eq["worst_player"].get<std::size_t>() << '\n';
      if (r.contains("alpha_trace")) {
        out << "  alpha_trace ";
        detail::print_list(out, r["alpha_trace"]);
        out << '\n';
      }
    } else {
      out << "  utilities   ";
      detail::print_list(out, r["per_player_utility"]);
      out << "\n  spectral_eff ";
      detail::print_list(out, r["spectral_efficiency"]);
      out << '\n';
    }
  }
}

inline void cmd_solve(const SolveOptions& opt, std::ostream& out) {
  const ChannelMatrix channels = load_channel_matrix(opt.channel_path);
  const io::json report = solve_report(opt, channels);
  if (opt.json)
    out << report.dump(2) << '\n';
  else
    print_solve_report(report, out);
}

/// Parses "2,4,8" or an inclusive range "start:stop[:step]".
inline std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw precondition_error("bad numeric value '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3)
      throw precondition_error("range must be start:stop[:step]");
    const double start = to_double(parts[0]);
    const double stop = to_double(parts[1]);
    const double step = parts.size() == 3 ? to_double(parts[2]) : 1.0;
    if (!(step > 0.0) || stop < start) throw precondition_error("range must be increasing");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) values.push_back(start + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) values.push_back(to_double(p));
  }
  if (values.empty()) throw precondition_error("no values given");
  return values;
}

struct ExperimentOptions {
  ScenarioSpec spec;
  std::optional<SweepAxis> axis;  // unset for `run`
  std::vector<double> values;
  std::string output;
  std::optional<io::Format> format;
  unsigned threads = 1;
};

inline io::RunManifest manifest_for(const ExperimentOptions& opt) {
  io::RunManifest m;
  m.command = opt.axis ? "sweep" : "run";
  m.output = opt.output;
  m.format = opt.format.value_or(io::format_for_path(opt.output));
  m.spec = opt.spec;
  m.axis = opt.axis;
  m.values = opt.values;
  return m;
}

// `run` is a one-point users sweep at the scenario's own N.
inline std::vector<SweepRow> run_experiment(const ExperimentOptions& opt) {
  if (opt.axis) return sweep(opt.spec, *opt.axis, opt.values, opt.threads);
  return sweep(opt.spec, SweepAxis::users, {static_cast<double>(opt.spec.players)}, opt.threads);
}

inline std::string cmd_experiment(const ExperimentOptions& opt) {
  const io::RunManifest manifest = manifest_for(opt);
  const std::string content = io::render(manifest, run_experiment(opt));
  io::write_atomically(opt.output, content);
  return content;
}

}  // namespace eecoord::cli
