#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "eecoord/baselines.hpp"
#include "eecoord/coordination.hpp"
#include "eecoord/efficiency.hpp"
#include "eecoord/game.hpp"
#include "eecoord/random.hpp"

namespace eecoord {

enum class Method { ocsc, mcsc, random, pooling, exhaustive };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ocsc: return "ocsc";
    case Method::mcsc: return "mcsc";
    case Method::random: return "random";
    case Method::pooling: return "pooling";
    case Method::exhaustive: return "exhaustive";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::ocsc, Method::mcsc, Method::random, Method::pooling, Method::exhaustive})
    if (to_string(m) == s) return m;
  throw precondition_error("unknown algorithm '" + std::string(s) +
                           "' (expected ocsc, mcsc, random, pooling or exhaustive)");
}

inline bool is_coordinated(Method m) { return m != Method::pooling; }

inline double noise_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

// One Monte Carlo experiment: K = N unless `carriers` is set, σ² = 10^(-SNR/10).
struct ScenarioSpec {
  std::size_t players = 5;
  std::optional<std::size_t> carriers;
  double snr_db = 10.0;
  double rate = 1e6;
  int efficiency_order = 100;
  double delta = 1e-3;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::vector<Method> algorithms{Method::ocsc, Method::mcsc, Method::random, Method::pooling};
  std::optional<double> pooling_budget;  // watts; γ*σ² when unset

  std::size_t carrier_count() const { return carriers.value_or(players); }

  GameConfig config() const {
    return GameConfig::uniform(players, carrier_count(), noise_from_snr_db(snr_db), rate,
                               efficiency_order, delta);
  }

  void validate() const {
    if (trials < 1) throw precondition_error("ScenarioSpec: trials must be >= 1");
    if (algorithms.empty()) throw precondition_error("ScenarioSpec: no algorithm selected");
    if (pooling_budget && !(*pooling_budget > 0.0))
      throw precondition_error("ScenarioSpec: pooling budget must be positive");
    config();
  }
};

/// Rayleigh block fading: i.i.d. unit-mean exponential power gains.
inline ChannelMatrix generate_channels(std::size_t players, std::size_t carriers,
                                       std::uint64_t seed) {
  if (players == 0 || carriers == 0)
    throw precondition_error("generate_channels: N and K must be >= 1");
  Rng rng(seed);
  Matrix g(players, carriers);
  for (std::size_t n = 0; n < players; ++n)
    for (std::size_t k = 0; k < carriers; ++k) g(n, k) = rng.exponential();
  return ChannelMatrix(std::move(g));
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial_index) {
  return derive_seed(seed, trial_index);
}

struct MethodMetrics {
  Method method = Method::ocsc;
  double mean_ee = 0.0;  // bits/joule, averaged over users
  double mean_se = 0.0;  // bits/s/Hz, averaged over users
  double min_user_se = 0.0;
  double max_user_se = 0.0;
  double alpha_star = 0.0;
  std::optional<bool> exact_equilibrium;  // unset for non-coordinated methods
  std::optional<double> epsilon;
  std::size_t bound_violations = 0;  // failed quality/equilibrium/welfare certificates
};

struct TrialMetrics {
  std::size_t trial_index = 0;
  std::vector<MethodMetrics> methods;  // same order as ScenarioSpec::algorithms
  std::vector<double> mcsc_alpha_trace;
};

namespace detail {

inline void fill_rate_metrics(MethodMetrics& m, const UtilityVector& u, const SinrProfile& sinr) {
  const std::size_t players = u.utilities.size();
  double ee = 0.0;
  double se = 0.0;
  m.min_user_se = std::numeric_limits<double>::infinity();
  m.max_user_se = 0.0;
  for (std::size_t n = 0; n < players; ++n) {
    ee += u.utilities[n];
    double user_se = 0.0;
    for (std::size_t k = 0; k < sinr.sinr.cols(); ++k) user_se += std::log2(1.0 + sinr.sinr(n, k));
    se += user_se;
    m.min_user_se = std::min(m.min_user_se, user_se);
    m.max_user_se = std::max(m.max_user_se, user_se);
  }
  m.mean_ee = ee / static_cast<double>(players);
  m.mean_se = se / static_cast<double>(players);
}

// Re-checks the per-player quality bound, the ε bound, the exact-equilibrium
// threshold and (when the optimum is known) the welfare bound.
inline std::size_t count_violations(const GameConfig& config, const ChannelMatrix& channels,
                                    const EfficiencyModel& model, const CoordinationOutcome& out,
                                    const UtilityVector& u, const EquilibriumReport& eq,
                                    const std::optional<AssignmentOptimum>& optimum) {
  constexpr double rel = 1e-9;
  const double alpha = out.alpha_star;
  std::size_t violations = 0;
  double welfare = 0.0;
  for (std::size_t n = 0; n < config.n_players; ++n) {
    welfare += u.utilities[n];
    if (u.utilities[n] < alpha * max_utility(config, channels, model, n) * (1.0 - rel)) ++violations;
  }
  if (alpha > 0.0 && eq.epsilon > (1.0 - alpha) / alpha * (1.0 + rel) + rel) ++violations;
  if (alpha > model.equilibrium_threshold() && !eq.is_exact) ++violations;
  if (optimum) {
    if (welfare > optimum->best_welfare * (1.0 + rel)) ++violations;
    if (welfare < alpha * optimum->best_welfare * (1.0 - rel)) ++violations;
  }
  return violations;
}

}  // namespace detail

/// Runs every requested method on the channel draw of one trial.
inline TrialMetrics run_trial(const ScenarioSpec& spec, const EfficiencyModel& model,
                              std::size_t trial_index) {
  const GameConfig config = spec.config();
  const std::uint64_t seed = trial_seed(spec.seed, trial_index);
  const ChannelMatrix channels = generate_channels(config.n_players, config.n_carriers, seed);

  TrialMetrics tm;
  tm.trial_index = trial_index;
  std::optional<AssignmentOptimum> optimum;
  const bool wants_optimum = std::find(spec.algorithms.begin(), spec.algorithms.end(),
                                       Method::exhaustive) != spec.algorithms.end();
  if (wants_optimum) optimum = exhaustive_optimum(config, channels, model);

  for (Method method : spec.algorithms) {
    MethodMetrics m;
    m.method = method;
    if (method == Method::pooling) {
      const double budget = spec.pooling_budget.value_or(default_pooling_budget(config, model));
      const PoolingResult pool = spectrum_pooling(config, channels, budget);
      const auto u = compute_utilities(config, channels, pool.allocation, model);
      detail::fill_rate_metrics(m, u, compute_sinr(config, channels, pool.allocation));
      tm.methods.push_back(m);
      continue;
    }
    CoordinationOutcome out;
    switch (method) {
      case Method::ocsc: out = delta_ocsc(config, channels, model); break;
      case Method::mcsc: {
        auto res = delta_mcsc(config, channels, model);
        tm.mcsc_alpha_trace = std::move(res.alpha_trace);
        out = std::move(res.outcome);
        break;
      }
      case Method::random:
        out = random_coordination(config, channels, model, derive_seed(seed, 0x72616e646f6dULL));
        break;
      case Method::exhaustive: out = exhaustive_outcome(config, channels, model, *optimum); break;
      case Method::pooling: break;
    }
    const auto u = compute_utilities(config, channels, out.allocation, model);
    detail::fill_rate_metrics(m, u, compute_sinr(config, channels, out.allocation));
    const auto eq = equilibrium_check(config, channels, out, model);
    m.alpha_star = out.alpha_star;
    m.exact_equilibrium = eq.is_exact;
    m.epsilon = eq.epsilon;
    m.bound_violations = detail::count_violations(config, channels, model, out, u, eq, optimum);
    tm.methods.push_back(m);
  }
  return tm;
}

inline TrialMetrics run_trial(const ScenarioSpec& spec, std::size_t trial_index) {
  return run_trial(spec, EfficiencyModel(spec.efficiency_order), trial_index);
}

/// All trials of a scenario, indexed by trial. `threads` == 0 uses the
/// hardware concurrency. Output is independent of the thread count.
inline std::vector<TrialMetrics> run_trials(const ScenarioSpec& spec, unsigned threads = 1) {
  spec.validate();
  const EfficiencyModel model(spec.efficiency_order);
  std::vector<TrialMetrics> out(spec.trials);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.trials));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < spec.trials; i = next++) {
      try {
        out[i] = run_trial(spec, model, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = spec.trials;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct AggregateMetrics {
  Method method = Method::ocsc;
  std::size_t trials = 0;
  double mean_ee = 0.0;
  double se_ee = 0.0;  // standard error of mean_ee across trials
  double mean_se = 0.0;
  double min_user_se = 0.0;
  double max_user_se = 0.0;
  std::optional<double> prob_exact;
  double prob_alpha_ge_threshold = 0.0;
  double mean_alpha_star = 0.0;
  std::optional<double> mean_epsilon;
  std::size_t bound_violations = 0;
  std::vector<double> mean_alpha_trace;  // δ-MCSC only
};

namespace detail {

// Sum after sorting, so the result does not depend on trial order.
inline double ordered_sum(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace detail

/// Folds trial records into one aggregate per method.
inline std::vector<AggregateMetrics> aggregate(const std::vector<TrialMetrics>& trials,
                                               double equilibrium_threshold) {
  std::vector<AggregateMetrics> out;
  if (trials.empty()) return out;
  const std::size_t count = trials.size();
  const double t = static_cast<double>(count);
  for (std::size_t j = 0; j < trials.front().methods.size(); ++j) {
    AggregateMetrics a;
    a.method = trials.front().methods[j].method;
    a.trials = count;
    std::vector<double> ee, se, alpha, eps, exact, above;
    a.min_user_se = std::numeric_limits<double>::infinity();
    for (const auto& tr : trials) {
      const MethodMetrics& m = tr.methods[j];
      ee.push_back(m.mean_ee);
      se.push_back(m.mean_se);
      alpha.push_back(m.alpha_star);
      above.push_back(m.alpha_star >= equilibrium_threshold ? 1.0 : 0.0);
      if (m.exact_equilibrium) exact.push_back(*m.exact_equilibrium ? 1.0 : 0.0);
      if (m.epsilon) eps.push_back(*m.epsilon);
      a.min_user_se = std::min(a.min_user_se, m.min_user_se);
      a.max_user_se = std::max(a.max_user_se, m.max_user_se);
      a.bound_violations += m.bound_violations;
    }
    a.mean_ee = detail::ordered_sum(ee) / t;
    if (count > 1) {
      std::vector<double> sq;
      for (double x : ee) sq.push_back((x - a.mean_ee) * (x - a.mean_ee));
      a.se_ee = std::sqrt(detail::ordered_sum(sq) / (t - 1.0)) / std::sqrt(t);
    }
    a.mean_se = detail::ordered_sum(se) / t;
    a.mean_alpha_star = detail::ordered_sum(alpha) / t;
    a.prob_alpha_ge_threshold = detail::ordered_sum(above) / t;
    if (exact.size() == count) a.prob_exact = detail::ordered_sum(exact) / t;
    if (eps.size() == count) a.mean_epsilon = detail::ordered_sum(eps) / t;
    if (a.method == Method::mcsc) {
      const std::size_t len = trials.front().mcsc_alpha_trace.size();
      for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> col;
        for (const auto& tr : trials) col.push_back(tr.mcsc_alpha_trace[i]);
        a.mean_alpha_trace.push_back(detail::ordered_sum(col) / t);
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<AggregateMetrics> run_scenario(const ScenarioSpec& spec, unsigned threads = 1) {
  const EfficiencyModel model(spec.efficiency_order);
  return aggregate(run_trials(spec, threads), model.equilibrium_threshold());
}

enum class SweepAxis { users, snr };

inline std::string_view to_string(SweepAxis a) { return a == SweepAxis::users ? "users" : "snr"; }

inline SweepAxis parse_axis(std::string_view s) {
  if (s == "users") return SweepAxis::users;
  if (s == "snr") return SweepAxis::snr;
  throw precondition_error("unknown sweep axis '" + std::string(s) + "' (expected users or snr)");
}

struct SweepRow {
  double axis_value = 0.0;
  AggregateMetrics metrics;
};

// The scenario for one sweep point. A users sweep sets K = N unless the
// template fixes the carrier count.
inline ScenarioSpec sweep_point(const ScenarioSpec& base, SweepAxis axis, double value) {
  ScenarioSpec s = base;
  if (axis == SweepAxis::users) {
    if (!(value >= 1.0) || value != std::floor(value))
      throw precondition_error("users sweep values must be positive integers");
    s.players = static_cast<std::size_t>(value);
  } else {
    s.snr_db = value;
  }
  return s;
}

inline std::vector<SweepRow> sweep(const ScenarioSpec& base, SweepAxis axis,
                                   const std::vector<double>& values, unsigned threads = 1) {
  if (values.empty()) throw precondition_error("sweep: no axis values");
  std::vector<SweepRow> rows;
  for (double v : values) {
    for (auto& m : run_scenario(sweep_point(base, axis, v), threads))
      rows.push_back({v, std::move(m)});
  }
  return rows;
}

}  // namespace eecoord
