#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "eecoord/coordination.hpp"
#include "eecoord/efficiency.hpp"
#include "eecoord/errors.hpp"
#include "eecoord/game.hpp"

namespace eecoord {

struct EquilibriumReport {
  bool is_exact = true;
  double epsilon = 0.0;                 // max_n per_player_slack[n]
  std::vector<double> per_player_slack;  // relative utility gain of the best deviation
  std::size_t worst_player = 0;
};

/// Measures how far a complete-coordination outcome is from an equilibrium.
///
/// A player may move to an idle carrier (utility ∝ g) or onto a carrier held
/// by someone else, whose transmission at SINR γ* then acts as interference
/// (utility ∝ g/(1+γ*)). Others do not react. The slack is the relative gain
/// of the best such move over the current carrier, floored at zero.
inline EquilibriumReport equilibrium_check(const GameConfig& config, const ChannelMatrix& channels,
                                           const CoordinationOutcome& outcome,
                                           const EfficiencyModel& model) {
  check_dimensions(config, channels, outcome.allocation);
  if (!outcome.allocation.is_completely_coordinated() ||
      outcome.assignment.size() != config.n_players)
    throw precondition_error("equilibrium_check: outcome is not completely coordinated");
  std::vector<bool> occupied(config.n_carriers, false);
  for (std::size_t n = 0; n < config.n_players; ++n) {
    const std::size_t k = outcome.assignment[n];
    if (k >= config.n_carriers || outcome.allocation.active_carrier(n) != k)
      throw precondition_error("equilibrium_check: assignment disagrees with the allocation");
    occupied[k] = true;
  }

  const double crowding = 1.0 + model.gamma_star();
  EquilibriumReport rep;
  rep.per_player_slack.assign(config.n_players, 0.0);
  for (std::size_t n = 0; n < config.n_players; ++n) {
    const std::size_t own = outcome.assignment[n];
    double alternative = 0.0;
    for (std::size_t k = 0; k < config.n_carriers; ++k) {
      if (k == own) continue;
      const double value = occupied[k] ? channels(n, k) / crowding : channels(n, k);
      alternative = std::max(alternative, value);
    }
    const double slack = std::max(0.0, alternative / channels(n, own) - 1.0);
    rep.per_player_slack[n] = slack;
    if (slack > rep.epsilon) {
      rep.epsilon = slack;
      rep.worst_player = n;
    }
  }
  rep.is_exact = rep.epsilon == 0.0;
  return rep;
}

/// Largest α for which the hypothesis of the π-CSC quality bound holds:
/// min over positions l of ρ_{π(l)}(l).
inline double prop2_certificate(const QualityRatios& ratios, const Ordering& ordering) {
  if (!ordering.is_permutation_of(ratios.players()))
    throw precondition_error("prop2_certificate: ordering is not a permutation of the players");
  double alpha = 1.0;
  for (std::size_t l = 0; l < ordering.size(); ++l)
    alpha = std::min(alpha, ratios.sorted(ordering.perm[l], l));
  return alpha;
}

struct AssignmentOptimum {
  std::vector<std::size_t> best_assignment;
  double best_welfare = 0.0;         // Σ_n u_n, bits/joule
  std::vector<double> per_player_max;  // u_n^max
};

inline constexpr std::size_t kExhaustivePlayerCap = 9;

/// Social optimum over all injective player -> carrier assignments, each
/// player alone at SINR γ*. Enumerates K!/(K-N)! cases in lexicographic order;
/// ties keep the lexicographically smallest assignment.
inline AssignmentOptimum exhaustive_optimum(const GameConfig& config, const ChannelMatrix& channels,
                                            const EfficiencyModel& model,
                                            std::size_t player_cap = kExhaustivePlayerCap) {
  config.validate();
  check_dimensions(config, channels);
  if (config.n_players > player_cap)
    throw precondition_error("exhaustive_optimum: N=" + std::to_string(config.n_players) +
                             " exceeds the enumeration cap of " + std::to_string(player_cap) +
                             "; welfare is additive over players, so solve it as a "
                             "maximum-weight bipartite matching instead");
  const std::size_t players = config.n_players;
  const std::size_t carriers = config.n_carriers;
  const double gs = model.gamma_star();
  std::vector<double> scale(players);
  AssignmentOptimum opt;
  opt.per_player_max.resize(players);
  for (std::size_t n = 0; n < players; ++n) {
    scale[n] = config.rates[n] * model.value(gs) / (gs * config.noise_variance);
    opt.per_player_max[n] = max_utility(config, channels, model, n);
  }

  std::vector<std::size_t> current(players);
  std::vector<bool> used(carriers, false);
  double best = -std::numeric_limits<double>::infinity();
  auto visit = [&](auto&& self, std::size_t n, double partial) -> void {
    if (n == players) {
      if (partial > best) {
        best = partial;
        opt.best_assignment = current;
      }
      return;
    }
    for (std::size_t k = 0; k < carriers; ++k) {
      if (used[k] || !(channels(n, k) > 0.0)) continue;
      used[k] = true;
      current[n] = k;
      self(self, n + 1, partial + scale[n] * channels(n, k));
      used[k] = false;
    }
  };
  visit(visit, 0, 0.0);
  if (opt.best_assignment.empty())
    throw no_usable_carrier("exhaustive_optimum: no assignment gives every player a positive gain");
  opt.best_welfare = best;
  return opt;
}

inline CoordinationOutcome exhaustive_outcome(const GameConfig& config,
                                              const ChannelMatrix& channels,
                                              const EfficiencyModel& model,
                                              const AssignmentOptimum& opt) {
  return coordinated_outcome(config, channels, model, opt.best_assignment,
                             Ordering::identity(config.n_players), Algorithm::exhaustive);
}

struct PoolingResult {
  PowerAllocation allocation{0, 0};
  std::vector<double> spectral_efficiency;  // Σ_k log2(1+γ_n^k), bits/s/Hz
  std::vector<double> water_level;          // μ_n
};

/// Classic water-filling of `budget` over carriers with inverse gains
/// `floors` (1/ĥ, +inf for unusable carriers). Returns μ and writes powers.
inline double water_fill(std::span<const double> floors, double budget, std::span<double> powers) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < floors.size(); ++k)
    if (std::isfinite(floors[k])) idx.push_back(k);
  if (idx.empty()) throw no_usable_carrier("water_fill: no carrier with positive gain");
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return floors[a] < floors[b]; });
  double level = 0.0;
  double sum = 0.0;
  for (std::size_t m = 0; m < idx.size(); ++m) {
    sum += floors[idx[m]];
    const double candidate = (budget + sum) / static_cast<double>(m + 1);
    if (m > 0 && candidate <= floors[idx[m]]) break;
    level = candidate;
  }
  for (std::size_t k = 0; k < floors.size(); ++k)
    powers[k] = std::isfinite(floors[k]) ? std::max(0.0, level - floors[k]) : 0.0;
  return level;
}

/// Throughput-maximizing reference: in hierarchy order each player
/// water-fills its own budget across all carriers, treating the powers of
/// higher levels as interference.
inline PoolingResult spectrum_pooling(const GameConfig& config, const ChannelMatrix& channels,
                                      double budget) {
  check_dimensions(config, channels);
  if (!(budget > 0.0) || !std::isfinite(budget))
    throw precondition_error("spectrum_pooling: power budget must be positive");
  PoolingResult res;
  res.allocation = PowerAllocation(config.n_players, config.n_carriers);
  res.water_level.resize(config.n_players);
  std::vector<double> floors(config.n_carriers);
  std::vector<double> powers(config.n_carriers);
  for (std::size_t n = 0; n < config.n_players; ++n) {
    const auto h = detail::effective_gains_row(config, channels, res.allocation, n);
    for (std::size_t k = 0; k < config.n_carriers; ++k)
      floors[k] = h[k] > 0.0 ? 1.0 / h[k] : std::numeric_limits<double>::infinity();
    res.water_level[n] = water_fill(floors, budget, powers);
    res.allocation.set_row(n, powers);
  }
  const SinrProfile sinr = compute_sinr(config, channels, res.allocation);
  res.spectral_efficiency.assign(config.n_players, 0.0);
  for (std::size_t n = 0; n < config.n_players; ++n)
    for (std::size_t k = 0; k < config.n_carriers; ++k)
      res.spectral_efficiency[n] += std::log2(1.0 + sinr.sinr(n, k));
  return res;
}

// Default pooling budget: the energy of one coordinated transmission at unit gain.
inline double default_pooling_budget(const GameConfig& config, const EfficiencyModel& model) {
  return model.gamma_star() * config.noise_variance;
}

/// Rank-aligned gains g̃_n^k = ρ_n(k) max_l g_n^l: same sorted ratios as
/// `channels`, but every player's k-th best carrier is carrier k.
inline ChannelMatrix rank_aligned_gains(const ChannelMatrix& channels) {
  const QualityRatios ratios = quality_ratios(channels);
  Matrix g(channels.players(), channels.carriers());
  for (std::size_t n = 0; n < channels.players(); ++n)
    for (std::size_t k = 0; k < channels.carriers(); ++k)
      g(n, k) = ratios.sorted(n, k) * channels.best_gain(n);
  return ChannelMatrix(std::move(g));
}

}  // namespace eecoord
