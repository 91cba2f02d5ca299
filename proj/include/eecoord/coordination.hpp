#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eecoord/efficiency.hpp"
#include "eecoord/errors.hpp"
#include "eecoord/game.hpp"
#include "eecoord/matrix.hpp"
#include "eecoord/random.hpp"

namespace eecoord {

// Quality ratios ρ_n^k = g_n^k / max_l g_n^l together with each row sorted
// in nonincreasing order (ties kept in carrier-index order).
//
// A table built by quality_ratios() has ρ_n(1) = 1 on every row. Tables
// produced by restrict() keep the original ratio values over a subset of
// carriers, so their leading sorted entry may be below one.
class QualityRatios {
 public:
  explicit QualityRatios(Matrix rho) : rho_(std::move(rho)), sorted_(rho_.rows(), rho_.cols()) {
    order_.resize(rho_.rows() * rho_.cols());
    for (std::size_t n = 0; n < rho_.rows(); ++n) {
      auto idx = std::span(order_).subspan(n * rho_.cols(), rho_.cols());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      const auto r = rho_.row(n);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });
      for (std::size_t l = 0; l < idx.size(); ++l) sorted_(n, l) = r[idx[l]];
    }
  }

  std::size_t players() const noexcept { return rho_.rows(); }
  std::size_t carriers() const noexcept { return rho_.cols(); }

  // ρ_n^k
  const Matrix& rho() const noexcept { return rho_; }
  // Row n holds ρ_n(1) >= ρ_n(2) >= ...
  const Matrix& rho_sorted() const noexcept { return sorted_; }
  double sorted(std::size_t n, std::size_t l) const noexcept { return sorted_(n, l); }
  // Carrier realizing ρ_n(l).
  std::size_t sort_order(std::size_t n, std::size_t l) const noexcept {
    return order_[n * rho_.cols() + l];
  }

  // Table over a subset of players and carriers, ratios not renormalized.
  QualityRatios restrict(std::span<const std::size_t> player_ids,
                         std::span<const std::size_t> carrier_ids) const {
    Matrix sub(player_ids.size(), carrier_ids.size());
    for (std::size_t i = 0; i < player_ids.size(); ++i)
      for (std::size_t j = 0; j < carrier_ids.size(); ++j)
        sub(i, j) = rho_(player_ids[i], carrier_ids[j]);
    return QualityRatios(std::move(sub));
  }

 private:
  Matrix rho_;
  Matrix sorted_;
  std::vector<std::size_t> order_;
};

inline QualityRatios quality_ratios(const ChannelMatrix& channels) {
  Matrix rho(channels.players(), channels.carriers());
  for (std::size_t n = 0; n < channels.players(); ++n) {
    const double best = channels.best_gain(n);
    for (std::size_t k = 0; k < channels.carriers(); ++k) rho(n, k) = channels(n, k) / best;
  }
  return QualityRatios(std::move(rho));
}

// π: position -> player (0-based).
struct Ordering {
  std::vector<std::size_t> perm;

  static Ordering identity(std::size_t n) {
    Ordering o;
    o.perm.resize(n);
    std::iota(o.perm.begin(), o.perm.end(), std::size_t{0});
    return o;
  }

  std::size_t size() const noexcept { return perm.size(); }

  bool is_permutation_of(std::size_t n) const {
    if (perm.size() != n) return false;
    std::vector<bool> seen(n, false);
    for (std::size_t p : perm) {
      if (p >= n || seen[p]) return false;
      seen[p] = true;
    }
    return true;
  }

  friend bool operator==(const Ordering&, const Ordering&) = default;
};

enum class SearchStop {
  width_below_delta,
  alpha_exceeds_threshold,
  no_feasible_alpha,
};

inline std::string_view to_string(SearchStop s) {
  switch (s) {
    case SearchStop::width_below_delta: return "width_below_delta";
    case SearchStop::alpha_exceeds_threshold: return "alpha_exceeds_threshold";
    case SearchStop::no_feasible_alpha: return "no_feasible_alpha";
  }
  return "?";
}

// Whether the bisection may stop as soon as the feasible level exceeds
// 1/(1+γ*). Full refinement keeps bisecting down to width δ.
enum class EarlyStop { at_equilibrium_threshold, never };

struct OrderingSearchResult {
  double alpha_star = 0.0;
  Ordering ordering;
  SearchStop converged_by = SearchStop::no_feasible_alpha;
  int iterations = 0;
};

/// Tries to seat every player at a position l whose l-th best ratio is at
/// least `alpha`. Player n first targets the deepest slot l* with
/// ρ_n(l*) >= alpha, then the nearest free slot above it. Returns the
/// resulting ordering (empty slots dropped) or nullopt if some player finds
/// no free slot.
inline std::optional<Ordering> place_players(const QualityRatios& ratios, double alpha) {
  const std::size_t slots_count = ratios.carriers();
  constexpr std::size_t empty = static_cast<std::size_t>(-1);
  std::vector<std::size_t> slots(slots_count, empty);
  for (std::size_t n = 0; n < ratios.players(); ++n) {
    const auto row = ratios.rho_sorted().row(n);
    const auto qualifying = static_cast<std::size_t>(
        std::partition_point(row.begin(), row.end(), [&](double r) { return r >= alpha; }) -
        row.begin());
    if (qualifying == 0) return std::nullopt;
    std::size_t l = qualifying;  // one past l*
    while (l > 0 && slots[l - 1] != empty) --l;
    if (l == 0) return std::nullopt;
    slots[l - 1] = n;
  }
  Ordering out;
  for (std::size_t s : slots)
    if (s != empty) out.perm.push_back(s);
  return out;
}

/// Bisection over the quality level α for the ordering that maximizes the
/// worst retained ratio min_l ρ_{π(l)}(l).
///
/// Returns the last feasible level and its ordering. When no trial level is
/// feasible the result is α* = 0 with the identity ordering.
inline OrderingSearchResult ordering_search(const QualityRatios& ratios, double delta,
                                            double gamma_star,
                                            EarlyStop early = EarlyStop::at_equilibrium_threshold) {
  if (!(delta > 0.0 && delta < 1.0))
    throw precondition_error("ordering_search: delta must lie in (0,1)");
  const double threshold = 1.0 / (1.0 + gamma_star);
  OrderingSearchResult res;
  res.ordering = Ordering::identity(ratios.players());
  double lower = 0.0;
  double upper = 1.0;
  bool found = false;
  for (;;) {
    if (upper - lower < delta) {
      res.converged_by = found ? SearchStop::width_below_delta : SearchStop::no_feasible_alpha;
      break;
    }
    if (early == EarlyStop::at_equilibrium_threshold && lower > threshold) {
      res.converged_by = SearchStop::alpha_exceeds_threshold;
      break;
    }
    const double trial = 0.5 * (lower + upper);
    ++res.iterations;
    if (auto placed = place_players(ratios, trial)) {
      res.ordering = std::move(*placed);
      lower = trial;
      found = true;
    } else {
      upper = trial;
    }
  }
  res.alpha_star = found ? lower : 0.0;
  return res;
}

enum class Algorithm { pi_csc, ocsc, mcsc, random, exhaustive };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::pi_csc: return "pi-csc";
    case Algorithm::ocsc: return "ocsc";
    case Algorithm::mcsc: return "mcsc";
    case Algorithm::random: return "random";
    case Algorithm::exhaustive: return "exhaustive";
  }
  return "?";
}

// A complete-coordination outcome: player n alone on carrier assignment[n]
// at power γ*σ²/g.
struct CoordinationOutcome {
  std::vector<std::size_t> assignment;  // κ(n)
  PowerAllocation allocation{0, 0};
  Ordering ordering;
  double alpha_star = 0.0;
  Algorithm algorithm = Algorithm::pi_csc;
};

/// Builds the one-hot allocation for an injective assignment.
inline CoordinationOutcome coordinated_outcome(const GameConfig& config,
                                               const ChannelMatrix& channels,
                                               const EfficiencyModel& model,
                                               std::vector<std::size_t> assignment,
                                               Ordering ordering, Algorithm algorithm) {
  check_dimensions(config, channels);
  if (assignment.size() != config.n_players)
    throw dimension_error("assignment must have one carrier per player");
  CoordinationOutcome out;
  out.allocation = PowerAllocation(config.n_players, config.n_carriers);
  std::vector<bool> used(config.n_carriers, false);
  for (std::size_t n = 0; n < assignment.size(); ++n) {
    const std::size_t k = assignment[n];
    if (k >= config.n_carriers || used[k])
      throw precondition_error("assignment is not injective");
    used[k] = true;
    const double g = channels(n, k);
    if (!(g > 0.0))
      throw no_usable_carrier("player " + std::to_string(n + 1) + " assigned a zero-gain carrier");
    out.allocation.set(n, k, model.gamma_star() * config.noise_variance / g);
  }
  out.assignment = std::move(assignment);
  out.ordering = std::move(ordering);
  out.algorithm = algorithm;
  return out;
}

namespace detail {

inline std::size_t strongest_free_carrier(const ChannelMatrix& channels, std::size_t player,
                                          const std::vector<bool>& taken) {
  std::size_t best = taken.size();
  for (std::size_t k = 0; k < taken.size(); ++k) {
    if (taken[k]) continue;
    if (best == taken.size() || channels(player, k) > channels(player, best)) best = k;
  }
  if (best == taken.size() || !(channels(player, best) > 0.0))
    throw no_usable_carrier("player " + std::to_string(player + 1) +
                            " has no free carrier with positive gain");
  return best;
}

}  // namespace detail

/// π-CSC: players pick, in the order π, their strongest carrier not yet taken.
inline CoordinationOutcome pi_csc(const GameConfig& config, const ChannelMatrix& channels,
                                  const Ordering& ordering, const EfficiencyModel& model) {
  config.validate();
  check_dimensions(config, channels);
  if (!ordering.is_permutation_of(config.n_players))
    throw precondition_error("pi_csc: ordering is not a permutation of the players");
  std::vector<bool> taken(config.n_carriers, false);
  std::vector<std::size_t> assignment(config.n_players);
  for (std::size_t player : ordering.perm) {
    const std::size_t k = detail::strongest_free_carrier(channels, player, taken);
    taken[k] = true;
    assignment[player] = k;
  }
  return coordinated_outcome(config, channels, model, std::move(assignment), ordering,
                             Algorithm::pi_csc);
}

inline CoordinationOutcome delta_ocsc(const GameConfig& config, const ChannelMatrix& channels,
                                      const EfficiencyModel& model) {
  config.validate();
  check_dimensions(config, channels);
  const auto search = ordering_search(quality_ratios(channels), config.delta, model.gamma_star());
  auto out = pi_csc(config, channels, search.ordering, model);
  out.alpha_star = search.alpha_star;
  out.algorithm = Algorithm::ocsc;
  return out;
}

struct McscResult {
  CoordinationOutcome outcome;
  std::vector<double> alpha_trace;  // α* of each iteration
};

/// δ-MCSC: re-runs the ordering search on the shrinking problem and commits
/// only the head of each ordering. Ratios keep their full-matrix denominators.
///
/// outcome.alpha_star is the smallest level in the trace; every player
/// committed at iteration t retains at least alpha_trace[t] of its maximum.
inline McscResult delta_mcsc(const GameConfig& config, const ChannelMatrix& channels,
                             const EfficiencyModel& model) {
  config.validate();
  check_dimensions(config, channels);
  const QualityRatios full = quality_ratios(channels);
  std::vector<std::size_t> players(config.n_players);
  std::iota(players.begin(), players.end(), std::size_t{0});
  std::vector<std::size_t> carriers(config.n_carriers);
  std::iota(carriers.begin(), carriers.end(), std::size_t{0});

  McscResult res;
  std::vector<std::size_t> assignment(config.n_players);
  Ordering commit_order;
  while (!players.empty()) {
    const auto search =
        ordering_search(full.restrict(players, carriers), config.delta, model.gamma_star());
    res.alpha_trace.push_back(search.alpha_star);
    const std::size_t local = search.ordering.perm.front();
    const std::size_t player = players[local];

    std::size_t best = 0;
    for (std::size_t j = 1; j < carriers.size(); ++j)
      if (channels(player, carriers[j]) > channels(player, carriers[best])) best = j;
    if (!(channels(player, carriers[best]) > 0.0))
      throw no_usable_carrier("player " + std::to_string(player + 1) +
                              " has no free carrier with positive gain");
    assignment[player] = carriers[best];
    commit_order.perm.push_back(player);
    players.erase(players.begin() + static_cast<std::ptrdiff_t>(local));
    carriers.erase(carriers.begin() + static_cast<std::ptrdiff_t>(best));
  }
  res.outcome = coordinated_outcome(config, channels, model, std::move(assignment),
                                    std::move(commit_order), Algorithm::mcsc);
  res.outcome.alpha_star = *std::min_element(res.alpha_trace.begin(), res.alpha_trace.end());
  return res;
}

// Baseline: π-CSC under a uniformly random ordering. No quality level is certified.
inline CoordinationOutcome random_coordination(const GameConfig& config,
                                               const ChannelMatrix& channels,
                                               const EfficiencyModel& model,
                                               std::uint64_t seed) {
  Rng rng(seed);
  Ordering o{rng.permutation(config.n_players)};
  auto out = pi_csc(config, channels, o, model);
  out.algorithm = Algorithm::random;
  out.alpha_star = 0.0;
  return out;
}

}  // namespace eecoord
