#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "eecoord/efficiency.hpp"
#include "eecoord/errors.hpp"
#include "eecoord/matrix.hpp"

namespace eecoord {

// Static parameters of one game instance. Players are indexed by hierarchy
// level: player 0 is the super leader and sees no interference.
struct GameConfig {
  std::size_t n_players = 1;
  std::size_t n_carriers = 1;
  double noise_variance = 0.1;  // watts
  std::vector<double> rates;    // bits/s, one per player
  int efficiency_order = 100;
  double delta = 1e-3;

  static GameConfig uniform(std::size_t players, std::size_t carriers, double noise_variance,
                            double rate = 1e6, int order = 100, double delta = 1e-3) {
    GameConfig c;
    c.n_players = players;
    c.n_carriers = carriers;
    c.noise_variance = noise_variance;
    c.rates.assign(players, rate);
    c.efficiency_order = order;
    c.delta = delta;
    c.validate();
    return c;
  }

  void validate() const {
    if (n_players == 0 || n_carriers == 0)
      throw precondition_error("GameConfig: player and carrier counts must be positive");
    if (n_carriers < n_players)
      throw dimension_error("GameConfig: need K >= N (got N=" + std::to_string(n_players) +
                            ", K=" + std::to_string(n_carriers) + ")");
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
      throw precondition_error("GameConfig: noise variance must be positive");
    if (rates.size() != n_players) throw dimension_error("GameConfig: rates must have N entries");
    for (double r : rates)
      if (!(r > 0.0) || !std::isfinite(r))
        throw precondition_error("GameConfig: rates must be positive");
    if (efficiency_order < 2) throw unsupported_order("GameConfig: efficiency order must be >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw precondition_error("GameConfig: delta must lie in (0,1)");
  }
};

// Fading power gains g_n^k. Every row must contain a strictly positive entry.
class ChannelMatrix {
 public:
  explicit ChannelMatrix(Matrix gains) : gains_(std::move(gains)) {
    if (gains_.rows() == 0 || gains_.cols() == 0)
      throw dimension_error("ChannelMatrix: empty matrix");
    for (std::size_t n = 0; n < gains_.rows(); ++n) {
      bool positive = false;
      for (double g : gains_.row(n)) {
        if (!(g >= 0.0) || !std::isfinite(g))
          throw precondition_error("ChannelMatrix: gains must be finite and non-negative");
        positive = positive || g > 0.0;
      }
      if (!positive)
        throw no_usable_carrier("ChannelMatrix: row " + std::to_string(n + 1) +
                                " has no positive gain");
    }
  }

  std::size_t players() const noexcept { return gains_.rows(); }
  std::size_t carriers() const noexcept { return gains_.cols(); }
  double operator()(std::size_t n, std::size_t k) const noexcept { return gains_(n, k); }
  std::span<const double> row(std::size_t n) const noexcept { return gains_.row(n); }
  const Matrix& gains() const noexcept { return gains_; }

  // B_n: index of the strongest carrier, lowest index on ties.
  std::size_t best_carrier(std::size_t n) const noexcept {
    const auto r = row(n);
    return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  double best_gain(std::size_t n) const noexcept { return gains_(n, best_carrier(n)); }

 private:
  Matrix gains_;
};

// Transmit powers p_n^k in watts.
class PowerAllocation {
 public:
  PowerAllocation(std::size_t players, std::size_t carriers) : powers_(players, carriers) {}
  explicit PowerAllocation(Matrix powers) : powers_(std::move(powers)) {
    for (double p : powers_.values())
      if (!(p >= 0.0) || !std::isfinite(p))
        throw precondition_error("PowerAllocation: powers must be finite and non-negative");
  }

  std::size_t players() const noexcept { return powers_.rows(); }
  std::size_t carriers() const noexcept { return powers_.cols(); }
  double operator()(std::size_t n, std::size_t k) const noexcept { return powers_(n, k); }
  std::span<const double> row(std::size_t n) const noexcept { return powers_.row(n); }
  const Matrix& powers() const noexcept { return powers_; }

  void set(std::size_t n, std::size_t k, double p) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw precondition_error("PowerAllocation: powers must be finite and non-negative");
    powers_(n, k) = p;
  }
  void set_row(std::size_t n, std::span<const double> values) {
    if (values.size() != carriers()) throw dimension_error("PowerAllocation: row length mismatch");
    for (std::size_t k = 0; k < values.size(); ++k) set(n, k, values[k]);
  }

  double total_power(std::size_t n) const noexcept {
    double s = 0.0;
    for (double p : row(n)) s += p;
    return s;
  }

  // The single active carrier of row n, if the row has exactly one nonzero entry.
  std::optional<std::size_t> active_carrier(std::size_t n) const noexcept {
    std::optional<std::size_t> found;
    for (std::size_t k = 0; k < carriers(); ++k) {
      if (powers_(n, k) > 0.0) {
        if (found) return std::nullopt;
        found = k;
      }
    }
    return found;
  }

  // Each row has at most one nonzero entry and no carrier is shared.
  bool is_completely_coordinated() const {
    std::vector<bool> used(carriers(), false);
    for (std::size_t n = 0; n < players(); ++n) {
      std::size_t nonzero = 0;
      for (std::size_t k = 0; k < carriers(); ++k) {
        if (powers_(n, k) > 0.0) {
          if (++nonzero > 1 || used[k]) return false;
          used[k] = true;
        }
      }
    }
    return true;
  }

  friend bool operator==(const PowerAllocation&, const PowerAllocation&) = default;

 private:
  Matrix powers_;
};

struct SinrProfile {
  Matrix sinr;            // γ_n^k
  Matrix effective_gain;  // ĥ_n^k, 1/watts
};

struct UtilityVector {
  std::vector<double> utilities;    // bits/joule
  std::vector<double> throughputs;  // bits/s
};

struct BestResponse {
  std::size_t carrier = 0;
  std::vector<double> powers;
};

inline void check_dimensions(const GameConfig& config, const ChannelMatrix& channels) {
  if (channels.players() != config.n_players || channels.carriers() != config.n_carriers)
    throw dimension_error("channel matrix is " + std::to_string(channels.players()) + "x" +
                          std::to_string(channels.carriers()) + ", config expects " +
                          std::to_string(config.n_players) + "x" +
                          std::to_string(config.n_carriers));
}

inline void check_dimensions(const GameConfig& config, const ChannelMatrix& channels,
                             const PowerAllocation& alloc) {
  check_dimensions(config, channels);
  if (alloc.players() != config.n_players || alloc.carriers() != config.n_carriers)
    throw dimension_error("power allocation dimensions do not match the config");
}

namespace detail {

// ĥ_n^k for one row given the allocation of rows 0..n-1.
inline std::vector<double> effective_gains_row(const GameConfig& config,
                                               const ChannelMatrix& channels,
                                               const PowerAllocation& alloc, std::size_t n) {
  std::vector<double> h(config.n_carriers);
  for (std::size_t k = 0; k < config.n_carriers; ++k) {
    double denom = config.noise_variance;
    for (std::size_t m = 0; m < n; ++m) denom += channels(m, k) * alloc(m, k);
    h[k] = channels(n, k) / denom;
  }
  return h;
}

}  // namespace detail

inline SinrProfile compute_sinr(const GameConfig& config, const ChannelMatrix& channels,
                                const PowerAllocation& alloc) {
  check_dimensions(config, channels, alloc);
  const std::size_t players = config.n_players;
  const std::size_t carriers = config.n_carriers;
  SinrProfile out{Matrix(players, carriers), Matrix(players, carriers)};
  std::vector<double> interference(carriers, 0.0);  // Σ_{m<n} g_m^k p_m^k
  for (std::size_t n = 0; n < players; ++n) {
    for (std::size_t k = 0; k < carriers; ++k) {
      const double h = channels(n, k) / (config.noise_variance + interference[k]);
      out.effective_gain(n, k) = h;
      out.sinr(n, k) = alloc(n, k) * h;
    }
    for (std::size_t k = 0; k < carriers; ++k) interference[k] += channels(n, k) * alloc(n, k);
  }
  return out;
}

inline UtilityVector compute_utilities(const GameConfig& config, const ChannelMatrix& channels,
                                       const PowerAllocation& alloc,
                                       const EfficiencyModel& model) {
  const SinrProfile sinr = compute_sinr(config, channels, alloc);
  UtilityVector out;
  out.utilities.resize(config.n_players, 0.0);
  out.throughputs.resize(config.n_players, 0.0);
  for (std::size_t n = 0; n < config.n_players; ++n) {
    double success = 0.0;
    for (std::size_t k = 0; k < config.n_carriers; ++k) success += model.value(sinr.sinr(n, k));
    out.throughputs[n] = config.rates[n] * success;
    const double power = alloc.total_power(n);
    out.utilities[n] = power > 0.0 ? out.throughputs[n] / power : 0.0;
  }
  return out;
}

/// Energy-efficient best response of player n to the powers of players 0..n-1.
///
/// The player transmits only on the carrier with the largest effective gain
/// (lowest index on ties), at the power that puts its SINR exactly at γ*.
/// Row n and below of `predecessors` are ignored.
inline BestResponse best_response(const GameConfig& config, const ChannelMatrix& channels,
                                  const PowerAllocation& predecessors, std::size_t player,
                                  const EfficiencyModel& model) {
  check_dimensions(config, channels, predecessors);
  if (player >= config.n_players) throw dimension_error("best_response: player out of range");
  const auto h = detail::effective_gains_row(config, channels, predecessors, player);
  const auto best = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
  if (!(h[best] > 0.0))
    throw no_usable_carrier("best_response: player " + std::to_string(player + 1) +
                            " has zero effective gain on every carrier");
  BestResponse br;
  br.carrier = best;
  br.powers.assign(config.n_carriers, 0.0);
  br.powers[best] = model.gamma_star() / h[best];
  return br;
}

// Largest utility player n can reach in any profile: alone on its best carrier
// at SINR γ*. Equals R_n f(γ*) max_k g_n^k / (γ* σ²).
inline double max_utility(const GameConfig& config, const ChannelMatrix& channels,
                          const EfficiencyModel& model, std::size_t n) {
  const double gs = model.gamma_star();
  return config.rates[n] * model.value(gs) * channels.best_gain(n) /
         (gs * config.noise_variance);
}

/// Parses a plain-text channel file: a header line "N K" followed by N rows
/// of K whitespace-separated non-negative gains.
inline ChannelMatrix read_channel_matrix(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw parse_error("channel file: missing 'N K' header");
  std::istringstream header(line);
  long long players = 0;
  long long carriers = 0;
  std::string extra;
  if (!(header >> players >> carriers) || (header >> extra))
    throw parse_error("channel file: header must be two integers 'N K'");
  if (players <= 0 || carriers <= 0)
    throw parse_error("channel file: N and K must be positive");
  Matrix gains(static_cast<std::size_t>(players), static_cast<std::size_t>(carriers));
  for (long long n = 0; n < players; ++n) {
    if (!next_line())
      throw parse_error("channel file: expected " + std::to_string(players) + " rows, got " +
                        std::to_string(n));
    std::istringstream row(line);
    for (long long k = 0; k < carriers; ++k) {
      double g = 0.0;
      if (!(row >> g))
        throw parse_error("channel file: row " + std::to_string(n + 1) + " needs " +
                          std::to_string(carriers) + " numeric gains");
      gains(static_cast<std::size_t>(n), static_cast<std::size_t>(k)) = g;
    }
    if (row >> extra)
      throw parse_error("channel file: row " + std::to_string(n + 1) + " has extra values");
  }
  if (next_line()) throw parse_error("channel file: trailing content after the last row");
  try {
    return ChannelMatrix(std::move(gains));
  } catch (const error& e) {
    throw parse_error(std::string("channel file: ") + e.what());
  }
}

inline ChannelMatrix load_channel_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open channel file '" + path + "'");
  return read_channel_matrix(in);
}

}  // namespace eecoord
