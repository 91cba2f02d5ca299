#pragma once

// Test-only fixtures and brute-force oracles. Nothing here calls into the
// algorithm under test except through its public result types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "eecoord/game.hpp"
#include "eecoord/matrix.hpp"

namespace fixtures {

using eecoord::ChannelMatrix;
using eecoord::Matrix;

// g_n^k = 1 - kε for k <= n, (K - k)ε otherwise (1-based n, k).
inline ChannelMatrix staircase_gains(std::size_t players, std::size_t carriers, double eps) {
  Matrix g(players, carriers);
  for (std::size_t n = 1; n <= players; ++n)
    for (std::size_t k = 1; k <= carriers; ++k)
      g(n - 1, k - 1) = k <= n ? 1.0 - static_cast<double>(k) * eps
                               : static_cast<double>(carriers - k) * eps;
  return ChannelMatrix(std::move(g));
}

inline ChannelMatrix random_gains(std::size_t players, std::size_t carriers, std::mt19937_64& rng) {
  std::exponential_distribution<double> exp1(1.0);
  Matrix g(players, carriers);
  for (std::size_t n = 0; n < players; ++n)
    for (std::size_t k = 0; k < carriers; ++k) g(n, k) = exp1(rng);
  return ChannelMatrix(std::move(g));
}

// l-th largest ratio g_n^k / max g_n (0-based l), computed from scratch.
inline double kth_ratio(const ChannelMatrix& ch, std::size_t n, std::size_t l) {
  std::vector<double> row(ch.row(n).begin(), ch.row(n).end());
  std::sort(row.begin(), row.end(), std::greater<>());
  return row[l] / row[0];
}

// min over positions l of the l-th best ratio of the player at position l.
inline double min_ratio(const ChannelMatrix& ch, const std::vector<std::size_t>& perm) {
  double m = 1.0;
  for (std::size_t l = 0; l < perm.size(); ++l) m = std::min(m, kth_ratio(ch, perm[l], l));
  return m;
}

// max over all N! orderings of min_ratio.
inline double best_min_ratio(const ChannelMatrix& ch) {
  std::vector<std::size_t> perm(ch.players());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = 0.0;
  do {
    best = std::max(best, min_ratio(ch, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Energy efficiency R f(x)/p of a single-carrier transmission, from first principles.
inline double single_carrier_utility(double rate, int order, double p, double effective_gain) {
  if (p <= 0.0) return 0.0;
  const double x = p * effective_gain;
  return rate * std::pow(1.0 - std::exp(-x), order) / p;
}

struct GridOptimum {
  std::size_t carrier = 0;
  double power = 0.0;
  double utility = 0.0;
  double step = 0.0;  // grid spacing on the winning carrier
};

// Dense scan over single-carrier powers for one player given effective gains.
// The range covers SINR up to 50, beyond which f is 1 to double precision.
inline GridOptimum grid_best_response(const std::vector<double>& effective_gains, double rate,
                                      int order, std::size_t points) {
  GridOptimum best;
  for (std::size_t k = 0; k < effective_gains.size(); ++k) {
    const double h = effective_gains[k];
    if (h <= 0.0) continue;
    const double top = 50.0 / h;
    const double step = top / static_cast<double>(points);
    for (std::size_t i = 1; i <= points; ++i) {
      const double p = step * static_cast<double>(i);
      const double u = single_carrier_utility(rate, order, p, h);
      if (u > best.utility) best = {k, p, u, step};
    }
  }
  return best;
}

// ĥ_n^k straight from the SINR definition, given powers of higher levels.
inline std::vector<double> effective_gains(const ChannelMatrix& ch, const Matrix& powers,
                                           double noise, std::size_t n) {
  std::vector<double> h(ch.carriers());
  for (std::size_t k = 0; k < ch.carriers(); ++k) {
    double interference = 0.0;
    for (std::size_t m = 0; m < n; ++m) interference += ch(m, k) * powers(m, k);
    h[k] = ch(n, k) / (noise + interference);
  }
  return h;
}

}  // namespace fixtures
