#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "eecoord/baselines.hpp"
#include "fixtures.hpp"

using namespace eecoord;

namespace {

const EfficiencyModel& model100() {
  static const EfficiencyModel m(100);
  return m;
}

double welfare(const GameConfig& cfg, const ChannelMatrix& ch, const PowerAllocation& p) {
  const auto u = compute_utilities(cfg, ch, p, model100());
  return std::accumulate(u.utilities.begin(), u.utilities.end(), 0.0);
}

CoordinationOutcome assigned(const GameConfig& cfg, const ChannelMatrix& ch,
                             std::vector<std::size_t> kappa) {
  return coordinated_outcome(cfg, ch, model100(), std::move(kappa),
                             Ordering::identity(cfg.n_players), Algorithm::pi_csc);
}

}  // namespace

TEST(Equilibrium, ExactExample) {
  const auto cfg = GameConfig::uniform(2, 2, 0.1);
  const ChannelMatrix ch(Matrix{{1.0, 0.9}, {0.2, 0.8}});
  const auto rep = equilibrium_check(cfg, ch, assigned(cfg, ch, {0, 1}), model100());
  EXPECT_TRUE(rep.is_exact);
  EXPECT_EQ(rep.epsilon, 0.0);
  // The best deviations are worth 0.9/(1+γ*) and 0.2/(1+γ*), well under the current gains.
  const double crowd = 1.0 + model100().gamma_star();
  EXPECT_NEAR(0.9 / crowd, 0.12040777, 1e-8);
  EXPECT_NEAR(0.2 / crowd, 0.02675728, 1e-8);
}

TEST(Equilibrium, SlackExample) {
  const auto cfg = GameConfig::uniform(2, 2, 0.1);
  const ChannelMatrix ch(Matrix{{1.0, 0.99}, {1.0, 0.1}});
  const auto rep = equilibrium_check(cfg, ch, assigned(cfg, ch, {0, 1}), model100());
  EXPECT_FALSE(rep.is_exact);
  EXPECT_EQ(rep.per_player_slack[0], 0.0);
  EXPECT_NEAR(rep.per_player_slack[1], 0.33786416559562, 1e-11);
  EXPECT_NEAR(rep.per_player_slack[1], 0.339, 2e-3);  // hand value used γ* rounded to 6.47
  EXPECT_EQ(rep.worst_player, 1u);
  EXPECT_EQ(rep.epsilon, rep.per_player_slack[1]);
}

TEST(Equilibrium, SinglePlayerOnArgmax) {
  const auto cfg = GameConfig::uniform(1, 3, 0.1);
  const ChannelMatrix ch(Matrix{{0.3, 0.7, 0.5}});
  EXPECT_TRUE(equilibrium_check(cfg, ch, assigned(cfg, ch, {1}), model100()).is_exact);
  const auto off = equilibrium_check(cfg, ch, assigned(cfg, ch, {0}), model100());
  EXPECT_NEAR(off.epsilon, 0.7 / 0.3 - 1.0, 1e-14);
}

TEST(Equilibrium, IdleCarrierDeviation) {
  const auto cfg = GameConfig::uniform(2, 3, 0.1);
  const ChannelMatrix ch(Matrix{{1.0, 0.5, 0.2}, {0.3, 0.4, 0.6}});
  const auto rep = equilibrium_check(cfg, ch, assigned(cfg, ch, {0, 1}), model100());
  EXPECT_NEAR(rep.per_player_slack[1], 0.6 / 0.4 - 1.0, 1e-14);
}

TEST(Equilibrium, RejectsUncoordinated) {
  const auto cfg = GameConfig::uniform(2, 2, 0.1);
  const ChannelMatrix ch(Matrix{{1.0, 0.9}, {0.2, 0.8}});
  auto out = assigned(cfg, ch, {0, 1});
  out.allocation.set(0, 1, 0.5);
  EXPECT_THROW(equilibrium_check(cfg, ch, out, model100()), precondition_error);
  auto stale = assigned(cfg, ch, {0, 1});
  stale.assignment = {1, 0};
  EXPECT_THROW(equilibrium_check(cfg, ch, stale, model100()), precondition_error);
}

TEST(QualityCertificate, Examples) {
  const auto r = quality_ratios(fixtures::staircase_gains(3, 3, 0.01));
  EXPECT_NEAR(prop2_certificate(r, Ordering::identity(3)), 0.97 / 0.99, 1e-15);
  EXPECT_NEAR(prop2_certificate(r, Ordering::identity(3)), 0.9798, 1e-4);
  EXPECT_EQ(prop2_certificate(r, Ordering{{2, 1, 0}}), 0.0);
  EXPECT_EQ(prop2_certificate(quality_ratios(ChannelMatrix(Matrix{{0.2, 0.4}})), Ordering::identity(1)), 1.0);
  EXPECT_THROW(prop2_certificate(r, Ordering{{0, 1}}), precondition_error);
}

TEST(QualityCertificate, BoundHoldsForEveryOrdering) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + t % 5;
    const auto ch = fixtures::random_gains(n, n, rng);
    const auto cfg = GameConfig::uniform(n, n, 0.1);
    const auto r = quality_ratios(ch);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    int tested = 0;
    do {
      const Ordering o{perm};
      const double cert = prop2_certificate(r, o);
      const auto u = compute_utilities(cfg, ch, pi_csc(cfg, ch, o, model100()).allocation, model100());
      for (std::size_t i = 0; i < n; ++i)
        ASSERT_GE(u.utilities[i], cert * max_utility(cfg, ch, model100(), i) * (1 - 1e-9));
    } while (std::next_permutation(perm.begin(), perm.end()) && ++tested < 24);
  }
}

TEST(Exhaustive, TwoByTwo) {
  const auto cfg = GameConfig::uniform(2, 2, 0.1);
  const ChannelMatrix ch(Matrix{{0.9, 0.4}, {0.8, 0.7}});
  const auto opt = exhaustive_optimum(cfg, ch, model100());
  EXPECT_EQ(opt.best_assignment, (std::vector<std::size_t>{0, 1}));
  const double scale = 1e6 * model100().value(model100().gamma_star()) / (model100().gamma_star() * 0.1);
  EXPECT_NEAR(opt.best_welfare / (scale * 1.6), 1.0, 1e-12);
  EXPECT_NEAR(opt.per_player_max[0] / (scale * 0.9), 1.0, 1e-12);
  EXPECT_NEAR(opt.best_welfare, welfare(cfg, ch, exhaustive_outcome(cfg, ch, model100(), opt).allocation),
              1e-9 * opt.best_welfare);
}

TEST(Exhaustive, SinglePlayer) {
  const auto cfg = GameConfig::uniform(1, 3, 0.1);
  const ChannelMatrix ch(Matrix{{0.3, 0.7, 0.5}});
  const auto opt = exhaustive_optimum(cfg, ch, model100());
  EXPECT_EQ(opt.best_assignment, (std::vector<std::size_t>{1}));
  EXPECT_NEAR(opt.best_welfare, opt.per_player_max[0], 1e-12 * opt.best_welfare);
}

TEST(Exhaustive, LexicographicTieBreak) {
  const auto cfg = GameConfig::uniform(2, 2, 0.1);
  const ChannelMatrix ch(Matrix{{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_EQ(exhaustive_optimum(cfg, ch, model100()).best_assignment, (std::vector<std::size_t>{0, 1}));
}

TEST(Exhaustive, CapRefusesWithGuidance) {
  const auto cfg = GameConfig::uniform(10, 10, 0.1);
  std::mt19937_64 rng(1);
  const auto ch = fixtures::random_gains(10, 10, rng);
  try {
    exhaustive_optimum(cfg, ch, model100());
    FAIL() << "expected refusal";
  } catch (const precondition_error& e) {
    EXPECT_NE(std::string(e.what()).find("matching"), std::string::npos);
  }
  EXPECT_NO_THROW(exhaustive_optimum(GameConfig::uniform(3, 3, 0.1), fixtures::random_gains(3, 3, rng),
                                     model100(), 3));
}

TEST(Exhaustive, DominatesEveryAlgorithm) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 6;
    const std::size_t k = n + t % 3;
    const auto ch = fixtures::random_gains(n, k, rng);
    const auto cfg = GameConfig::uniform(n, k, 0.1);
    const auto opt = exhaustive_optimum(cfg, ch, model100());
    const double tol = 1 + 1e-12;
    EXPECT_LE(welfare(cfg, ch, delta_ocsc(cfg, ch, model100()).allocation), opt.best_welfare * tol);
    EXPECT_LE(welfare(cfg, ch, delta_mcsc(cfg, ch, model100()).outcome.allocation), opt.best_welfare * tol);
    EXPECT_LE(welfare(cfg, ch, random_coordination(cfg, ch, model100(), t).allocation), opt.best_welfare * tol);
  }
}

TEST(CoordinationBounds, EpsilonAndWelfareBounds) {
  std::mt19937_64 rng(33);
  const double threshold = model100().equilibrium_threshold();
  int exact_checks = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + t % 6;
    const std::size_t k = n + t % 2;
    const auto ch = fixtures::random_gains(n, k, rng);
    const auto cfg = GameConfig::uniform(n, k, 0.1);
    const auto opt = exhaustive_optimum(cfg, ch, model100());
    const auto o = delta_ocsc(cfg, ch, model100());
    const auto m = delta_mcsc(cfg, ch, model100());
    const auto rep = equilibrium_check(cfg, ch, o, model100());
    if (o.alpha_star > 0) { EXPECT_LE(rep.epsilon, (1 - o.alpha_star) / o.alpha_star * (1 + 1e-12)); }
    EXPECT_GE(welfare(cfg, ch, o.allocation), o.alpha_star * opt.best_welfare * (1 - 1e-12));
    EXPECT_GE(welfare(cfg, ch, m.outcome.allocation), m.outcome.alpha_star * opt.best_welfare * (1 - 1e-12));
    if (o.alpha_star > threshold) {
      EXPECT_TRUE(rep.is_exact) << "t=" << t;
      ++exact_checks;
    }
  }
  EXPECT_GT(exact_checks, 100);
}

TEST(Pooling, FlatGainsSplitUniformly) {
  const auto cfg = GameConfig::uniform(1, 4, 0.1);
  const ChannelMatrix ch(Matrix{{0.5, 0.5, 0.5, 0.5}});
  const auto res = spectrum_pooling(cfg, ch, 2.0);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(res.allocation(0, k), 0.5, 1e-15);
  EXPECT_NEAR(res.spectral_efficiency[0], 4 * std::log2(1 + 0.5 * 0.5 / 0.1), 1e-12);
}

TEST(Pooling, SmallBudgetGoesToBestCarrier) {
  const auto cfg = GameConfig::uniform(1, 3, 0.1);
  const ChannelMatrix ch(Matrix{{0.5, 0.9, 0.6}});
  const auto res = spectrum_pooling(cfg, ch, 1e-6);
  EXPECT_EQ(res.allocation.active_carrier(0), std::optional<std::size_t>{1});
  EXPECT_NEAR(res.allocation(0, 1), 1e-6, 1e-15);
}

TEST(Pooling, RejectsBadBudget) {
  const auto cfg = GameConfig::uniform(1, 1, 0.1);
  const ChannelMatrix ch(Matrix{{0.5}});
  EXPECT_THROW(spectrum_pooling(cfg, ch, 0.0), precondition_error);
  EXPECT_THROW(spectrum_pooling(cfg, ch, -1.0), precondition_error);
}

TEST(Pooling, KarushKuhnTuckerConditions) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 5;
    const std::size_t k = n + t % 4;
    const auto ch = fixtures::random_gains(n, k, rng);
    const auto cfg = GameConfig::uniform(n, k, 0.1);
    const double budget = t % 2 ? 0.647 : 3.0;
    const auto res = spectrum_pooling(cfg, ch, budget);
    for (std::size_t i = 0; i < n; ++i) {
      const auto h = fixtures::effective_gains(ch, res.allocation.powers(), 0.1, i);
      const double mu = res.water_level[i];
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double p = res.allocation(i, c);
        total += p;
        if (p > 0) {
          EXPECT_NEAR(p + 1 / h[c], mu, 1e-6 * mu);
        } else {
          EXPECT_GE(1 / h[c], mu * (1 - 1e-6));
        }
      }
      EXPECT_NEAR(total, budget, 1e-12 * budget);
    }
  }
}

TEST(Pooling, TwoUserGridOracle) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 20; ++t) {
    const auto ch = fixtures::random_gains(2, 2, rng);
    const auto cfg = GameConfig::uniform(2, 2, 0.1);
    const double budget = 0.647;
    const auto res = spectrum_pooling(cfg, ch, budget);
    // Sequential grid search: user 1 against noise, then user 2 against user 1.
    const int points = 20000;
    auto best_split = [&](double h0, double h1) {
      double best = -1, arg = 0;
      for (int i = 0; i <= points; ++i) {
        const double p = budget * i / points;
        const double r = std::log2(1 + p * h0) + std::log2(1 + (budget - p) * h1);
        if (r > best) best = r, arg = p;
      }
      return std::pair{arg, best};
    };
    const auto [p1, r1] = best_split(ch(0, 0) / 0.1, ch(0, 1) / 0.1);
    const auto [p2, r2] =
        best_split(ch(1, 0) / (0.1 + ch(0, 0) * p1), ch(1, 1) / (0.1 + ch(0, 1) * (budget - p1)));
    (void)p2;
    const double total = res.spectral_efficiency[0] + res.spectral_efficiency[1];
    EXPECT_NEAR(total / (r1 + r2), 1.0, 0.01);
    EXPECT_GE(res.spectral_efficiency[0], r1 * (1 - 1e-9));
  }
}

TEST(RankAligned, PreservesRatiosAndSortsColumns) {
  std::mt19937_64 rng(36);
  for (int t = 0; t < 50; ++t) {
    const auto ch = fixtures::random_gains(4, 6, rng);
    const auto aligned = rank_aligned_gains(ch);
    for (std::size_t n = 0; n < 4; ++n) {
      EXPECT_EQ(aligned.best_gain(n), ch.best_gain(n));
      for (std::size_t l = 0; l < 6; ++l) {
        EXPECT_NEAR(fixtures::kth_ratio(aligned, n, l), fixtures::kth_ratio(ch, n, l), 1e-15);
        if (l > 0) { EXPECT_LE(aligned(n, l), aligned(n, l - 1)); }
      }
    }
    // Sorted ratios are all ordering_search sees, so α* is unchanged.
    EXPECT_EQ(ordering_search(quality_ratios(ch), 1e-3, model100().gamma_star()).alpha_star,
              ordering_search(quality_ratios(aligned), 1e-3, model100().gamma_star()).alpha_star);
  }
}
