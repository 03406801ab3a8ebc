#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "endgame/balls_bins.hpp"

using namespace endgame::bins;
using endgame::RandomStream;

namespace {

LoadState state_of(std::initializer_list<std::int64_t> loads) {
  LoadState s(loads.size());
  Eigen::Index i = 0;
  for (auto v : loads) {
    s.loads[i++] = v;
    s.t += v;
  }
  return s;
}

// E|X - T/2| for X ~ Binomial(T, 1/2), summed exactly.
double binomial_gap(int T) {
  double total = 0.0;
  for (int k = 0; k <= T; ++k) {
    const double log_p = std::lgamma(T + 1.0) - std::lgamma(k + 1.0) - std::lgamma(T - k + 1.0) - T * std::log(2.0);
    total += std::exp(log_p) * std::abs(k - T / 2.0);
  }
  return total;
}

// Mean final gap over all 2^T preferred-bin sequences with every ball flexible.
double enumerate_gap(const PolicySpec& policy, int T) {
  const ModelParams params{T, 2, 1.0, 2};
  const ReplicationStreams streams(RandomStream(1));
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << T); ++mask) {
    Arrival arrival;
    const auto rec = run_with_feed(policy, params, streams, [&](Period t) -> const Arrival& {
      arrival.is_flex = true;
      arrival.preferred = (mask >> t) & 1u;
      arrival.flex_set = {0, 1};
      return arrival;
    });
    total += rec.final_gap;
  }
  return total / static_cast<double>(1u << T);
}

}  // namespace

TEST(Arrival, CertainFlex) {
  const ModelParams p{100, 5, 1.0, 3};
  const ReplicationStreams s(RandomStream(2));
  for (Period t = 0; t < 100; ++t) {
    const Arrival a = draw_arrival(s, p, t);
    ASSERT_TRUE(a.is_flex);
    ASSERT_EQ(a.flex_set.size(), 3u);
    for (std::size_t i = 0; i < a.flex_set.size(); ++i) {
      ASSERT_LT(a.flex_set[i], 5u);
      if (i) ASSERT_LT(a.flex_set[i - 1], a.flex_set[i]);
    }
  }
}

TEST(Arrival, TwoBinsPairIsFixed) {
  const ModelParams p{50, 2, 1.0, 2};
  const ReplicationStreams s(RandomStream(3));
  for (Period t = 0; t < 50; ++t) EXPECT_EQ(draw_arrival(s, p, t).flex_set, (std::vector<BinIndex>{0, 1}));
}

TEST(Arrival, FlexFractionMatchesQ) {
  const ModelParams p{1000000, 5, 0.1, 2};
  const ReplicationStreams s(RandomStream(4));
  Arrival a;
  int flex = 0;
  for (Period t = 0; t < p.horizon; ++t) {
    draw_arrival(s, p, t, a);
    if (a.is_flex) ++flex;
    else ASSERT_TRUE(a.flex_set.empty());
  }
  EXPECT_NEAR(flex / 1e6, 0.1, 0.002);
}

TEST(Gap, Examples) {
  EXPECT_DOUBLE_EQ(gap(state_of({2, 2, 2})), 0.0);
  EXPECT_DOUBLE_EQ(gap(state_of({3, 1, 2})), 1.0);
  EXPECT_DOUBLE_EQ(gap(state_of({5, 1})), 2.0);
}

TEST(FlexPair, Passthrough) {
  RandomStream rng(1);
  EXPECT_EQ(choose_flex_pair({3, 7}, rng), (std::pair<BinIndex, BinIndex>{3, 7}));
}

TEST(FlexPair, UniformOverPairs) {
  RandomStream rng(8);
  std::map<std::pair<BinIndex, BinIndex>, int> counts;
  const int n = 300000;
  for (int i = 0; i < n; ++i) {
    auto [a, b] = choose_flex_pair({1, 2, 3}, rng);
    counts[{std::min(a, b), std::max(a, b)}]++;
  }
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [pair, c] : counts) EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 3.0, 0.01);
}

TEST(FlexPair, RejectsSingleton) {
  RandomStream rng(1);
  EXPECT_THROW(choose_flex_pair({4}, rng), endgame::ContractError);
}

TEST(Allocate, Examples) {
  RandomStream rng(1);
  Arrival a{true, 0, {1, 2}};
  EXPECT_EQ(allocate(state_of({0, 4, 2, 0}), a, true, rng), 2u);
  Arrival tie{true, 0, {2, 1}};
  EXPECT_EQ(allocate(state_of({0, 3, 3, 0}), tie, true, rng), 1u);
  Arrival plain{true, 0, {1, 2}};
  EXPECT_EQ(allocate(state_of({0, 4, 2, 0}), plain, false, rng), 0u);
}

TEST(Constants, TheoryValues) {
  const ModelParams p{100, 2, 1.0, 2};
  EXPECT_NEAR(theory_static_constant(p), 4.0 * std::sqrt(6.0), 1e-12);
  EXPECT_NEAR(theory_static_constant(p), 9.7980, 1e-4);
  EXPECT_NEAR(theory_dynamic_constant(p), 0.2, 1e-12);
}

TEST(StaticStart, Examples) {
  EXPECT_EQ(static_start(10000, 9.798), 7026);
  EXPECT_EQ(static_start(10, 100.0), 0);
  EXPECT_EQ(static_start(1000, 0.0), 1000);
}

TEST(DynamicRule, Examples) {
  const ModelParams p{100, 2, 1.0, 2};
  LoadState s = state_of({46, 44});  // t = 90, gap 1
  EXPECT_TRUE(dynamic_should_flex(s, p, 0.2));
  LoadState balanced = state_of({45, 45});
  EXPECT_FALSE(dynamic_should_flex(balanced, p, 0.2));
  LoadState end = state_of({50, 50});  // t = T
  EXPECT_TRUE(dynamic_should_flex(end, p, 0.2));
}

TEST(FlexSqrtT, Extremes) {
  RandomStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_FALSE(flex_sqrt_t_should_flex(rng, 100, 100));
    ASSERT_TRUE(flex_sqrt_t_should_flex(rng, 100, 0));
  }
}

TEST(FlexSqrtT, Rate) {
  RandomStream rng(12);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += flex_sqrt_t_should_flex(rng, 10000, 7026);
  EXPECT_NEAR(hits / 1e5, 0.2974, 0.005);
}

TEST(Run, NoFlexNeverFlexes) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rec = run(NoFlex{}, ModelParams{2000, 5, 0.5, 2}, seed);
    EXPECT_EQ(rec.flex_count, 0);
    EXPECT_GT(rec.flex_arrivals, 0);
  }
}

TEST(Run, AlwaysFlexWithCertainFlexUsesEveryBall) {
  const auto rec = run(AlwaysFlex{}, ModelParams{777, 4, 1.0, 2}, 3);
  EXPECT_EQ(rec.flex_count, 777);
}

TEST(Run, LoadsSumToHorizonAndTrajectoryMatches) {
  RunOptions opt;
  opt.record_trajectory = true;
  const auto rec = run(Dynamic{0.7, false}, ModelParams{5000, 5, 0.1, 2}, 9, opt);
  EXPECT_EQ(rec.final_loads.sum(), 5000);
  ASSERT_TRUE(rec.gap_trajectory);
  EXPECT_EQ(rec.gap_trajectory->size(), 5000u);
  EXPECT_DOUBLE_EQ(rec.gap_trajectory->back(), rec.final_gap);
  EXPECT_LE(rec.flex_count, rec.flex_arrivals);
}

TEST(Run, Deterministic) {
  const ModelParams p{3000, 5, 0.1, 2};
  EXPECT_EQ(run(FlexSqrtT{10}, p, 17), run(FlexSqrtT{10}, p, 17));
}

TEST(Run, LatchedStaysOn) {
  const ModelParams p{4000, 5, 0.1, 2};
  const auto latched = run(Dynamic{0.7, true}, p, 21);
  ASSERT_TRUE(latched.first_trigger);
  // Once latched every later flex arrival is flexed.
  const auto free_run = run(Dynamic{0.7, false}, p, 21);
  EXPECT_GE(latched.flex_count, free_run.flex_count);
}

TEST(Oracle, NoFlexMatchesBinomial) {
  for (int T = 1; T <= 12; ++T) EXPECT_NEAR(enumerate_gap(NoFlex{}, T), binomial_gap(T), 1e-12) << "T=" << T;
}

TEST(Oracle, AlwaysFlexIsBalanced) {
  for (int T = 1; T <= 12; ++T) EXPECT_NEAR(enumerate_gap(AlwaysFlex{}, T), (T % 2) / 2.0, 1e-12) << "T=" << T;
}

TEST(Oracle, SimulatedNoFlexAgreesWithBinomial) {
  const ModelParams p{40, 2, 1.0, 2};
  double s = 0, sq = 0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    const double g = run(NoFlex{}, p, static_cast<std::uint64_t>(r)).final_gap;
    s += g;
    sq += g * g;
  }
  const double mean = s / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  EXPECT_NEAR(mean, binomial_gap(40), 4 * se);
}

TEST(Params, Validation) {
  EXPECT_THROW((ModelParams{0, 2, 0.5, 2}.validate()), endgame::ContractError);
  EXPECT_THROW((ModelParams{10, 1, 0.5, 2}.validate()), endgame::ContractError);
  EXPECT_THROW((ModelParams{10, 3, 0.0, 2}.validate()), endgame::ContractError);
  EXPECT_THROW((ModelParams{10, 3, 0.5, 4}.validate()), endgame::ContractError);
  EXPECT_NO_THROW((ModelParams{10, 3, 1.0, 3}.validate()));
}
