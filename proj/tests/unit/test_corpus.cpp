#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "endgame/corpus.hpp"
#include "endgame/parcel_delivery.hpp"

using namespace endgame::parcel;

TEST(Corpus, UnloadCalibration) {
  const Corpus c = build_corpus(1, 24, 20000);
  const PoolStats s = pool_stats(c);
  const double target = 24 * 3.42 / 2000;
  EXPECT_NEAR(s.mean_unload, target, 0.1 * target);
  EXPECT_EQ(c.packages.size(), 20000u);
  EXPECT_EQ(c.centers.size(), 24u);
  for (auto n : s.zone_counts) {
    EXPECT_GE(n, 20000 / 24 - 200);
    EXPECT_LE(n, 20000 / 24 + 200);
  }
}

TEST(Corpus, ZeroSpreadSitsOnCenters) {
  GeneratorSpec spec;
  spec.spread_km = 0.0;
  const Corpus c = generate_pool(3, 6, 500, spec);
  for (const auto& p : c.packages) EXPECT_NEAR((p.position - c.centers[p.default_zone]).norm(), 0.0, 1e-12);
}

TEST(Corpus, ResampledDayUnloadMatchesPool) {
  const Corpus c = build_corpus(2, 8, 4000);
  const PoolStats s = pool_stats(c);
  const std::int64_t T = 2000;
  const auto day = sample_day(c, T, 77);
  double total = 0;
  for (auto id : day) total += c.packages[id].unload;
  EXPECT_NEAR(total, T * s.mean_unload, 3 * std::sqrt(static_cast<double>(T)) * s.sd_unload);
}

TEST(Corpus, Deterministic) {
  const Corpus a = build_corpus(5, 4, 1000), b = build_corpus(5, 4, 1000);
  std::ostringstream sa, sb;
  write_corpus(sa, a);
  write_corpus(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Corpus, RoundTrip) {
  const Corpus a = build_corpus(6, 5, 800);
  std::ostringstream os;
  write_corpus(os, a);
  std::istringstream is(os.str());
  const Corpus b = read_corpus(is);
  ASSERT_EQ(b.packages.size(), a.packages.size());
  EXPECT_EQ(b.zones, a.zones);
  EXPECT_EQ(b.seed, a.seed);
  EXPECT_EQ(b.depot, a.depot);
  for (std::size_t i = 0; i < a.packages.size(); ++i) {
    EXPECT_EQ(b.packages[i].position, a.packages[i].position);
    EXPECT_EQ(b.packages[i].unload, a.packages[i].unload);
    EXPECT_EQ(b.packages[i].default_zone, a.packages[i].default_zone);
  }
  std::ostringstream again;
  write_corpus(again, b);
  EXPECT_EQ(again.str(), os.str());
}

TEST(Corpus, RejectsForeignFiles) {
  std::istringstream is("x,y\n1,2\n");
  EXPECT_THROW(read_corpus(is), std::runtime_error);
}

TEST(GeneratorSpec, DescribeParse) {
  GeneratorSpec spec;
  spec.spacing_km = 3.25;
  spec.unload_sigma = 0.4;
  const GeneratorSpec back = GeneratorSpec::parse(spec.describe());
  EXPECT_EQ(back.spacing_km, 3.25);
  EXPECT_EQ(back.unload_sigma, 0.4);
  EXPECT_EQ(back.describe(), spec.describe());
  EXPECT_THROW(GeneratorSpec::parse("colour=3"), std::invalid_argument);
}
