#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "wecs/error.hpp"
#include "wecs/io/keyvalue.hpp"
#include "wecs/piflc.hpp"

using namespace wecs;
using namespace wecs::piflc;

namespace {

const TurbineParams kP;
const FuzzyConfig kC;

double tri(double x, double c) { return std::max(0.0, 1.0 - 3.0 * std::abs(x - c)); }

// Mamdani min/max with the centroid taken by a fine midpoint rule.
double mamdani_oracle(double e, double de) {
  e = std::clamp(e, -1.0, 1.0);
  de = std::clamp(de, -1.0, 1.0);
  double fire[7] = {};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      const double w = std::min(tri(e, (i - 3) / 3.0), tri(de, (j - 3) / 3.0));
      const int o = std::clamp(i + j - 3, 0, 6);
      fire[o] = std::max(fire[o], w);
    }
  const int n = 400000;
  const double lo = -4.0 / 3.0, h = (8.0 / 3.0) / n;
  double num = 0.0, den = 0.0;
  for (int g = 0; g < n; ++g) {
    const double u = lo + (g + 0.5) * h;
    double mu = 0.0;
    for (int k = 0; k < 7; ++k) mu = std::max(mu, std::min(fire[k], tri(u, (k - 3) / 3.0)));
    num += mu * u;
    den += mu;
  }
  return std::clamp(num / den, -1.0, 1.0);
}

}  // namespace

TEST(Fuzzify, CentersAndMidpoints) {
  const Memberships z = fuzzify(0.0);
  for (int k = 0; k < kSets; ++k) EXPECT_EQ(z[k], k == 3 ? 1.0 : 0.0);
  const Memberships one = fuzzify(1.0);
  EXPECT_EQ(one[6], 1.0);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(one[k], 0.0);
  const Memberships sixth = fuzzify(1.0 / 6.0);
  EXPECT_NEAR(sixth[3], 0.5, 1e-15);
  EXPECT_NEAR(sixth[4], 0.5, 1e-15);
  // Saturation beyond the universe.
  EXPECT_EQ(fuzzify(7.0), one);
  EXPECT_EQ(fuzzify(-7.0)[0], 1.0);
}

TEST(Fuzzify, PartitionOfUnity) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> x(-1.5, 1.5);
  for (int i = 0; i < 2000; ++i) {
    const Memberships m = fuzzify(x(rng));
    double sum = 0.0;
    int active = 0;
    for (double v : m) {
      EXPECT_GE(v, 0.0);
      sum += v;
      active += v > 0.0;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LE(active, 2);
  }
}

TEST(Rules, MacvicarWhelanTable) {
  const RuleTable r = FuzzyConfig::default_rules();
  EXPECT_EQ(r[3][3], 3);
  EXPECT_EQ(r[6][6], 6);
  EXPECT_EQ(r[0][0], 0);
  EXPECT_EQ(r[6][0], 3);
  EXPECT_EQ(r[5][4], 6);
  for (int i = 0; i < kSets; ++i)
    for (int j = 0; j < kSets; ++j) {
      EXPECT_EQ(r[6 - i][6 - j], 6 - r[i][j]);
      EXPECT_EQ(r[i][j], r[j][i]);
    }
}

TEST(Surface, FixedPoints) {
  EXPECT_EQ(surface(0.0, 0.0, kC), 0.0);  // exact, mirrored quadrature
  EXPECT_NEAR(surface(1.0, 1.0, kC), 1.0, 1e-12);
  EXPECT_NEAR(surface(-1.0, -1.0, kC), -1.0, 1e-12);
  EXPECT_NEAR(surface(1.0, -1.0, kC), 0.0, 1e-12);
}

TEST(Surface, MatchesIndependentMamdani) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> x(-1.2, 1.2);
  for (int i = 0; i < 60; ++i) {
    const double e = x(rng), de = x(rng);
    EXPECT_NEAR(surface(e, de, kC), mamdani_oracle(e, de), 2e-4) << e << " " << de;
  }
}

TEST(Surface, OddSymmetryAndBounds) {
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      const double e = -1.0 + i / 10.0, de = -1.0 + j / 10.0;
      const double s = surface(e, de, kC);
      EXPECT_EQ(s, -surface(-e, -de, kC));
      EXPECT_LE(std::abs(s), 1.0);
    }
}

TEST(Surface, MonotoneAlongErrorAxis) {
  // Strictly monotone on Δe = 0. Elsewhere, max aggregation over rules that
  // saturate into the same output set leaves shallow dips near rule
  // transitions (the independent oracle shows the same ones); bound them.
  double prev = -2.0;
  for (int i = 0; i <= 400; ++i) {
    const double s = surface(-1.0 + i / 200.0, 0.0, kC);
    EXPECT_GE(s, prev);
    prev = s;
  }
  double worst = 0.0;
  for (int j = 0; j <= 40; ++j) {
    const double de = -1.0 + j / 20.0;
    prev = -2.0;
    for (int i = 0; i <= 400; ++i) {
      const double s = surface(-1.0 + i / 200.0, de, kC);
      worst = std::max(worst, prev - s);
      prev = s;
    }
  }
  EXPECT_LT(worst, 4e-3);
  EXPECT_GT(surface(1.0, 0.0, kC), surface(-1.0, 0.0, kC));
}

TEST(Step, ZeroErrorHoldsOutput) {
  PiflcState st;
  st.output = 12.0;
  for (int i = 0; i < 100; ++i) piflc_step(st, 105.78, 105.78, kC, kP);
  EXPECT_EQ(st.output, 12.0);
  EXPECT_EQ(st.samples, 100);
}

TEST(Step, OverspeedRaisesPitchUntilStop) {
  PiflcState st;
  st.output = 5.0;
  double prev = st.output;
  for (int i = 0; i < 5000; ++i) {
    const double u = piflc_step(st, 106.5, 105.78, kC, kP);
    ASSERT_GE(u, prev);
    prev = u;
  }
  EXPECT_EQ(st.output, kP.pitch_max);
}

TEST(Step, TwoSampleTrace) {
  const double ref = 105.78, meas = 104.0;
  PiflcState st;
  st.output = 10.0;
  const double e = (ref - meas) / ref;
  // First sample: Δe = e.
  const double u1 = 10.0 + kC.ku * kC.full_scale *
                               mamdani_oracle(std::clamp(kC.ke * e, -1.0, 1.0),
                                              std::clamp(kC.kde * e, -1.0, 1.0));
  EXPECT_NEAR(piflc_step(st, meas, ref, kC, kP), u1, 24.0 * 2.0 * 2e-4);
  // Second sample: same error, Δe = 0.
  const double u2 = u1 + kC.ku * kC.full_scale * mamdani_oracle(kC.ke * e, 0.0);
  EXPECT_NEAR(piflc_step(st, meas, ref, kC, kP), u2, 2 * 24.0 * 2.0 * 2e-4);
  EXPECT_LT(u2, u1);  // slow generator, pitch comes down
}

TEST(Step, OutputGainScalesIncrements) {
  FuzzyConfig doubled = kC;
  doubled.ku *= 2.0;
  PiflcState a, b;
  a.output = b.output = 12.0;
  const double da = piflc_step(a, 105.5, 105.78, kC, kP) - 12.0;
  const double db = piflc_step(b, 105.5, 105.78, doubled, kP) - 12.0;
  EXPECT_NEAR(db, 2.0 * da, 1e-12);
}

TEST(Config, OverridesValidationAndDump) {
  const auto kv = io::KeyValueFile::parse("piflc.ke = 3\npiflc.ts = 0.02\nrotor_inertia = 1\n");
  const FuzzyConfig c = FuzzyConfig::from_keyvalues(kv);
  EXPECT_EQ(c.ke, 3.0);
  EXPECT_EQ(c.ts, 0.02);
  EXPECT_EQ(c.kde, 2.0);
  EXPECT_THROW(FuzzyConfig::from_keyvalues(io::KeyValueFile::parse("piflc.ts = 0\n")),
               DomainError);
  FuzzyConfig bad;
  bad.rules[0][0] = 9;
  EXPECT_THROW(bad.validate(), DomainError);
  const std::string dump = kC.dump();
  for (const char* label : kLabels) EXPECT_NE(dump.find(label), std::string::npos);
  EXPECT_NE(dump.find("PB ZE PS PM PB PB PB PB"), std::string::npos);
  PiflcState st;
  EXPECT_THROW(piflc_step(st, 1.0, 0.0, kC, kP), DomainError);
}
