#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <random>

#include "wecs/control/hinf.hpp"
#include "wecs/error.hpp"
#include "wecs/lpv.hpp"

using namespace wecs;
using namespace wecs::lpv;
using control::CMatrix;
using control::Complex;
using control::Index;

namespace {

const TurbineParams kP;

const LpvSynthesis& shared() {
  static const LpvSynthesis syn = synthesize_lpv(kP, WeightingSet::defaults());
  return syn;
}

std::vector<double> test_frequencies() {
  return {1e-3, 0.02, 0.1, 0.5, 1.7, 4.0, 12.0, 60.0, 300.0, 2e3};
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Weights, DefaultsAreStableWithHighLowFrequencyGain) {
  const WeightingSet w = WeightingSet::defaults();
  EXPECT_NO_THROW(w.validate());
  EXPECT_NEAR(std::abs(w.w1.evaluate(0.0)), 100.0, 1e-12);  // 40 dB
  EXPECT_GE(20.0 * std::log10(std::abs(w.w1.evaluate(0.0))), 20.0);
  EXPECT_EQ(w.w2.size(), 2u);
  ASSERT_TRUE(w.w3.has_value());
  EXPECT_EQ(*w.w3, Matrix::Identity(2, 2));

  WeightingSet bad = w;
  bad.w1 = {{1.0}, {1.0, -1.0}};
  EXPECT_THROW(bad.validate(), DomainError);
  bad = w;
  bad.w2[0] = {{1.0, 0.0, 0.0}, {1.0, 1.0}};
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(GeneralizedPlantTest, ZeroControllerLeavesW1AndZeroes) {
  const WeightingSet w = WeightingSet::defaults();
  const auto& vx = shared().vertices[0];
  const StateSpace zero = StateSpace::gain(Matrix::Zero(2, 2));
  const StateSpace cl = vx.plant.close_loop(zero);
  for (double f : test_frequencies()) {
    const Complex s(0.0, f);
    const CMatrix t = control::evaluate(cl, s);
    const Complex w1 = w.w1.evaluate(s);
    EXPECT_LT(max_abs(t.topRows(2) - w1 * CMatrix::Identity(2, 2)), 1e-10 * std::abs(w1));
    EXPECT_LT(max_abs(t.bottomRows(4)), 1e-14);
  }
}

TEST(GeneralizedPlantTest, ClosedLoopIsWeightedSensitivityStack) {
  const WeightingSet w = WeightingSet::defaults();
  for (const auto& vx : shared().vertices) {
    const StateSpace g = synthesis_plant(vx.model);
    const StateSpace& k = vx.result.controller;
    const StateSpace cl = vx.plant.close_loop(k);
    for (double f : test_frequencies()) {
      const Complex s(0.0, f);
      const CMatrix G = control::evaluate(g, s), K = control::evaluate(k, s);
      const CMatrix S = (CMatrix::Identity(2, 2) + G * K).inverse();
      CMatrix ref(6, 2);
      CMatrix W2 = CMatrix::Zero(2, 2);
      W2(0, 0) = w.w2[0].evaluate(s);
      W2(1, 1) = w.w2[1].evaluate(s);
      ref.topRows(2) = w.w1.evaluate(s) * S;
      ref.middleRows(2, 2) = W2 * K * S;
      ref.bottomRows(2) = G * K * S;
      const CMatrix got = control::evaluate(cl, s);
      EXPECT_LT(max_abs(got - ref), 1e-8 * (1.0 + max_abs(ref))) << f;
    }
  }
}

TEST(SynthesisPlant, ScalesTorqueToKilonewtonMetres) {
  const auto& m = shared().vertices[1].model;
  const StateSpace g = synthesis_plant(m);
  const CMatrix raw = control::evaluate(m.plant(), Complex(0.0, 0.7));
  const CMatrix scaled = control::evaluate(g, Complex(0.0, 0.7));
  EXPECT_LT(std::abs(scaled(0, 0) - raw(0, 0)), 1e-12);
  EXPECT_LT(std::abs(scaled(0, 1) - raw(0, 1) / kTorqueScale), 1e-9);
  EXPECT_LT(std::abs(scaled(1, 1) - raw(1, 1)), 1e-12);
}

TEST(Scheduling, WeightsAreAffineAndClamped) {
  EXPECT_EQ(scheduling_weights(24.0, 11.0, 24.0), std::make_pair(1.0, 0.0));
  EXPECT_EQ(scheduling_weights(11.0, 11.0, 24.0), std::make_pair(0.0, 1.0));
  const auto mid = scheduling_weights(17.5, 11.0, 24.0);
  EXPECT_DOUBLE_EQ(mid.first, 0.5);
  EXPECT_DOUBLE_EQ(mid.second, 0.5);
  EXPECT_EQ(scheduling_weights(30.0, 11.0, 24.0).first, 1.0);
  EXPECT_EQ(scheduling_weights(5.0, 11.0, 24.0).first, 0.0);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> v(0.0, 40.0);
  for (int i = 0; i < 1000; ++i) {
    const auto [a1, a2] = scheduling_weights(v(rng), 11.0, 24.0);
    EXPECT_GE(a1, 0.0);
    EXPECT_GE(a2, 0.0);
    EXPECT_NEAR(a1 + a2, 1.0, 1e-15);
  }
}

TEST(Scheduling, FilterIsFirstOrderLowPass) {
  SchedulingFilter f(1.0, 11.0, 24.0);
  f.reset(11.0);
  const double dt = 1e-3;
  for (int i = 0; i < 1000; ++i) f.update(24.0, dt);
  EXPECT_NEAR(f.value(), 24.0 - 13.0 * std::exp(-1.0), 1e-9);
  SchedulingFilter g(1.0, 11.0, 24.0);
  EXPECT_EQ(g.update(30.0, dt), 24.0);  // first sample initializes, then clamps
  EXPECT_EQ(g.update(5.0, dt) <= 24.0, true);
}

TEST(TrimTableTest, InterpolatesComputedTrim) {
  const TrimTable& t = shared().controller.trim();
  EXPECT_NEAR(t.at(11.0).pitch, 0.0, 1e-9);
  EXPECT_NEAR(t.at(17.5).pitch, trim_pitch(17.5, kP), 1e-3);
  EXPECT_NEAR(t.at(17.52).pitch, trim_pitch(17.52, kP), 1e-3);
  EXPECT_EQ(t.at(5.0).pitch, t.at(11.0).pitch);
  EXPECT_EQ(t.at(40.0).pitch, t.at(24.0).pitch);
  // Torque reference balances the shaft at rated speed.
  EXPECT_NEAR(t.at(11.0).torque, 51854.565945711846 / kP.gearbox_ratio, 1e-6);
  EXPECT_EQ(t.rows().rows(), 261);
  EXPECT_THROW(TrimTable::from_matrix(Matrix::Zero(1, 3)), DimensionError);
}

TEST(LpvSynthesisTest, VertexGammaAndClosedLoopNorms) {
  const auto& syn = shared();
  for (const auto& vx : syn.vertices) {
    // Frozen from the full pipeline at the default parameters.
    EXPECT_NEAR(vx.result.gamma_achieved, 1.1922961835316934, 1e-6);
    const StateSpace cl = vx.plant.close_loop(vx.result.controller);
    EXPECT_TRUE(cl.is_stable());
    EXPECT_LE(control::hinf_norm(cl), vx.result.gamma_achieved * (1.0 + 1e-4));
    EXPECT_LT(vx.result.riccati_residuals.first, 1e-8);
    EXPECT_LT(vx.result.riccati_residuals.second, 1e-8);
  }
  EXPECT_EQ(syn.controller.vertex(0).states(), syn.controller.vertex(1).states());
  EXPECT_GT((syn.controller.vertex(0).A - syn.controller.vertex(1).A).norm(), 1e-6);
}

TEST(LpvSynthesisTest, TorqueLoopAloneSetsTheSharedBound) {
  // The Tg,r → Tg lag is vertex independent; synthesizing it alone gives the
  // same γ boundary as the full 2x2 problem.
  const WeightingSet w = WeightingSet::defaults();
  WeightingSet wt;
  wt.w1 = w.w1;
  wt.w2 = {w.w2[1]};
  wt.w3 = Matrix::Identity(1, 1);
  const StateSpace g = synthesis_plant(shared().vertices[0].model);
  const StateSpace torque(g.A, g.B.col(1), g.C.row(1), g.D.block(1, 1, 1, 1));
  const auto r = control::hinf_synthesize(build_generalized_plant(torque, wt));
  EXPECT_NEAR(r.gamma_boundary / shared().vertices[0].result.gamma_boundary, 1.0, 1e-3);
}

TEST(LpvSynthesisTest, FrozenInterpolatedLoopsStable) {
  const auto& syn = shared();
  for (int i = 0; i <= 26; ++i) {
    const double v = 11.0 + 13.0 * i / 26.0;
    const StateSpace g = interpolate_plant(syn.vertices, v, 11.0, 24.0);
    const auto p = build_generalized_plant(g, WeightingSet::defaults());
    const StateSpace cl = p.close_loop(syn.controller.interpolate(v));
    EXPECT_LT(cl.spectral_abscissa(), 0.0) << v;
  }
}

TEST(LpvSynthesisTest, SensitivityShapedByW1) {
  const WeightingSet w = WeightingSet::defaults();
  for (const auto& vx : shared().vertices) {
    const StateSpace g = synthesis_plant(vx.model);
    const StateSpace& k = vx.result.controller;
    for (int i = 0; i <= 200; ++i) {
      const Complex s(0.0, std::pow(10.0, -3.0 + 6.0 * i / 200.0));
      const CMatrix G = control::evaluate(g, s), K = control::evaluate(k, s);
      const CMatrix S = (CMatrix::Identity(2, 2) + G * K).inverse();
      EXPECT_LE(control::max_singular_value(S),
                vx.result.gamma_achieved / std::abs(w.w1.evaluate(s)) * (1.0 + 1e-6));
    }
  }
}

TEST(LpvControllerTest, InterpolationIsEntrywiseAffine) {
  const LpvController& c = shared().controller;
  const StateSpace& k1 = c.vertex(0);
  const StateSpace& k2 = c.vertex(1);
  for (double v : {11.0, 13.3, 17.5, 22.0, 24.0}) {
    const double a1 = (v - 11.0) / 13.0;
    const StateSpace k = c.interpolate(v);
    EXPECT_LT((k.A - (a1 * k1.A + (1 - a1) * k2.A)).norm(), 1e-12 * k1.A.norm());
    EXPECT_LT((k.B - (a1 * k1.B + (1 - a1) * k2.B)).norm(), 1e-12 * k1.B.norm());
    EXPECT_LT((k.C - (a1 * k1.C + (1 - a1) * k2.C)).norm(), 1e-12 * k1.C.norm());
    EXPECT_LT((k.D - (a1 * k1.D + (1 - a1) * k2.D)).norm(), 1e-12 * (1 + k1.D.norm()));
  }
  EXPECT_EQ(c.interpolate(24.0).A, k1.A);
  EXPECT_EQ(c.interpolate(11.0).A, k2.A);
}

TEST(LpvControllerTest, ZeroErrorReturnsTrim) {
  const LpvController& c = shared().controller;
  ControllerState st(c);
  for (double v : {11.0, 15.0, 17.5, 24.0}) {
    const ControlCommand u = controller_step(c, st, 0.0, 0.0, v, 1e-3, kP);
    EXPECT_DOUBLE_EQ(u.pitch_ref, std::clamp(c.trim().at(v).pitch, 0.0, 24.0));
    EXPECT_DOUBLE_EQ(u.torque_ref, c.trim().at(v).torque);
  }
}

TEST(LpvControllerTest, VmaxMatchesPureVertexController) {
  const LpvController& c = shared().controller;
  const LpvController only_high(c.vertex(0), c.vertex(0), c.vmin(), c.vmax(), c.trim());
  ControllerState a(c), b(only_high);
  std::mt19937_64 rng(43);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int i = 0; i < 500; ++i) {
    const double es = n(rng), et = 200.0 * n(rng);
    const ControlCommand ua = controller_step(c, a, es, et, 24.0, 1e-3, kP);
    const ControlCommand ub = controller_step(only_high, b, es, et, 24.0, 1e-3, kP);
    ASSERT_NEAR(ua.pitch_ref, ub.pitch_ref, 1e-12);
    ASSERT_NEAR(ua.torque_ref, ub.torque_ref, 1e-9);
  }
}

TEST(LpvControllerTest, SlowGeneratorLowersPitch) {
  const LpvController& c = shared().controller;
  for (int i = 0; i < 2; ++i) {
    const CMatrix k0 = control::evaluate(c.vertex(i), Complex(0.0, 0.0));
    EXPECT_LT(k0(0, 0).real(), 0.0) << i;
  }
  ControllerState st(c);
  ControlCommand u;
  for (int i = 0; i < 2000; ++i) u = controller_step(c, st, 0.05, 0.0, 17.5, 1e-3, kP);
  EXPECT_LT(u.pitch_ref, c.trim().at(17.5).pitch);
}

TEST(LpvControllerTest, SerializationRoundTrip) {
  const LpvController& c = shared().controller;
  const std::string text = c.to_text();
  const LpvController d = LpvController::parse(text);
  EXPECT_EQ(d.to_text(), text);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(d.vertex(i).A, c.vertex(i).A);
    EXPECT_EQ(d.vertex(i).D, c.vertex(i).D);
  }
  EXPECT_EQ(d.trim().rows(), c.trim().rows());
  EXPECT_EQ(d.gammas, c.gammas);
  EXPECT_EQ(d.scheduling_time_constant(), c.scheduling_time_constant());

  const auto path = std::filesystem::temp_directory_path() / "wecs_test_controller.txt";
  c.save(path);
  EXPECT_EQ(LpvController::load(path).to_text(), text);
  std::filesystem::remove(path);

  EXPECT_THROW(LpvController::parse("meta kind something-else\n"), Error);
  std::string truncated = text.substr(0, text.size() / 2);
  EXPECT_THROW(LpvController::parse(truncated), Error);
}
