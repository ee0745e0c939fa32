#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "wecs/control/hinf.hpp"
#include "wecs/control/riccati.hpp"
#include "wecs/error.hpp"
#include "wecs/lpv.hpp"

using namespace wecs;
using namespace wecs::control;

namespace {

Matrix randn(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

StateSpace random_stable(std::mt19937_64& rng, Index n, Index m, Index p) {
  Matrix A = randn(rng, n, n);
  const double a = Eigen::EigenSolver<Matrix>(A).eigenvalues().real().maxCoeff();
  A.diagonal().array() -= a + 0.5;
  return StateSpace(A, randn(rng, n, m), randn(rng, p, n), randn(rng, p, m));
}

StateSpace tf(std::vector<double> num, std::vector<double> den) {
  return TransferFunction{std::move(num), std::move(den)}.to_state_space();
}

// Largest |z| over a dense grid, computed straight from the transfer functions.
double mixed_sensitivity_peak(const TransferFunction& g, const StateSpace& k,
                              const TransferFunction& w1, const TransferFunction& w2) {
  double peak = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double w = std::pow(10.0, -4.0 + 8.0 * i / 4000.0);
    const Complex s(0.0, w);
    const Complex G = g.evaluate(s), K = evaluate(k, s)(0, 0);
    const Complex S = 1.0 / (1.0 + G * K);
    const double z1 = std::abs(w1.evaluate(s) * S), z2 = std::abs(w2.evaluate(s) * K * S);
    peak = std::max(peak, std::sqrt(z1 * z1 + z2 * z2));
  }
  return peak;
}

}  // namespace

TEST(Care, ScalarClosedForm) {
  // Scalar 2ax − x² + 1 = 0: x = a + √(a² + 1).
  const Matrix one = Matrix::Identity(1, 1);
  EXPECT_NEAR(solve_care(-one, one, one, one)(0, 0), std::sqrt(2.0) - 1.0, 1e-14);
  EXPECT_NEAR(solve_care(one, one, one, one)(0, 0), 1.0 + std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(solve_care(Matrix::Zero(1, 1), one, one, one)(0, 0), 1.0, 1e-14);
}

TEST(Care, ZeroWeightOnStablePlantGivesZero) {
  std::mt19937_64 rng(31);
  const StateSpace g = random_stable(rng, 4, 2, 1);
  const Matrix x = solve_care(g.A, g.B, Matrix::Zero(4, 4), Matrix::Identity(2, 2));
  EXPECT_LT(x.norm(), 1e-12);
}

TEST(Care, RandomInstancesAreStabilizingAndAccurate) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<int> dim(1, 8), inputs(1, 3);
  for (int t = 0; t < 100; ++t) {
    const Index n = dim(rng), m = inputs(rng);
    const Matrix A = randn(rng, n, n), B = randn(rng, n, m), C = randn(rng, n, n);
    const Matrix Q = C.transpose() * C + 1e-3 * Matrix::Identity(n, n);
    const Matrix R = Matrix::Identity(m, m);
    const Matrix X = solve_care(A, B, Q, R);
    const Matrix G = B * B.transpose();
    EXPECT_LT(care_residual(A, G, Q, X), 1e-8) << "trial " << t;
    EXPECT_LT((X - X.transpose()).norm(), 1e-10 * (1.0 + X.norm()));
    const Matrix acl = A - G * X;
    EXPECT_LT(Eigen::EigenSolver<Matrix>(acl).eigenvalues().real().maxCoeff(), 0.0);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(X).eigenvalues().minCoeff(), -1e-9 * X.norm());
  }
}

TEST(Care, ImaginaryAxisEigenvaluesRejected) {
  // A = 0, B = 0, Q = 1: H = [0 0; −1 0] has a double eigenvalue at 0.
  EXPECT_THROW(solve_care(Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Identity(1, 1),
                          Matrix::Identity(1, 1)),
               NoStabilizingSolution);
  EXPECT_THROW(solve_care(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(2, 2),
                          Matrix::Identity(1, 1)),
               DimensionError);
}

TEST(OrderedSchurTest, ReconstructsWithStableBlockFirst) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 20; ++t) {
    const Matrix h = randn(rng, 6, 6);
    const OrderedSchur s = ordered_schur(h);
    EXPECT_LT((s.Z * s.T * s.Z.transpose() - h).norm(), 1e-12 * h.norm());
    EXPECT_LT((s.Z.transpose() * s.Z - Matrix::Identity(6, 6)).norm(), 1e-13);
    const auto ev = Eigen::EigenSolver<Matrix>(s.T.topLeftCorner(s.stable_count, s.stable_count))
                        .eigenvalues();
    for (Index i = 0; i < ev.size(); ++i) EXPECT_LT(ev(i).real(), 0.0);
    Index stable = 0;
    for (Index i = 0; i < s.eigenvalues.size(); ++i) stable += s.eigenvalues(i).real() < 0;
    EXPECT_EQ(stable, s.stable_count);
  }
}

TEST(HinfNorm, FirstOrderLagHasUnitPeak) {
  EXPECT_NEAR(hinf_norm(tf({1.0}, {1.0, 1.0})), 1.0, 1e-4);
}

TEST(HinfNorm, DefaultErrorWeightPeaksAtDc) {
  EXPECT_NEAR(hinf_norm(tf({1.0, 10.0}, {2.0, 0.1})) / 100.0, 1.0, 1e-4);
}

TEST(HinfNorm, StaticGainIsLargestSingularValue) {
  Matrix d(2, 2);
  d << 3, 0, 0, -4;
  EXPECT_NEAR(hinf_norm(StateSpace::gain(d)), 4.0, 1e-12);
}

TEST(HinfNorm, LightlyDampedResonanceMatchesClosedForm) {
  for (double zeta : {0.3, 0.05, 0.01}) {
    const double wn = 10.0;
    const StateSpace g = tf({wn * wn}, {1.0, 2.0 * zeta * wn, wn * wn});
    const double peak = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
    EXPECT_NEAR(hinf_norm(g) / peak, 1.0, 2e-4) << zeta;
  }
}

TEST(HinfNorm, AgreesWithFrequencyGrid) {
  std::mt19937_64 rng(34);
  std::uniform_int_distribution<int> dim(1, 6), io(1, 3);
  for (int t = 0; t < 50; ++t) {
    const StateSpace g = random_stable(rng, dim(rng), io(rng), io(rng));
    const double bisect = hinf_norm(g), grid = hinf_norm_grid(g);
    EXPECT_LE(grid, bisect * (1.0 + 1e-4)) << t;
    EXPECT_LT((bisect - grid) / bisect, 0.005) << t;
  }
}

TEST(HinfNorm, UnstableSystemRejected) {
  EXPECT_THROW(hinf_norm(tf({1.0}, {1.0, -1.0})), DomainError);
}

TEST(Synthesis, SisoMixedSensitivityMeetsBound) {
  const TransferFunction g{{1.0}, {1.0, 1.0}};
  lpv::WeightingSet w;
  w.w1 = {{1.0}, {1.0, 0.01}};
  w.w2 = {TransferFunction{{0.1}, {1.0}}};
  const GeneralizedPlant p = lpv::build_generalized_plant(g.to_state_space(), w);
  const SynthesisResult r = hinf_synthesize(p);
  const StateSpace cl = p.close_loop(r.controller);
  EXPECT_TRUE(cl.is_stable());
  EXPECT_LE(hinf_norm(cl), r.gamma_achieved * (1.0 + 1e-4));
  EXPECT_LE(mixed_sensitivity_peak(g, r.controller, w.w1, w.w2[0]),
            r.gamma_achieved * (1.0 + 1e-4));
  EXPECT_NEAR(r.gamma_achieved, r.gamma_boundary * 1.05, 1e-12 * r.gamma_achieved);
  EXPECT_LT(r.riccati_residuals.first, 1e-8);
  EXPECT_LT(r.riccati_residuals.second, 1e-8);
  EXPECT_EQ(r.regularization, 0.0);
  // Just below the boundary no controller exists.
  EXPECT_FALSE(central_controller(p, r.gamma_boundary * 0.99).controller.has_value());
}

TEST(Synthesis, InfeasibleRangeNamesCondition) {
  const TransferFunction g{{1.0}, {1.0, 1.0}};
  lpv::WeightingSet w;
  w.w1 = {{1.0}, {1.0, 0.01}};
  w.w2 = {TransferFunction{{0.1}, {1.0}}};
  const GeneralizedPlant p = lpv::build_generalized_plant(g.to_state_space(), w);
  SynthesisOptions o;
  o.gamma_min = 1e-7;
  o.gamma_max = 1e-6;
  try {
    hinf_synthesize(p, o);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(e.condition(), SynthesisCondition::none);
    EXPECT_FALSE(to_string(e.condition()).empty());
  }
  o.gamma_min = 2.0;
  o.gamma_max = 1.0;
  EXPECT_THROW(hinf_synthesize(p, o), DomainError);
}

TEST(Synthesis, FeedthroughBoundDetected) {
  // z = [5 w + x; u], y = x + w: the 5 on z1 has no path through u.
  Matrix A(1, 1), B(1, 2), C(3, 1), D(3, 2);
  A << -1;
  B << 0, 1;
  C << 1, 0, 1;
  D << 5, 0, 0, 1, 1, 0;
  const GeneralizedPlant p(StateSpace(A, B, C, D), 1, 1, 2, 1);
  const auto attempt = central_controller(p, 4.0);
  EXPECT_FALSE(attempt.controller.has_value());
  EXPECT_EQ(attempt.failed, SynthesisCondition::feedthrough_bound);
  const SynthesisResult r = hinf_synthesize(p);
  EXPECT_GT(r.gamma_boundary, 5.0);
  EXPECT_LE(hinf_norm(p.close_loop(r.controller)), r.gamma_achieved * (1.0 + 1e-4));
}

TEST(Synthesis, RankDeficientPlantIsRegularized) {
  // z = x only, so D12 = 0.
  Matrix A(1, 1), B(1, 2), C(2, 1), D(2, 2);
  A << -1;
  B << 1, 1;
  C << 1, 1;
  D << 0, 0, 1, 0;
  const GeneralizedPlant p(StateSpace(A, B, C, D), 1, 1, 1, 1);
  const SynthesisResult r = hinf_synthesize(p);
  EXPECT_EQ(r.regularization, 1e-6);
  const StateSpace cl = p.close_loop(r.controller);
  EXPECT_TRUE(cl.is_stable());
  EXPECT_LE(hinf_norm(cl), r.gamma_achieved * (1.0 + 1e-4));
}

TEST(Synthesis, NonzeroD22HandledByLoopShift) {
  // Biproper plant: e = w − G u carries D22 = −1.
  const TransferFunction g{{1.0, 2.0}, {1.0, 1.0}};
  lpv::WeightingSet w;
  w.w1 = {{1.0}, {1.0, 0.01}};
  w.w2 = {TransferFunction{{0.1}, {1.0}}};
  const GeneralizedPlant p = lpv::build_generalized_plant(g.to_state_space(), w);
  ASSERT_NE(p.D22()(0, 0), 0.0);
  const SynthesisResult r = hinf_synthesize(p);
  const StateSpace cl = p.close_loop(r.controller);
  EXPECT_TRUE(cl.is_stable());
  EXPECT_LE(hinf_norm(cl), r.gamma_achieved * (1.0 + 1e-4));
  EXPECT_LE(mixed_sensitivity_peak(g, r.controller, w.w1, w.w2[0]),
            r.gamma_achieved * (1.0 + 1e-4));
}

TEST(Synthesis, RandomPlantsProduceStabilizingControllers) {
  std::mt19937_64 rng(35);
  int solved = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 3;
    Matrix A = randn(rng, n, n);
    // Full-rank D12 / D21 so the standard assumptions hold.
    Matrix B(n, 3), C(4, n), D = Matrix::Zero(4, 3);
    B << randn(rng, n, 2), randn(rng, n, 1);
    C << randn(rng, 2, n), randn(rng, 1, n), randn(rng, 1, n);
    D(2, 2) = 1.0;
    D(3, 1) = 1.0;
    const GeneralizedPlant p(StateSpace(A, B, C, D), 2, 1, 3, 1);
    SynthesisResult r;
    try {
      r = hinf_synthesize(p);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++solved;
    const StateSpace cl = p.close_loop(r.controller);
    EXPECT_TRUE(cl.is_stable()) << t;
    EXPECT_LE(hinf_norm(cl), r.gamma_achieved * (1.0 + 1e-4)) << t;
  }
  EXPECT_GE(solved, 15);
}
