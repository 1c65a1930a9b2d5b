#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stringlab/core_null.hpp"

using namespace stringlab;

TEST(NullCoords, DirectEvaluation) {
  auto p = null_coords(0, 0);
  EXPECT_EQ(p.u, 0.0);
  EXPECT_EQ(p.ub, 0.0);
  p = null_coords(2, 1);
  EXPECT_DOUBLE_EQ(p.u, 0.5);
  EXPECT_DOUBLE_EQ(p.ub, 1.5);
  p = null_coords(1, -1);
  EXPECT_DOUBLE_EQ(p.u, 1.0);
  EXPECT_DOUBLE_EQ(p.ub, 0.0);
}

TEST(NullGradient, TravellingProfiles) {
  auto ng = null_gradient(0, 0);
  EXPECT_EQ(ng.lphi, 0.0);
  EXPECT_EQ(ng.lbphi, 0.0);
  ng = null_gradient(1, 1);  // left-travelling
  EXPECT_EQ(ng.lphi, 2.0);
  EXPECT_EQ(ng.lbphi, 0.0);
  ng = null_gradient(1, -1);  // right-travelling
  EXPECT_EQ(ng.lphi, 0.0);
  EXPECT_EQ(ng.lbphi, 2.0);
  EXPECT_DOUBLE_EQ(ng.w(), 1.0);
  EXPECT_DOUBLE_EQ(ng.p(), -1.0);
}

TEST(MetricScalars, FlatBackground) {
  const auto m = metric_scalars({0, 0});
  EXPECT_EQ(m.g, 1.0);
  EXPECT_EQ(m.guu, 0.0);
  EXPECT_EQ(m.gubub, 0.0);
  EXPECT_EQ(m.guub, -0.5);
}

TEST(MetricScalars, Determinant) {
  EXPECT_NEAR(metric_scalars({0.2, -1.0}).g, 1.2, 1e-15);
  EXPECT_THROW(metric_scalars({1.0, 1.0}), TimelikeViolation);
}

TEST(MetricScalars, InverseMetricNullComponents) {
  const double a = 0.3, b = -0.7;
  const auto m = metric_scalars({a, b});
  const double g = 1 - a * b;
  EXPECT_NEAR(m.guu, -a * a / (4 * g), 1e-15);
  EXPECT_NEAR(m.gubub, -b * b / (4 * g), 1e-15);
  // determinant of the inverse in null components
  EXPECT_NEAR(m.guu * m.gubub - m.guub * m.guub, -1.0 / (4.0 * g), 1e-14);
}

TEST(Eigenvalues, DirectEvaluation) {
  auto s = eigenvalues(0, 0);
  EXPECT_EQ(s.minus, -1.0);
  EXPECT_EQ(s.plus, 1.0);
  s = eigenvalues(0.5, 0);
  EXPECT_NEAR(s.minus, -0.8660254, 1e-7);
  EXPECT_NEAR(s.plus, 0.8660254, 1e-7);
  EXPECT_THROW(eigenvalues(1.0, 0.0), HyperbolicityLoss);
}

TEST(Eigenvalues, StrictHyperbolicityAndSpeedBound) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-5, 5);
  int tested = 0;
  for (int i = 0; i < 20000; ++i) {
    const double w = U(rng), p = U(rng);
    const double disc = 1 + p * p - w * w;
    if (disc <= 1e-8) continue;
    ++tested;
    const auto s = eigenvalues(w, p);
    EXPECT_NEAR(s.plus - s.minus, 2 * std::sqrt(disc) / (1 + p * p), 1e-12);
    EXPECT_LE(std::abs(s.plus), 1 + 1e-12);
    EXPECT_LE(std::abs(s.minus), 1 + 1e-12);
    // (1 + p^2 + wp)^2 - (1 + p^2 - w^2) = (1 + p^2)(p + w)^2
    const double lhs = std::pow(1 + p * p + w * p, 2) - disc;
    EXPECT_NEAR(lhs, (1 + p * p) * (p + w) * (p + w), 1e-9 * (1 + std::abs(lhs)));
  }
  EXPECT_GT(tested, 1000);
}

TEST(Weight, Values) {
  for (double g : {0.1, 0.5, 0.9}) EXPECT_EQ(weight_a(0, g), 1.0);
  EXPECT_NEAR(weight_a(1, 0.5), 2.8284271, 1e-7);
  for (double x : {0.3, 1.7, 12.0}) EXPECT_EQ(weight_a(-x, 0.5), weight_a(x, 0.5));
  EXPECT_THROW(Weight(1.5), ValidationError);
  EXPECT_THROW(Weight(0.0), ValidationError);
}

TEST(Weight, DerivativeMatchesFiniteDifference) {
  const Weight a(0.5);
  for (double x : {-3.0, -0.4, 0.0, 0.9, 5.0}) {
    const double h = 1e-5;
    const double fd = (a(x + h) - a(x - h)) / (2 * h);
    EXPECT_NEAR(a.derivative(x), fd, 1e-6 * (1 + std::abs(fd)));
    EXPECT_LE(std::abs(a.log_derivative(x)), 1.5);
  }
}

TEST(Multiplier, DirectEvaluation) {
  const Weight a(0.5);
  auto m = multiplier(Side::TL, null_coords(0, 0), {0.0, 3.7}, a);
  EXPECT_EQ(m.cl, 1.0);
  EXPECT_EQ(m.clb, 0.0);
  m = multiplier(Side::TLb, null_coords(0, 0), {0.1, 2.0}, a);
  EXPECT_DOUBLE_EQ(m.cl, 4.0);
  EXPECT_DOUBLE_EQ(m.clb, 1.0);
  m = multiplier(Side::TL, null_coords(1, 1), {0.5, 0.0}, a);  // ub = 1
  EXPECT_NEAR(m.cl, 2.8284271, 1e-7);
  EXPECT_NEAR(m.clb, 0.7071068, 1e-7);
}

TEST(CausalNorm, DirectEvaluation) {
  const Weight a(0.5);
  for (double x : {-2.0, 0.0, 4.0})
    EXPECT_EQ(causal_norm(Side::TL, null_coords(0, 0), {0.0, x}, a), 0.0);
  EXPECT_NEAR(causal_norm(Side::TL, null_coords(0, 0), {0.1, 1.0}, a), -0.0279, 1e-15);
  // Lphi = Lbphi = 2: factor -3 + 8 + 16 = 21
  EXPECT_GT(causal_norm(Side::TL, null_coords(0, 0), {2.0, 2.0}, a), 0.0);
  EXPECT_NEAR(causal_norm(Side::TL, null_coords(0, 0), {2.0, 2.0}, a), 4.0 * 21.0, 1e-12);
}

TEST(CausalNorm, MatchesMetricContraction) {
  // g(xi, xi) with g = eta + dphi dphi in Cartesian components.
  const Weight a(0.5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  for (int i = 0; i < 200; ++i) {
    const NullGradientPair ng{U(rng), U(rng)};
    const auto pt = null_coords(U(rng), 3 * U(rng));
    for (Side s : {Side::TL, Side::TLb}) {
      const auto [xt, xx] = multiplier(s, pt, ng, a).cartesian();
      const double w = ng.w(), p = ng.p();
      const double dphi = w * xt + p * xx;
      const double direct = -xt * xt + xx * xx + dphi * dphi;
      EXPECT_NEAR(causal_norm(s, pt, ng, a), direct, 1e-12 * (1 + std::abs(direct)));
    }
  }
}
