#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stringlab/data_gen.hpp"

using namespace stringlab;

namespace {

DataFamily family(double delta, ProfileSpec f = ProfileSpec::gaussian(1.0),
                  ProfileSpec fb = ProfileSpec::gaussian(1.0)) {
  DataFamily fam;
  fam.delta = delta;
  fam.f = std::move(f);
  fam.fb = std::move(fb);
  return fam;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

// O(n^2) oracle for the ordering part of the criterion.
bool brute_force_ordering(const std::vector<double>& lm, const std::vector<double>& lp,
                          double threshold) {
  for (std::size_t j = 0; j < lp.size(); ++j)
    for (std::size_t i = 0; i <= j; ++i)
      if (!(lp[j] - lm[i] > threshold)) return false;
  return !lp.empty();
}

}  // namespace

TEST(Profile, GaussianDerivatives) {
  const auto g = ProfileSpec::gaussian(1.0);
  EXPECT_EQ(profile_derivative(g, 0, 0.7), std::exp(-0.49));
  EXPECT_NEAR(profile_derivative(g, 1, 1.0), -0.7357589, 1e-7);
}

TEST(Profile, FifthDerivativeMatchesDifferenceOfFourth) {
  for (const auto& h : {ProfileSpec::gaussian(1.3, 0.2, 0.8), ProfileSpec::bump(1.0, 0.0, 2.0),
                        ProfileSpec::poly_gaussian(1.0, {3, 4}, 0.1, 1.0)}) {
    const double x = 0.37;
    std::vector<double> err;
    for (double dh : {0.02, 0.01}) {
      const double fd = (profile_derivative(h, 4, x + dh) - profile_derivative(h, 4, x - dh)) / (2 * dh);
      err.push_back(std::abs(fd - profile_derivative(h, 5, x)));
    }
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.1);
  }
}

TEST(Profile, IntegralMatchesQuadrature) {
  for (const auto& h : {ProfileSpec::gaussian(1.3, 0.2, 0.8), ProfileSpec::bump(1.0, 0.0, 2.0),
                        ProfileSpec::poly_gaussian(1.0, {3, 4}, 0.1, 1.0)}) {
    // composite Simpson oracle
    const double a = -6.0, b = 1.1;
    const int n = 20000;
    double s = profile_value(h, a) + profile_value(h, b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * profile_value(h, a + (b - a) * i / n);
    s *= (b - a) / (3.0 * n);
    EXPECT_NEAR(profile_integral(h, a, b), s, 1e-10);
  }
}

TEST(BuildData, DeltaZeroIsRightTravelling) {
  const auto d = build_data(family(0.0), -10.0);
  for (double x : linspace(-3, 3, 13)) {
    EXPECT_DOUBLE_EQ(d.dF(x), -0.5 * std::exp(-x * x));
    EXPECT_DOUBLE_EQ(d.G(x), 0.5 * std::exp(-x * x));
    EXPECT_EQ(d.G(x) + d.dF(x), 0.0);  // L phi = 0 at t = 0
  }
}

TEST(BuildData, SymmetricCase) {
  const auto d = build_data(family(1.0), -10.0);
  for (double x : linspace(-3, 3, 13)) {
    EXPECT_EQ(d.dF(x), 0.0);
    EXPECT_DOUBLE_EQ(d.G(x), std::exp(-x * x));
  }
}

TEST(BuildData, DataRelationsAtRandomPoints) {
  const auto fam = family(0.1, ProfileSpec::gaussian(1.0, 0.5), ProfileSpec::gaussian(1.0));
  const auto d = build_data(fam, -10.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> X(-4, 4);
  for (int i = 0; i < 10; ++i) {
    const double x = X(rng);
    EXPECT_NEAR(d.G(x) + d.dF(x), 0.1 * profile_value(fam.f, x), 1e-16);
    EXPECT_NEAR(d.G(x) - d.dF(x), profile_value(fam.fb, x), 1e-16);
  }
}

TEST(WeightedNorm, Zero) { EXPECT_EQ(weighted_norm(ProfileSpec::zero(), 0.5, 3), 0.0); }

TEST(WeightedNorm, MatchesTrapezoidOracle) {
  const auto h = ProfileSpec::gaussian(1.0);
  const double a = -30.0, b = 30.0;
  const int n = 600000;
  auto f = [](double x) { return std::pow(1 + std::abs(x), 3.0) * std::exp(-2 * x * x); };
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + (b - a) * i / n);
  s *= (b - a) / n;
  EXPECT_NEAR(weighted_norm(h, 0.5, 0), s, 1e-8 * s);
}

TEST(WeightedNorm, QuadraticHomogeneity) {
  const double one = weighted_norm(ProfileSpec::gaussian(1.0), 0.5, 0);
  const double two = weighted_norm(ProfileSpec::gaussian(2.0), 0.5, 0);
  EXPECT_NEAR(two, 4.0 * one, 1e-12 * two);
}

TEST(DataEigenvalues, ZeroData) {
  const std::vector<double> z(5, 0.0);
  const auto s = data_eigenvalues(z, z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_EQ(s.minus[i], -1.0);
    EXPECT_EQ(s.plus[i], 1.0);
  }
}

TEST(DataEigenvalues, DeltaZeroSimplification) {
  const auto d = build_data(family(0.0), -10.0);
  const auto xs = linspace(-4, 4, 81);
  const auto s = data_eigenvalues(d, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fb = std::exp(-xs[i] * xs[i]);
    EXPECT_NEAR(s.plus[i], 1.0, 1e-15);
    EXPECT_NEAR(s.minus[i], (fb * fb - 4) / (fb * fb + 4), 1e-15);
    EXPECT_LT(s.minus[i], 1.0);
  }
}

TEST(DataEigenvalues, RemarkFormulaAndCoreAgreement) {
  const auto fam = family(0.3, ProfileSpec::gaussian(1.0, 0.4), ProfileSpec::gaussian(1.2));
  const auto d = build_data(fam, -10.0);
  const auto xs = linspace(-4, 4, 81);
  const auto s = data_eigenvalues(d, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = profile_value(fam.f, xs[i]), fb = profile_value(fam.fb, xs[i]);
    const double dl = fam.delta;
    const double den = 4 + fb * fb + dl * dl * f * f - 2 * dl * fb * f;
    const double root = 4 * std::sqrt(1 - dl * fb * f);
    EXPECT_NEAR(s.plus[i], (fb * fb - dl * dl * f * f + root) / den, 1e-14);
    EXPECT_NEAR(s.minus[i], (fb * fb - dl * dl * f * f - root) / den, 1e-14);
    const auto e = eigenvalues(d.G(xs[i]), d.dF(xs[i]));
    EXPECT_EQ(s.plus[i], e.plus);
    EXPECT_EQ(s.minus[i], e.minus);
  }
}

TEST(KongTsuji, ConstantSpeeds) {
  const auto r = check_kong_tsuji(std::vector<double>(10, -1.0), std::vector<double>(10, 1.0));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.order_margin, 2.0);
  EXPECT_EQ(r.gap_min, 2.0);
}

TEST(KongTsuji, PrefixScanEqualsBruteForce) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1, 1);
  std::uniform_int_distribution<int> len(1, 60);
  int passes = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = len(rng);
    std::vector<double> lm(n), lp(n);
    // Mostly ordered sequences so both outcomes occur.
    for (int i = 0; i < n; ++i) {
      lm[i] = -0.5 + 0.5 * U(rng);
      lp[i] = (trial % 2 ? 0.5 : -0.2) + 0.5 * U(rng);
    }
    const auto r = check_kong_tsuji(lm, lp);
    bool gap = true;
    for (int i = 0; i < n; ++i) gap = gap && lp[i] - lm[i] > r.threshold;
    EXPECT_EQ(r.pass, gap && brute_force_ordering(lm, lp, r.threshold)) << "trial " << trial;
    passes += r.pass;
  }
  EXPECT_GT(passes, 0);
  EXPECT_LT(passes, 200);
}

TEST(KongTsuji, DeltaZeroFamilyPasses) {
  const auto d = build_data(family(0.0), -10.0);
  EXPECT_TRUE(check_kong_tsuji(data_eigenvalues(d, linspace(-8, 8, 801))).pass);
}

TEST(KongTsuji, BlowupFixtureFails) {
  const auto fam = family(1.0, ProfileSpec::poly_gaussian(1.0, {3, 4}),
                          ProfileSpec::poly_gaussian(1.0, {-3, 4}));
  const auto d = build_data(fam, -10.0);
  EXPECT_FALSE(check_kong_tsuji(data_eigenvalues(d, linspace(-8, 8, 801))).pass);
}

TEST(Traces, ZeroOrderRows) {
  const auto fam = family(0.1, ProfileSpec::gaussian(1.0, 0.5), ProfileSpec::gaussian(1.0));
  const auto xs = linspace(-3, 3, 31);
  const auto t = higher_order_traces(fam, 3, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_DOUBLE_EQ(t.L({0, 0})[i], 0.1 * profile_value(fam.f, xs[i]));
    EXPECT_DOUBLE_EQ(t.Lb({0, 0})[i], profile_value(fam.fb, xs[i]));
  }
}

TEST(Traces, DeltaZeroMatchesTravellingWave) {
  // phi = F(x - t) with F' = -fb / 2: L d^k phi = 0 and
  // Lb d_t^k1 d_x^k2 phi = (-1)^k1 2 F^(k1+k2+1) = (-1)^(k1+1) fb^(k1+k2).
  const auto fam = family(0.0);
  const auto xs = linspace(-3, 3, 31);
  const auto t = higher_order_traces(fam, 4, xs);
  for (int k1 = 0; k1 <= 4; ++k1)
    for (int k2 = 0; k1 + k2 <= 4; ++k2)
      for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_NEAR(t.L({k1, k2})[i], 0.0, 1e-13);
        const double sign = k1 % 2 ? -1.0 : 1.0;
        EXPECT_NEAR(t.Lb({k1, k2})[i], sign * profile_derivative(fam.fb, k1 + k2, xs[i]), 1e-12);
      }
}

TEST(Traces, DenominatorIsAtLeastFour) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> A(-2, 2), C(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fam = family(std::abs(A(rng)) / 4, ProfileSpec::gaussian(A(rng), C(rng)),
                            ProfileSpec::gaussian(A(rng), C(rng)));
    const auto t = higher_order_traces(fam, 3, linspace(-5, 5, 101));
    EXPECT_GE(t.min_denominator, 4.0);
  }
}

TEST(Traces, FirstTimeRowMatchesEquation) {
  // The (1,0) rows are d_t(w + p) and d_t(w - p) of the first-order system.
  const auto fam = family(0.3, ProfileSpec::gaussian(1.0, 0.5), ProfileSpec::gaussian(1.5));
  const auto d = build_data(fam, -10.0);
  const auto xs = linspace(-3, 3, 25);
  const auto t = higher_order_traces(fam, 2, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = d.G(xs[i]), p = d.dF(xs[i]);
    const double wx = d.G(xs[i], 1), px = d.dF(xs[i], 1);
    const double wt = (2 * w * p * wx - (w * w - 1) * px) / (1 + p * p);
    const double pt = wx;
    EXPECT_NEAR(t.L({1, 0})[i], wt + pt, 1e-13);
    EXPECT_NEAR(t.Lb({1, 0})[i], wt - pt, 1e-13);
  }
}
