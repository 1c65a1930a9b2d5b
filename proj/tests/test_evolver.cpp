#include <gtest/gtest.h>

#include <cmath>

#include "stringlab/evolver.hpp"

using namespace stringlab;

namespace {

DataFamily family(double delta, ProfileSpec fb = ProfileSpec::gaussian(1.0)) {
  DataFamily fam;
  fam.delta = delta;
  fam.fb = std::move(fb);
  return fam;
}

FieldState zero_state(std::size_t n) {
  FieldState s;
  s.phi.assign(n, 0.0);
  s.w.assign(n, 0.0);
  s.p.assign(n, 0.0);
  return s;
}

double interior_max(const Grid1D& g, const std::vector<double>& v, double lo, double hi) {
  double m = 0.0;
  for (std::size_t i = 0; i < g.n; ++i)
    if (g.x(i) >= lo && g.x(i) <= hi) m = std::max(m, std::abs(v[i]));
  return m;
}

// Fixed-step run to t_end.
FieldState evolve(const Grid1D& g, FieldState s, double t_end, const EvolverOptions& opt,
                  double* max_speed = nullptr) {
  const int steps = int(std::ceil(t_end / (opt.cfl * g.dx) - 1e-9));
  Evolver ev(g, std::move(s), opt);
  for (int i = 0; i < steps; ++i) ev.advance(t_end / steps);
  if (max_speed) *max_speed = ev.max_speed_seen();
  return ev.state();
}

}  // namespace

TEST(InitState, ZeroFamily) {
  DataFamily fam = family(0.0, ProfileSpec::zero());
  const Grid1D g(-5, 0.1, 101);
  const auto s = init_state(fam, g);
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_EQ(s.phi[i], 0.0);
    EXPECT_EQ(s.w[i], 0.0);
    EXPECT_EQ(s.p[i], 0.0);
  }
}

TEST(InitState, DeltaZeroHasVanishingL) {
  const Grid1D g(-8, 0.05, 321);
  const auto s = init_state(family(0.0), g);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_EQ(s.w[i] + s.p[i], 0.0);
}

TEST(InitState, CompatibilityIsFourthOrder) {
  std::vector<double> err, h;
  for (std::size_t n : {161, 321, 641}) {
    const Grid1D g = Grid1D::covering(-8, 8, n);
    DataFamily fam = family(0.3, ProfileSpec::gaussian(1.0, 0.3));
    fam.f = ProfileSpec::gaussian(1.0, -0.4);
    const auto s = init_state(fam, g);
    const auto dphi = stencil::d1(s.phi, g.dx);
    std::vector<double> r(g.n);
    for (std::size_t i = 0; i < g.n; ++i) r[i] = s.p[i] - dphi[i];
    err.push_back(interior_max(g, r, -6, 6));
    h.push_back(g.dx);
  }
  EXPECT_GT(std::log(err[1] / err[2]) / std::log(h[1] / h[2]), 3.7);
}

TEST(Rhs, ZeroAndConstantStates) {
  const Grid1D g(-5, 0.1, 101);
  auto r = rhs(g, zero_state(g.n), 0.01);
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_EQ(r.phi_t[i], 0.0);
    EXPECT_EQ(r.w_t[i], 0.0);
    EXPECT_EQ(r.p_t[i], 0.0);
  }
  auto s = zero_state(g.n);
  s.w.assign(g.n, 0.4);
  r = rhs(g, s, 0.01);
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_NEAR(r.w_t[i], 0.0, 1e-15);
    EXPECT_NEAR(r.p_t[i], 0.0, 1e-15);
    EXPECT_EQ(r.phi_t[i], 0.4);
  }
}

TEST(Rhs, TravellingSineIsFourthOrder) {
  // phi = sin(x - t) solves the equation exactly; w_t = phi_tt = -sin(x) at t = 0.
  std::vector<double> err, h;
  for (std::size_t n : {101, 201, 401}) {
    const Grid1D g = Grid1D::covering(-4, 4, n);
    FieldState s = zero_state(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      s.phi[i] = std::sin(g.x(i));
      s.w[i] = -std::cos(g.x(i));
      s.p[i] = std::cos(g.x(i));
    }
    const auto r = rhs(g, s, 0.0);
    std::vector<double> e(g.n);
    for (std::size_t i = 0; i < g.n; ++i) e[i] = r.w_t[i] + std::sin(g.x(i));
    err.push_back(interior_max(g, e, -3, 3));
    h.push_back(g.dx);
  }
  EXPECT_GT(std::log(err[1] / err[2]) / std::log(h[1] / h[2]), 3.7);
}

TEST(Step, ZeroStateStaysZero) {
  const Grid1D g(-5, 0.1, 101);
  FieldState s = zero_state(g.n);
  for (int i = 0; i < 50; ++i) s = step(g, s, {});
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_EQ(s.phi[i], 0.0);
    EXPECT_EQ(s.w[i], 0.0);
    EXPECT_EQ(s.p[i], 0.0);
  }
}

TEST(Step, TravellingWaveConvergesAtFourthOrder) {
  const double T = 4.0;
  std::vector<double> err, h;
  for (std::size_t n : {321, 641, 1281}) {
    const Grid1D g = Grid1D::covering(-14, 14, n);
    const auto data = build_data(family(0.0), g.x0);
    double speed = 0.0;
    const auto s = evolve(g, init_state(data, g), T, {}, &speed);
    double e = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
      e = std::max(e, std::abs(s.phi[i] - exact_travelling(data, T, g.x(i)).phi));
    err.push_back(e);
    h.push_back(g.dx);
    EXPECT_LE(speed, 1.0 + 1e-12);
  }
  EXPECT_GE(std::log(err[1] / err[2]) / std::log(h[1] / h[2]), 3.5);
}

TEST(Step, SpeedBoundOnGenericTimelikeRun) {
  const Grid1D g = Grid1D::covering(-16, 16, 801);
  DataFamily fam = family(0.2, ProfileSpec::gaussian(1.5));
  fam.f = ProfileSpec::gaussian(1.0, 1.0);
  double speed = 0.0;
  evolve(g, init_state(fam, g), 6.0, {}, &speed);
  EXPECT_LE(speed, 1.0 + 1e-12);
  EXPECT_GT(speed, 0.9);
}

TEST(Step, NestedDomainsAgreeInTheInterior) {
  DataFamily fam = family(0.2, ProfileSpec::gaussian(1.0));
  fam.f = ProfileSpec::gaussian(1.0, 0.5);
  const double dx = 0.05, T = 4.0;
  const Grid1D small(-14, dx, 561);   // [-14, 14]
  const Grid1D large(-28, dx, 1121);  // [-28, 28]
  EvolverOptions opt;
  const auto a = evolve(small, init_state(fam, small), T, opt);
  auto b0 = init_state(fam, large);
  // Pin F at the same point on both grids.
  const double shift = build_data(fam, large.x0).F(small.x0);
  for (double& v : b0.phi) v -= shift;
  const auto b = evolve(large, std::move(b0), T, opt);
  double diff = 0.0;
  for (std::size_t i = 0; i < small.n; ++i) {
    const std::size_t j = i + 280;
    diff = std::max({diff, std::abs(a.w[i] - b.w[j]), std::abs(a.p[i] - b.p[j]),
                     std::abs(a.phi[i] - b.phi[j])});
  }
  EXPECT_LE(diff, 1e-9);
}

TEST(Step, TimeReflectionRoundTrip) {
  const Grid1D g = Grid1D::covering(-12, 12, 481);
  DataFamily fam = family(0.3);
  fam.f = ProfileSpec::gaussian(1.0, 0.5);
  const auto s0 = init_state(fam, g);
  EvolverOptions opt;
  opt.eps_ko = 0.0;
  const double dt = 0.4 * g.dx;
  auto s = s0;
  for (int i = 0; i < 10; ++i) s = step_with_dt(g, s, dt, opt);
  for (int i = 0; i < 10; ++i) s = step_backward(g, s, dt, opt);
  EXPECT_NEAR(s.t, 0.0, 1e-14);
  double e = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) e = std::max(e, std::abs(s.w[i] - s0.w[i]));
  EXPECT_LT(e, 1e-7);
}

TEST(Step, BlowupIsReported) {
  const Grid1D g = Grid1D::covering(-10, 10, 401);
  DataFamily fam;
  fam.delta = 1.0;
  fam.f = ProfileSpec::poly_gaussian(1.0, {3, 4});
  fam.fb = ProfileSpec::poly_gaussian(1.0, {-3, 4});
  Evolver ev(g, init_state(fam, g));
  EXPECT_THROW(
      {
        while (ev.state().t < 5.0) ev.advance();
      },
      BlowupDetected);
  EXPECT_GT(ev.state().t, 0.0);
  EXPECT_LT(ev.state().t, 5.0);
}

TEST(ExactTravelling, InitialDataAndNullCondition) {
  const Grid1D g(-8, 0.1, 161);
  const auto data = build_data(family(0.0), g.x0);
  const auto s = init_state(data, g);
  for (std::size_t i = 0; i < g.n; ++i) {
    const auto v = exact_travelling(data, 0.0, g.x(i));
    EXPECT_EQ(v.phi, s.phi[i]);
    EXPECT_EQ(v.w, s.w[i]);
    EXPECT_EQ(v.p, s.p[i]);
    const auto later = exact_travelling(data, 2.5, g.x(i));
    EXPECT_EQ(later.w + later.p, 0.0);
  }
  EXPECT_THROW(exact_travelling(build_data(family(0.1), g.x0), 0.0, 0.0), ValidationError);
}

TEST(ExactTravelling, EquationResidualIsFourthOrder) {
  const double t = 1.3;
  std::vector<double> err, h;
  for (std::size_t n : {161, 321, 641}) {
    const Grid1D g = Grid1D::covering(-8, 8, n);
    const auto data = build_data(family(0.0), g.x0);
    std::vector<double> w(g.n), p(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      const auto v = exact_travelling(data, t, g.x(i));
      w[i] = v.w;
      p[i] = v.p;
    }
    const auto wx = stencil::d1(w, g.dx), px = stencil::d1(p, g.dx);
    std::vector<double> r(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double wt = data.dF(g.x(i) - t, 1);  // d_t (-F'(x - t))
      r[i] = w_rate(w[i], p[i], wx[i], px[i]) - wt;
    }
    err.push_back(interior_max(g, r, -6, 6));
    h.push_back(g.dx);
  }
  EXPECT_GT(std::log(err[1] / err[2]) / std::log(h[1] / h[2]), 3.7);
}

TEST(Tracer, ZeroFieldPlusPathsAreStraight) {
  const Grid1D g(-5, 0.1, 101);
  FieldState s = zero_state(g.n);
  CharacteristicTracer tr(g, Family::plus, {-1.0, 0.0, 1.0}, 0.0);
  for (int i = 0; i < 20; ++i) {
    FieldState next = step_with_dt(g, s, 0.05, {});
    tr.update(s, next);
    s = next;
  }
  for (const auto& path : tr.paths()) {
    const auto [t, x] = path.samples.back();
    EXPECT_NEAR(x, path.seed_x + t, 1e-12);
  }
  EXPECT_NEAR(tr.min_separation(), 1.0, 1e-12);
}

TEST(Tracer, DeltaZeroPlusFamilyMovesAtUnitSpeed) {
  const Grid1D g = Grid1D::covering(-12, 12, 481);
  Evolver ev(g, init_state(family(0.0), g));
  CharacteristicTracer tr(g, Family::plus, {-2.0, 0.0, 2.0}, 0.0);
  while (ev.state().t < 0.5) {
    const FieldState prev = ev.state();
    ev.advance(0.01);
    tr.update(prev, ev.state());
  }
  for (const auto& path : tr.paths()) {
    const auto [t, x] = path.samples.back();
    EXPECT_NEAR(x - path.seed_x, t, 1e-6);
  }
}
