#pragma once
// Dual evaluations of the geometric identities on manufactured fields and
// on runs: divergence of the current, deformation closed forms, trace-free
// stress, energy equivalences and the discrete energy balance.

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "stringlab/energy.hpp"
#include "stringlab/stress.hpp"

namespace stringlab {

/// amp * exp(-(x - x0 - v t)^2 / s^2 - (t - t0)^2 / tau^2)
struct GaussianPacket {
  double amp = 0.3;
  double x0 = 0.0;
  double v = 0.0;
  double s = 1.0;
  double t0 = 0.0;
  double tau = 2.0;
};

/// Sum of Gaussian packets plus a linear part c0 + ct t + cx x, with exact
/// jets.
struct ManufacturedField {
  std::vector<GaussianPacket> packets;
  double c0 = 0.0, ct = 0.0, cx = 0.0;

  Jet jet(double t, double x) const {
    Jet j;
    j.v = c0 + ct * t + cx * x;
    j.t = ct;
    j.x = cx;
    for (const auto& p : packets) {
      const double y = x - p.x0 - p.v * t;
      const double s2 = p.s * p.s, tau2 = p.tau * p.tau;
      const double q = -y * y / s2 - (t - p.t0) * (t - p.t0) / tau2;
      const double e = p.amp * std::exp(q);
      const double qt = 2.0 * p.v * y / s2 - 2.0 * (t - p.t0) / tau2;
      const double qx = -2.0 * y / s2;
      const double qtt = -2.0 * p.v * p.v / s2 - 2.0 / tau2;
      const double qtx = 2.0 * p.v / s2;
      const double qxx = -2.0 / s2;
      j.v += e;
      j.t += e * qt;
      j.x += e * qx;
      j.tt += e * (qt * qt + qtt);
      j.tx += e * (qt * qx + qtx);
      j.xx += e * (qx * qx + qxx);
    }
    return j;
  }

  ManufacturedField scaled(double k) const {
    ManufacturedField f = *this;
    for (auto& p : f.packets) p.amp *= k;
    f.c0 *= k;
    f.ct *= k;
    f.cx *= k;
    return f;
  }

  /// A small mixture of 1 to 3 packets with a linear part; amplitudes keep
  /// gradients well inside the timelike region.
  static ManufacturedField random(std::mt19937_64& rng, double amp_max = 0.25) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> count(1, 3);
    ManufacturedField f;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      GaussianPacket p;
      p.amp = amp_max * U(rng) / n;
      p.x0 = 2.0 * U(rng);
      p.v = 0.9 * U(rng);
      p.s = 1.0 + 0.5 * U(rng);
      p.t0 = U(rng);
      p.tau = 2.0 + U(rng);
      f.packets.push_back(p);
    }
    f.c0 = U(rng);
    f.ct = 0.1 * U(rng);
    f.cx = 0.1 * U(rng);
    return f;
  }
};

struct IdentityResidual {
  std::string identity;
  std::vector<double> dx;        // step or grid spacing per level
  std::vector<double> residual;  // per level
  double observed_order = 0.0;   // from the two finest levels; NaN if n/a
  double expected_order = 0.0;
  double tolerance = 0.0;        // single-level checks compare against this
  bool pass = false;
  std::string note;
};

inline double observed_order(const std::vector<double>& h,
                             const std::vector<double>& r) {
  const std::size_t n = r.size();
  if (n < 2 || !(r[n - 1] > 0.0) || !(r[n - 2] > 0.0))
    return std::numeric_limits<double>::quiet_NaN();
  return std::log(r[n - 2] / r[n - 1]) / std::log(h[n - 2] / h[n - 1]);
}

/// Rows: identity,level,dx,residual,order (order blank except on the last
/// level of a refinement study).
inline void write_identity_csv(std::ostream& os,
                               const std::vector<IdentityResidual>& rs,
                               bool header = true) {
  if (header) os << "identity,level,dx,residual,order\n";
  os.precision(10);
  for (const auto& r : rs) {
    for (std::size_t i = 0; i < r.residual.size(); ++i) {
      os << r.identity << ',' << i << ',' << r.dx[i] << ',' << r.residual[i] << ',';
      if (i + 1 == r.residual.size() && r.residual.size() > 1 &&
          std::isfinite(r.observed_order))
        os << r.observed_order;
      os << '\n';
    }
  }
}

/// Central-difference divergence of sqrt(g) P^a at (t, x), step h.
template <class Xi>
double numeric_divergence(const ManufacturedField& phi, const ManufacturedField& vphi,
                          const Xi& xi_at, double t, double x, double h) {
  auto P = [&](double tt, double xx) {
    return current_density(xi_at(tt, xx, phi.jet(tt, xx)), phi.jet(tt, xx),
                           vphi.jet(tt, xx).d1());
  };
  return (P(t + h, x)[0] - P(t - h, x)[0]) / (2.0 * h) +
         (P(t, x + h)[1] - P(t, x - h)[1]) / (2.0 * h);
}

struct DivergenceOptions {
  std::vector<double> steps{0.1, 0.05, 0.025};
  int samples = 64;
  double t_lo = 0.0, t_hi = 2.0, x_lo = -3.0, x_hi = 3.0;
  std::uint64_t seed = 1;
  double min_order = 1.5;
};

/// Compares the central-difference divergence of the current with the
/// right side of the identity at random points, for each step size.
/// Residuals are max |lhs - rhs| / max |rhs|.
inline IdentityResidual verify_divergence_identity(const ManufacturedField& phi,
                                                   const ManufacturedField& vphi,
                                                   Side side, const Weight& weight,
                                                   const DivergenceOptions& opt = {}) {
  IdentityResidual out;
  out.identity = side == Side::TL ? "divergence_TL" : "divergence_TLb";
  out.expected_order = 2.0;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> T(opt.t_lo, opt.t_hi), X(opt.x_lo, opt.x_hi);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < opt.samples; ++i) pts.emplace_back(T(rng), X(rng));
  auto xi_at = [&](double t, double x, const Jet& j) {
    return multiplier_field(side, t, x, j, weight).xi;
  };
  double scale = 0.0;
  std::vector<double> rhs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [t, x] = pts[i];
    rhs[i] = divergence_density(side, t, x, phi.jet(t, x), vphi.jet(t, x), weight);
    scale = std::max(scale, std::abs(rhs[i]));
  }
  for (double h : opt.steps) {
    double err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto [t, x] = pts[i];
      err = std::max(err, std::abs(numeric_divergence(phi, vphi, xi_at, t, x, h) - rhs[i]));
    }
    out.dx.push_back(h);
    out.residual.push_back(scale > 0.0 ? err / scale : err);
  }
  out.observed_order = observed_order(out.dx, out.residual);
  out.pass = out.observed_order >= opt.min_order;
  return out;
}

/// The default manufactured pair: a 0.3-amplitude moving packet used both as
/// the geometry and as the test row.
inline ManufacturedField default_packet() {
  ManufacturedField f;
  f.packets.push_back({0.3, 0.2, 0.3, 1.0, 0.5, 2.0});
  return f;
}

struct DeformationOptions {
  int fields = 100;
  int points_per_field = 8;
  std::uint64_t seed = 7;
  double tolerance = 1e-10;
  double trace_tolerance = 1e-13;
  ClosedForm form = ClosedForm::full;
};

struct DeformationResult {
  IdentityResidual tl, tlb, trace;
};

/// Direct contraction T^a_b d_a xi^b against the null-frame closed form on
/// random mixtures. Discrepancies are relative to the sum of the absolute
/// values of the four terms of the direct contraction. The trace residual is
/// |T^a_a| relative to sum |T^a_b|.
inline DeformationResult verify_deformation(const Weight& weight,
                                            const DeformationOptions& opt = {}) {
  DeformationResult r;
  r.tl.identity = "deformation_TL";
  r.tlb.identity = "deformation_TLb";
  r.trace.identity = "trace";
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> T(0.0, 2.0), X(-3.0, 3.0);
  double e_tl = 0.0, e_tlb = 0.0, e_tr = 0.0;
  for (int f = 0; f < opt.fields; ++f) {
    const ManufacturedField phi = ManufacturedField::random(rng);
    const ManufacturedField vphi = ManufacturedField::random(rng, 1.0);
    for (int k = 0; k < opt.points_per_field; ++k) {
      const double t = T(rng), x = X(rng);
      const Jet j = phi.jet(t, x);
      if (!(determinant(j) > 0.2)) continue;
      const Vec2 dv = vphi.jet(t, x).d1();
      const Mat2 Tm = stress_tensor(j, dv);
      for (Side side : {Side::TL, Side::TLb}) {
        const MultiplierField m = multiplier_field(side, t, x, j, weight);
        double direct = 0.0, scale = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            direct += Tm[a][b] * m.dxi[a][b];
            scale += std::abs(Tm[a][b] * m.dxi[a][b]);
          }
        const double closed = deformation_closed(side, t, x, j, dv, weight, opt.form);
        const double rel = scale > 0.0 ? std::abs(direct - closed) / scale : 0.0;
        (side == Side::TL ? e_tl : e_tlb) = std::max(side == Side::TL ? e_tl : e_tlb, rel);
      }
      double tscale = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) tscale += std::abs(Tm[a][b]);
      if (tscale > 0.0) e_tr = std::max(e_tr, std::abs(Tm[0][0] + Tm[1][1]) / tscale);
    }
  }
  for (auto* p : {&r.tl, &r.tlb}) {
    p->dx = {0.0};
    p->tolerance = opt.tolerance;
    p->observed_order = std::numeric_limits<double>::quiet_NaN();
  }
  r.tl.residual = {e_tl};
  r.tlb.residual = {e_tlb};
  r.tl.pass = e_tl <= opt.tolerance;
  r.tlb.pass = e_tlb <= opt.tolerance;
  r.trace.dx = {0.0};
  r.trace.residual = {e_tr};
  r.trace.tolerance = opt.trace_tolerance;
  r.trace.observed_order = std::numeric_limits<double>::quiet_NaN();
  r.trace.pass = e_tr <= opt.trace_tolerance;
  return r;
}

/// One energy-density contraction and the comparison form it should be
/// equivalent to.
struct EquivalenceCase {
  std::string name;
  Side side;
  Direction dir;
  double band_lo, band_hi;
  // comparison form without the weight, from (A, B, a, b) =
  // (L vphi, Lb vphi, L phi, Lb phi)
  std::function<double(double, double, double, double)> form;
};

/// The six contractions with their comparison forms. The cross terms
/// T(-Dub, TL) and T(-Du, TLb) carry an exact 1/(8g) prefactor, so their
/// band floor is 1/16 rather than 1/8.
inline std::vector<EquivalenceCase> equivalence_cases() {
  auto sq = [](double v) { return v * v; };
  return {
      {"u_TL", Side::TL, Direction::u, 1.0 / 8, 8.0,
       [=](double A, double B, double a, double) { return sq(A) + 0.25 * sq(a * a) * sq(B); }},
      {"ub_TL", Side::TL, Direction::ub, 1.0 / 16, 16.0,
       [=](double A, double B, double a, double b) { return sq(b) * sq(A) + sq(a) * sq(B); }},
      {"u_TLb", Side::TLb, Direction::u, 1.0 / 16, 16.0,
       [=](double A, double B, double a, double b) { return sq(b) * sq(A) + sq(a) * sq(B); }},
      {"ub_TLb", Side::TLb, Direction::ub, 1.0 / 8, 8.0,
       [=](double A, double B, double, double b) { return sq(B) + 0.25 * sq(b * b) * sq(A); }},
      {"t_TL", Side::TL, Direction::t, 1.0 / 8, 8.0,
       [=](double A, double B, double a, double b) {
         return sq(A) + sq(a) * sq(B) + sq(b) * sq(A) + sq(a * a) * sq(B);
       }},
      {"t_TLb", Side::TLb, Direction::t, 1.0 / 8, 8.0,
       [=](double A, double B, double a, double b) {
         return sq(B) + sq(b) * sq(A) + sq(a) * sq(B) + sq(b * b) * sq(A);
       }},
  };
}

struct EquivalenceStat {
  std::string name;
  double min_ratio = 0.0, max_ratio = 0.0;
  double band_lo = 0.0, band_hi = 0.0;
  bool pass = false;
};

struct EquivalenceOptions {
  int samples = 10000;
  double max_l = 0.1;   // |L phi|
  double max_lb = 1.0;  // |Lb phi|
  std::uint64_t seed = 11;
};

/// Random states in the monitored regime; the row (A, B) is uniform in the
/// unit square and (t, x) random so the weights vary.
inline std::vector<EquivalenceStat> sample_equivalence(const Weight& weight,
                                                       const EquivalenceOptions& opt = {}) {
  const auto cases = equivalence_cases();
  std::vector<EquivalenceStat> st(cases.size());
  for (std::size_t c = 0; c < cases.size(); ++c) {
    st[c].name = cases[c].name;
    st[c].band_lo = cases[c].band_lo;
    st[c].band_hi = cases[c].band_hi;
    st[c].min_ratio = std::numeric_limits<double>::infinity();
    st[c].max_ratio = -std::numeric_limits<double>::infinity();
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < opt.samples; ++i) {
    const double a = opt.max_l * U(rng), b = opt.max_lb * U(rng);
    const double A = U(rng), B = U(rng);
    const NullPoint pt = null_coords(5.0 * U(rng), 10.0 * U(rng));
    const NullGradientPair ng{a, b};
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const double dens = stress_contraction(A, B, ng, pt, cases[c].side, cases[c].dir, weight);
      const double lam = cases[c].side == Side::TL ? weight(pt.ub) : weight(pt.u);
      const double ref = lam * cases[c].form(A, B, a, b);
      if (!(ref > 0.0)) continue;
      const double ratio = dens / ref;
      st[c].min_ratio = std::min(st[c].min_ratio, ratio);
      st[c].max_ratio = std::max(st[c].max_ratio, ratio);
    }
  }
  for (auto& s : st) s.pass = s.min_ratio >= s.band_lo && s.max_ratio <= s.band_hi;
  return st;
}

struct BalanceStudy {
  DataFamily family;
  double x_lo = -12.0, x_hi = 12.0;
  std::vector<std::size_t> levels{241, 481, 961};
  double t_end = 4.0;
  int N = 2;
  double eps_ko = 0.0;
  double cfl = 0.4;
  double min_order = 1.5;
};

/// Small-amplitude run with both packets overlapping at t = 0; probes at
/// u0 = 1 and ub0 = 1 so the boundaries cross the packets.
inline BalanceStudy default_balance_study() {
  BalanceStudy s;
  s.family.gamma = 0.5;
  s.family.delta = 1.0;
  s.family.f = ProfileSpec::gaussian(0.01, 0.0, 1.0);
  s.family.fb = ProfileSpec::gaussian(0.01, 0.5, 1.0);
  return s;
}

/// Energy identities on nested refinements. Residuals are the largest
/// |Sigma(t) + flux(t) - Sigma(0) + bulk(t)| over the run, relative to
/// Sigma(0). Returns one entry per (side, row).
inline std::vector<IdentityResidual> verify_energy_balance(
    const BalanceStudy& study, const std::vector<BalanceSpec>& specs) {
  std::vector<IdentityResidual> out(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    out[s].identity = std::string(specs[s].side == Side::TL ? "energy_balance_plus"
                                                            : "energy_balance_minus") +
                      "_k" + std::to_string(specs[s].row.k1) + std::to_string(specs[s].row.k2);
    out[s].expected_order = 2.0;
  }
  const Weight weight(study.family.gamma);
  for (std::size_t n : study.levels) {
    const Grid1D grid = Grid1D::covering(study.x_lo, study.x_hi, n);
    EvolverOptions opt;
    opt.cfl = study.cfl;
    opt.eps_ko = study.eps_ko;
    DiagnosticsOptions d;
    d.N = study.N;
    d.balances = specs;
    d.report_every = 1 << 30;
    const RunResult res = run_diagnostics(grid, init_state(study.family, grid),
                                          study.t_end, weight, opt, d);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const auto& b = res.balances[s];
      const double sig0 = std::abs(b.history().front().sigma);
      out[s].dx.push_back(grid.dx);
      out[s].residual.push_back(sig0 > 0.0 ? b.max_residual() / sig0 : b.max_residual());
      if (b.truncated()) out[s].note = "region left the grid";
    }
  }
  for (auto& r : out) {
    r.observed_order = observed_order(r.dx, r.residual);
    r.pass = r.observed_order >= study.min_order && r.note.empty();
  }
  return out;
}

inline std::vector<BalanceSpec> default_balance_specs() {
  return {{Side::TL, 1.0, {0, 0}},
          {Side::TLb, 1.0, {0, 0}},
          {Side::TL, 1.0, {0, 1}},
          {Side::TLb, 1.0, {1, 0}}};
}

}  // namespace stringlab
