#pragma once
// Pointwise stress tensor of a test field on the string geometry, its
// contractions with the weighted null multipliers, the deformation terms,
// and the divergence of the associated current.
//
// Index 0 is t and index 1 is x throughout. T[a][b] stores T^a_b.

#include <array>
#include <cmath>

#include "stringlab/core_null.hpp"

namespace stringlab {

/// Value, first and second derivatives of a scalar at one point.
struct Jet {
  double v = 0.0;
  double t = 0.0, x = 0.0;
  double tt = 0.0, tx = 0.0, xx = 0.0;

  std::array<double, 2> d1() const { return {t, x}; }
  std::array<std::array<double, 2>, 2> d2() const {
    return {{{tt, tx}, {tx, xx}}};
  }
  NullGradientPair null() const { return null_gradient(t, x); }

  /// Jet with first derivatives from null components (Lf, Lbf) and second
  /// derivatives from the null components of d_t f and d_x f.
  static Jet from_null(double lf, double lbf, double l_ft, double lb_ft,
                       double l_fx, double lb_fx) {
    Jet j;
    j.t = 0.5 * (lf + lbf);
    j.x = 0.5 * (lf - lbf);
    j.tt = 0.5 * (l_ft + lb_ft);
    j.tx = 0.5 * (l_ft - lb_ft);
    j.xx = 0.5 * (l_fx - lb_fx);
    return j;
  }
};

using Mat2 = std::array<std::array<double, 2>, 2>;
using Vec2 = std::array<double, 2>;

/// Inverse induced metric g^{ab} = eta^{ab} - d^a phi d^b phi / g.
inline Mat2 inverse_metric(const Jet& phi) {
  const double g = 1.0 - phi.t * phi.t + phi.x * phi.x;
  const Vec2 up{-phi.t, phi.x};
  return {{{-1.0 - up[0] * up[0] / g, -up[0] * up[1] / g},
           {-up[1] * up[0] / g, 1.0 - up[1] * up[1] / g}}};
}

inline double determinant(const Jet& phi) {
  return 1.0 - phi.t * phi.t + phi.x * phi.x;
}

/// T^a_b[vphi] on the geometry of phi.
inline Mat2 stress_tensor(const Jet& phi, const Vec2& dv) {
  const Mat2 gi = inverse_metric(phi);
  double q = 0.0;
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n) q += gi[m][n] * dv[m] * dv[n];
  Mat2 T{};
  for (int a = 0; a < 2; ++a) {
    const double up = gi[a][0] * dv[0] + gi[a][1] * dv[1];
    for (int b = 0; b < 2; ++b)
      T[a][b] = up * dv[b] - (a == b ? 0.5 * q : 0.0);
  }
  return T;
}

inline double stress_trace(const Jet& phi, const Vec2& dv) {
  const Mat2 T = stress_tensor(phi, dv);
  return T[0][0] + T[1][1];
}

/// Multiplier field and its Cartesian derivatives d_a xi^b.
struct MultiplierField {
  Vec2 xi{};
  Mat2 dxi{};  // dxi[a][b] = d_a xi^b
};

inline MultiplierField multiplier_field(Side side, double t, double x,
                                        const Jet& phi, const Weight& weight) {
  const NullPoint pt = null_coords(t, x);
  const double a = phi.t + phi.x;  // L phi
  const double b = phi.t - phi.x;  // Lb phi
  const Vec2 da{phi.tt + phi.tx, phi.tx + phi.xx};
  const Vec2 db{phi.tt - phi.tx, phi.tx - phi.xx};
  MultiplierField m;
  if (side == Side::TL) {
    // Lambdab(ub) (L + a^2 Lb): xi^t = lam (1 + a^2), xi^x = lam (1 - a^2).
    const double lam = weight(pt.ub);
    const double dlam = 0.5 * weight.derivative(pt.ub);  // d_t ub = d_x ub = 1/2
    m.xi = {lam * (1.0 + a * a), lam * (1.0 - a * a)};
    for (int k = 0; k < 2; ++k) {
      m.dxi[k][0] = dlam * (1.0 + a * a) + lam * 2.0 * a * da[k];
      m.dxi[k][1] = dlam * (1.0 - a * a) - lam * 2.0 * a * da[k];
    }
  } else {
    // Lambda(u) (Lb + b^2 L): xi^t = lam (1 + b^2), xi^x = lam (b^2 - 1).
    const double lam = weight(pt.u);
    const double dl = weight.derivative(pt.u);
    const Vec2 dlam{0.5 * dl, -0.5 * dl};  // d_t u = 1/2, d_x u = -1/2
    m.xi = {lam * (1.0 + b * b), lam * (b * b - 1.0)};
    for (int k = 0; k < 2; ++k) {
      m.dxi[k][0] = dlam[k] * (1.0 + b * b) + lam * 2.0 * b * db[k];
      m.dxi[k][1] = dlam[k] * (b * b - 1.0) + lam * 2.0 * b * db[k];
    }
  }
  return m;
}

enum class Direction { t, u, ub };

inline Vec2 covector(Direction d) {
  switch (d) {
    case Direction::t: return {1.0, 0.0};
    case Direction::u: return {0.5, -0.5};
    case Direction::ub: return {0.5, 0.5};
  }
  return {0.0, 0.0};
}

/// T[vphi](-D f, xi) = -(d_s f) T^s_b xi^b.
inline double contract(const Mat2& T, Direction d, const Vec2& xi) {
  const Vec2 c = covector(d);
  double acc = 0.0;
  for (int s = 0; s < 2; ++s)
    for (int b = 0; b < 2; ++b) acc += c[s] * T[s][b] * xi[b];
  return -acc;
}

/// Energy density T[vphi](-D f, xi) for a row with null derivatives
/// (lrow, lbrow) = (L vphi, Lb vphi) on the base geometry `base`.
inline double stress_contraction(double lrow, double lbrow,
                                 const NullGradientPair& base,
                                 const NullPoint& pt, Side side, Direction dir,
                                 const Weight& weight,
                                 double gmin = kDefaultGmin) {
  metric_scalars(base, gmin);
  Jet phi;
  phi.t = base.w();
  phi.x = base.p();
  const Vec2 dv{0.5 * (lrow + lbrow), 0.5 * (lrow - lbrow)};
  const MultiplierCoeffs mc = multiplier(side, pt, base, weight);
  const auto [xt, xx] = mc.cartesian();
  return contract(stress_tensor(phi, dv), dir, {xt, xx});
}

/// Closed form of T[vphi](-Du, TL) in null components.
inline double stress_u_TL_closed(double A, double B, double a, double b,
                                 double lam) {
  const double g = 1.0 - a * b;
  return (0.5 + a * b / (4.0 * g)) * lam * A * A +
         lam * a * a * a * a * B * B / (8.0 * g) -
         lam * a * a * b * b * A * A / (8.0 * g) +
         lam / (4.0 * g) * a * a * A * B;
}

/// Direct contraction T^a_b[vphi] d_a xi^b.
inline double deformation_direct(Side side, double t, double x, const Jet& phi,
                                 const Vec2& dv, const Weight& weight) {
  const Mat2 T = stress_tensor(phi, dv);
  const MultiplierField m = multiplier_field(side, t, x, phi, weight);
  double acc = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) acc += T[a][b] * m.dxi[a][b];
  return acc;
}

enum class ClosedForm {
  full,            // keeps the weight-derivative term through T^u_u (T^ub_ub)
  no_trace_term,   // the flat-space shortcut that drops it
  flipped_mixed,   // sign error in the L Lb phi term; a test fixture
};

/// Null-frame closed form of T^a_b[vphi] d_a xi^b. The term carrying the
/// weight derivative through T^u_u (resp. T^ub_ub) does not vanish on a
/// curved geometry; the other variants exist so tests can confirm that the
/// dual evaluation notices when the formula is wrong.
inline double deformation_closed(Side side, double t, double x, const Jet& phi,
                                 const Vec2& dv, const Weight& weight,
                                 ClosedForm form = ClosedForm::full) {
  const NullPoint pt = null_coords(t, x);
  const double a = phi.t + phi.x, b = phi.t - phi.x;
  const double La = phi.tt + 2.0 * phi.tx + phi.xx;   // L^2 phi
  const double Lbb = phi.tt - 2.0 * phi.tx + phi.xx;  // Lb^2 phi
  const double LLb = phi.tt - phi.xx;                 // L Lb phi
  const double A = dv[0] + dv[1], B = dv[0] - dv[1];
  const double g = 1.0 - a * b;
  const double mixed = (b * b * A * A - a * a * B * B) / (8.0 * g);
  const double sign = form == ClosedForm::flipped_mixed ? -1.0 : 1.0;
  const bool trace_term = form != ClosedForm::no_trace_term;
  if (side == Side::TLb) {
    const double lam = weight(pt.u), dlam = weight.derivative(pt.u);
    double r = (-0.5 * A * A - a * b * A * A / (4.0 * g) - a * a * A * B / (4.0 * g)) *
                   (dlam * b * b + 2.0 * lam * Lbb * b) -
               sign * mixed * 2.0 * lam * LLb * b;
    if (trace_term) r += dlam * mixed;  // Lambda'(u) T^u_u
    return r;
  }
  const double lam = weight(pt.ub), dlam = weight.derivative(pt.ub);
  double r = (-0.5 * B * B - a * b * B * B / (4.0 * g) - b * b * A * B / (4.0 * g)) *
                 (dlam * a * a + 2.0 * lam * La * a) +
             sign * mixed * 2.0 * lam * LLb * a;
  if (trace_term) r -= dlam * mixed;  // Lambdab'(ub) T^ub_ub
  return r;
}

/// d_a (sqrt(g) g^{ab}) from the jet of phi.
inline Mat2 metric_density_derivative(const Jet& phi, int a) {
  const double g = determinant(phi);
  const double sg = std::sqrt(g);
  const Vec2 d2a = phi.d2()[std::size_t(a)];  // d_a d_t phi, d_a d_x phi
  const double dg = -2.0 * phi.t * d2a[0] + 2.0 * phi.x * d2a[1];
  const double dsg = dg / (2.0 * sg);
  const Vec2 up{-phi.t, phi.x};
  const Vec2 dup{-d2a[0], d2a[1]};
  const Mat2 eta{{{-1.0, 0.0}, {0.0, 1.0}}};
  Mat2 out{};
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r)
      out[c][r] = dsg * eta[c][r] -
                  (dup[c] * up[r] + up[c] * dup[r]) / sg +
                  up[c] * up[r] * dsg / g;
  return out;
}

/// Box_g vphi = g^{ab} d_a d_b vphi + (1/sqrt g) d_a(sqrt g g^{ab}) d_b vphi.
inline double box_g(const Jet& phi, const Jet& vphi) {
  const Mat2 gi = inverse_metric(phi);
  const Mat2 h = vphi.d2();
  const Vec2 dv = vphi.d1();
  double acc = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) acc += gi[a][b] * h[a][b];
  const double sg = std::sqrt(determinant(phi));
  for (int a = 0; a < 2; ++a) {
    const Mat2 dm = metric_density_derivative(phi, a);
    for (int b = 0; b < 2; ++b) acc += dm[a][b] * dv[b] / sg;
  }
  return acc;
}

/// Right side of the current divergence identity multiplied by sqrt(g):
/// sqrt(g) [Box_g vphi xi(vphi) + T^a_b d_a xi^b
///          - (1 / (2 sqrt g)) xi(sqrt g g^{cr}) d_c vphi d_r vphi].
inline double divergence_density(const MultiplierField& m, const Jet& phi,
                                 const Jet& vphi) {
  const Vec2 dv = vphi.d1();
  const Mat2 T = stress_tensor(phi, dv);
  double deform = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) deform += T[a][b] * m.dxi[a][b];
  const double xi_v = m.xi[0] * dv[0] + m.xi[1] * dv[1];
  Mat2 xi_dm{};
  for (int a = 0; a < 2; ++a) {
    const Mat2 dm = metric_density_derivative(phi, a);
    for (int c = 0; c < 2; ++c)
      for (int r = 0; r < 2; ++r) xi_dm[c][r] += m.xi[a] * dm[c][r];
  }
  double quad = 0.0;
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r) quad += xi_dm[c][r] * dv[c] * dv[r];
  const double sg = std::sqrt(determinant(phi));
  return sg * (box_g(phi, vphi) * xi_v + deform) - 0.5 * quad;
}

inline double divergence_density(Side side, double t, double x, const Jet& phi,
                                 const Jet& vphi, const Weight& weight) {
  return divergence_density(multiplier_field(side, t, x, phi, weight), phi, vphi);
}

/// sqrt(g) P^a with P^a = T^a_b xi^b.
inline Vec2 current_density(const Vec2& xi, const Jet& phi, const Vec2& dv) {
  const Mat2 T = stress_tensor(phi, dv);
  const double sg = std::sqrt(determinant(phi));
  return {sg * (T[0][0] * xi[0] + T[0][1] * xi[1]),
          sg * (T[1][0] * xi[0] + T[1][1] * xi[1])};
}

inline Vec2 current_density(Side side, double t, double x, const Jet& phi,
                            const Vec2& dv, const Weight& weight) {
  return current_density(multiplier_field(side, t, x, phi, weight).xi, phi, dv);
}

}  // namespace stringlab
