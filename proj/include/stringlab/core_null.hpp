#pragma once
// Pointwise null-frame geometry of the relativistic string.
//
// Notation: phi is the graph height, w = d_t phi and p = d_x phi. The
// classical literature writes the first-order unknowns as (u, v) = (phi_t,
// phi_x); here u is reserved for the retarded null coordinate (t - x) / 2,
// so the time derivative is always called w.

#include <cmath>
#include <utility>

#include "stringlab/errors.hpp"

namespace stringlab {

inline constexpr double kDefaultGmin = 1e-6;

struct NullPoint {
  double t = 0.0;
  double x = 0.0;
  double u = 0.0;   // (t - x) / 2
  double ub = 0.0;  // (t + x) / 2
};

inline NullPoint null_coords(double t, double x) {
  return {t, x, 0.5 * (t - x), 0.5 * (t + x)};
}

/// L phi = (d_t + d_x) phi and Lb phi = (d_t - d_x) phi.
struct NullGradientPair {
  double lphi = 0.0;
  double lbphi = 0.0;

  double w() const { return 0.5 * (lphi + lbphi); }
  double p() const { return 0.5 * (lphi - lbphi); }
};

inline NullGradientPair null_gradient(double w, double p) {
  return {w + p, w - p};
}

/// Determinant and null components of the inverse induced metric.
struct MetricScalars {
  double g = 1.0;
  double guu = 0.0;    // g^{uu}
  double gubub = 0.0;  // g^{ub ub}
  double guub = -0.5;  // g^{u ub}
  bool timelike = true;
};

/// Same as metric_scalars() but never throws; `timelike` records g > gmin.
inline MetricScalars induced_metric(const NullGradientPair& ng,
                                    double gmin = kDefaultGmin) {
  MetricScalars m;
  const double ab = ng.lphi * ng.lbphi;
  m.g = 1.0 - ab;
  m.timelike = m.g > gmin;
  m.guu = -ng.lphi * ng.lphi / (4.0 * m.g);
  m.gubub = -ng.lbphi * ng.lbphi / (4.0 * m.g);
  m.guub = -0.5 - ab / (4.0 * m.g);
  return m;
}

inline MetricScalars metric_scalars(const NullGradientPair& ng,
                                    double gmin = kDefaultGmin) {
  MetricScalars m = induced_metric(ng, gmin);
  if (!m.timelike) throw TimelikeViolation(m.g, gmin);
  return m;
}

struct Speeds {
  double minus = -1.0;
  double plus = 1.0;
};

/// Characteristic speeds of the first-order system in (w, p).
inline Speeds eigenvalues(double w, double p) {
  const double disc = 1.0 + p * p - w * w;
  if (!(disc > 0.0)) throw HyperbolicityLoss(disc);
  const double root = std::sqrt(disc);
  const double denom = 1.0 + p * p;
  return {(-w * p - root) / denom, (-w * p + root) / denom};
}

/// The weight a(x) = (1 + x^2)^(1 + gamma), 0 < gamma < 1.
class Weight {
 public:
  explicit Weight(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw ValidationError("gamma must lie in (0,1), got " +
                            std::to_string(gamma));
  }

  double gamma() const { return gamma_; }

  double operator()(double x) const {
    return std::pow(1.0 + x * x, 1.0 + gamma_);
  }

  double derivative(double x) const {
    return 2.0 * (1.0 + gamma_) * x * std::pow(1.0 + x * x, gamma_);
  }

  /// a'(x) / a(x); bounded by (1 + gamma) in absolute value.
  double log_derivative(double x) const {
    return 2.0 * (1.0 + gamma_) * x / (1.0 + x * x);
  }

 private:
  double gamma_;
};

inline double weight_a(double x, double gamma) { return Weight(gamma)(x); }

enum class Side { TL, TLb };

/// Multiplier = cl * L + clb * Lb.
///   TL  = Lambdab(ub) (L + |Lphi|^2 Lb)
///   TLb = Lambda(u)   (Lb + |Lbphi|^2 L)
struct MultiplierCoeffs {
  double cl = 0.0;
  double clb = 0.0;
  double weight = 1.0;

  /// Cartesian components (xi^t, xi^x).
  std::pair<double, double> cartesian() const { return {cl + clb, cl - clb}; }
};

inline MultiplierCoeffs multiplier(Side side, const NullPoint& pt,
                                   const NullGradientPair& ng,
                                   const Weight& a) {
  if (side == Side::TL) {
    const double lam = a(pt.ub);
    return {lam, lam * ng.lphi * ng.lphi, lam};
  }
  const double lam = a(pt.u);
  return {lam * ng.lbphi * ng.lbphi, lam, lam};
}

/// g(xi, xi) for the multiplier of the given side.
inline double causal_norm(Side side, const NullPoint& pt,
                          const NullGradientPair& ng, const Weight& a) {
  const double ab = ng.lphi * ng.lbphi;
  const double factor = -3.0 + 2.0 * ab + ab * ab;
  if (side == Side::TL) {
    const double lam = a(pt.ub);
    return lam * lam * ng.lphi * ng.lphi * factor;
  }
  const double lam = a(pt.u);
  return lam * lam * ng.lbphi * ng.lbphi * factor;
}

}  // namespace stringlab
