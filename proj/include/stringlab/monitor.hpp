#pragma once
// Bootstrap-hierarchy monitor: sup-in-time energies, the fitted constant M,
// weighted L-infinity margins and least-squares fits of the growth shapes
//   Eb^2 <= I^2 + C1 delta M^4,   E^2 <= delta^2 I^2 + C1 delta^3 M^6.

#include <algorithm>
#include <cmath>
#include <vector>

#include "stringlab/energy.hpp"

namespace stringlab {

struct RunSummary {
  double delta = 0.0;
  double E2_0 = 0.0, Eb2_0 = 0.0;      // at t = 0
  double sup_E2 = 0.0, sup_Eb2 = 0.0;  // sup over t of the inhomogeneous sums
  double sup_F2 = 0.0, sup_Fb2 = 0.0;  // largest final flux over probes
  double sup_L = 0.0, sup_Lb = 0.0;    // weighted L-infinity sizes, all t
  double min_g = 1.0;
  double max_tail_fraction = 0.0;
};

inline RunSummary summarize_run(const std::vector<EnergyReport>& reports,
                                double delta) {
  RunSummary s;
  s.delta = delta;
  if (reports.empty()) return s;
  s.E2_0 = reports.front().E2_total();
  s.Eb2_0 = reports.front().Eb2_total();
  for (const auto& r : reports) {
    s.sup_E2 = std::max(s.sup_E2, r.E2_total());
    s.sup_Eb2 = std::max(s.sup_Eb2, r.Eb2_total());
    s.sup_L = std::max(s.sup_L, r.sup_L);
    s.sup_Lb = std::max(s.sup_Lb, r.sup_Lb);
    s.min_g = std::min(s.min_g, r.min_g);
    s.max_tail_fraction = std::max(s.max_tail_fraction, r.tail_fraction);
  }
  const auto& last = reports.back();
  for (std::size_t p = 0; p < last.F2.size(); ++p)
    s.sup_F2 = std::max(s.sup_F2, last.F2_total(p));
  for (std::size_t p = 0; p < last.Fb2.size(); ++p)
    s.sup_Fb2 = std::max(s.sup_Fb2, last.Fb2_total(p));
  return s;
}

/// M^2 = max(sup Eb^2 + sup Fb^2, sup (E^2 + F^2) / delta^2) over runs.
inline double fit_M2(const std::vector<RunSummary>& runs) {
  double m2 = 0.0;
  for (const auto& r : runs) {
    m2 = std::max(m2, r.sup_Eb2 + r.sup_Fb2);
    if (r.delta > 0.0)
      m2 = std::max(m2, (r.sup_E2 + r.sup_F2) / (r.delta * r.delta));
  }
  return m2;
}

/// Constant of the one-dimensional weighted Sobolev bound
///   sup_x a |f|^2 <= C^2 (int a f^2 sqrt g + int a f_x^2 sqrt g),
/// valid for weights with |a'| <= ((1 + gamma) / 2) a and sqrt(g) >= sqrt(gmin).
inline double sobolev_constant(double gamma, double gmin) {
  return std::sqrt((3.0 + gamma) / (4.0 * std::sqrt(gmin)));
}

struct SobolevMargins {
  double L = 1.0;   // 1 - sup Lambdab^(1/2)|L phi_k| / (C delta M)
  double Lb = 1.0;  // 1 - sup Lambda^(1/2)|Lb phi_k| / (C M)
  bool ok() const { return L >= 0.0 && Lb >= 0.0; }
};

/// Margins of the weighted L-infinity bounds at one report. With
/// delta = 0 the L bound uses the measured small energy directly.
inline SobolevMargins sobolev_margins(const EnergyReport& r, double delta,
                                      double M, double c_sobolev,
                                      double floor = 1e-12) {
  SobolevMargins m;
  const double small = delta > 0.0 ? delta * M : std::sqrt(r.E2_total());
  const double bl = std::max(c_sobolev * small, floor);
  const double blb = std::max(c_sobolev * M, floor);
  m.L = 1.0 - r.sup_L / bl;
  m.Lb = 1.0 - r.sup_Lb / blb;
  return m;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct ShapeFit {
  double C1 = 0.0;
  double rel_rms = 0.0;  // rms misfit relative to rms of the data
};

/// Fits y ~ C1 x through the origin.
inline ShapeFit fit_through_origin(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  ShapeFit f;
  f.C1 = sxx > 0.0 ? sxy / sxx : 0.0;
  double res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) res += std::pow(y[i] - f.C1 * x[i], 2);
  f.rel_rms = syy > 0.0 ? std::sqrt(res / syy) : 0.0;
  return f;
}

struct SweepFit {
  double M2 = 0.0;
  double slope_E2 = 0.0;   // d log sup E^2 / d log delta
  double slope_Eb2 = 0.0;  // d log sup Eb^2 / d log delta
  double Eb2_variation = 0.0;  // (max - min) / min of sup Eb^2
  ShapeFit energy1;  // sup Eb^2 - Eb^2(0) against delta M^4
  ShapeFit energy2;  // sup E^2 - E^2(0) against delta^3 M^6
  bool self_consistent = false;  // initial energies <= M^2 / 4 analog
};

/// The initial energies stand in for the data constant: I^2 = Eb^2(0) for
/// the large family and delta^2 I^2 = E^2(0) for the small one.
inline SweepFit fit_sweep(const std::vector<RunSummary>& runs) {
  SweepFit f;
  f.M2 = fit_M2(runs);
  const double M4 = f.M2 * f.M2, M6 = M4 * f.M2;
  std::vector<double> d, e, eb, x1, y1, x2, y2;
  double i2 = 0.0;
  for (const auto& r : runs) {
    if (!(r.delta > 0.0)) continue;
    d.push_back(r.delta);
    e.push_back(r.sup_E2);
    eb.push_back(r.sup_Eb2);
    x1.push_back(r.delta * M4);
    y1.push_back(r.sup_Eb2 - r.Eb2_0);
    x2.push_back(std::pow(r.delta, 3) * M6);
    y2.push_back(r.sup_E2 - r.E2_0);
    i2 = std::max({i2, r.Eb2_0, r.E2_0 / (r.delta * r.delta)});
  }
  if (d.size() >= 2) {
    f.slope_E2 = loglog_slope(d, e);
    f.slope_Eb2 = loglog_slope(d, eb);
    const auto [lo, hi] = std::minmax_element(eb.begin(), eb.end());
    f.Eb2_variation = (*hi - *lo) / *lo;
    f.energy1 = fit_through_origin(x1, y1);
    f.energy2 = fit_through_origin(x2, y2);
  }
  f.self_consistent = i2 <= f.M2;
  return f;
}

}  // namespace stringlab
