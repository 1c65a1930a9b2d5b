#pragma once
// Weighted energies, null fluxes and the discrete energy balance along a
// run with a fixed time step.
//
// E^2_[k+1] integrates Lambdab(ub) |L phi_k|^2 sqrt(g) and Eb^2_[k+1]
// integrates Lambda(u) |Lb phi_k|^2 sqrt(g), summed over every multi-index
// of order k. Both use the whole computational line: the integrands are
// nonnegative, so the supremum over half-lines is the full-line value.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "stringlab/evolver.hpp"
#include "stringlab/stress.hpp"
#include "stringlab/tower.hpp"

namespace stringlab {

namespace quad {

inline double trapezoid(const Grid1D& grid, std::span<const double> f) {
  const std::size_t n = f.size();
  double acc = 0.5 * (f[0] + f[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) acc += f[i];
  return acc * grid.dx;
}

struct HalfLine {
  double value = 0.0;
  bool truncated = false;  // the endpoint fell outside the grid
};

/// Trapezoid integral over {x >= s} (right = true) or {x <= s}, with the
/// endpoint value interpolated.
inline HalfLine half_line(const Grid1D& grid, std::span<const double> f,
                          double s, bool right) {
  const double lo = grid.x0, hi = grid.x_end();
  if (s <= lo) return right ? HalfLine{trapezoid(grid, f), s < lo} : HalfLine{0.0, s < lo};
  if (s >= hi) return right ? HalfLine{0.0, s > hi} : HalfLine{trapezoid(grid, f), s > hi};
  const double fs = stencil::interpolate(grid, f, s);
  const auto j = std::size_t(std::floor((s - lo) / grid.dx));  // x_j <= s < x_{j+1}
  const std::size_t n = grid.n;
  double acc = 0.0;
  if (right) {
    acc += 0.5 * (grid.x(j + 1) - s) * (fs + f[j + 1]);
    for (std::size_t i = j + 1; i + 1 < n; ++i) acc += 0.5 * grid.dx * (f[i] + f[i + 1]);
  } else {
    acc += 0.5 * (s - grid.x(j)) * (fs + f[j]);
    for (std::size_t i = 0; i < j; ++i) acc += 0.5 * grid.dx * (f[i] + f[i + 1]);
  }
  return {acc, false};
}

}  // namespace quad

/// sqrt(g) of the tower's base geometry at each grid point.
inline std::vector<double> sqrt_g(const DerivativeTower& tw) {
  const auto& a = tw.base_l();
  const auto& b = tw.base_lb();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::sqrt(std::max(0.0, 1.0 - a[i] * b[i]));
  return out;
}

/// Integrand of E^2 (side TL) or Eb^2 (side TLb) for one multi-index.
inline std::vector<double> energy_density(const DerivativeTower& tw, MultiIndex k,
                                          Side side, const Weight& weight,
                                          const std::vector<double>& sg) {
  const auto& row = side == Side::TL ? tw.L(k) : tw.Lb(k);
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    const NullPoint pt = null_coords(tw.t, tw.grid.x(i));
    const double lam = side == Side::TL ? weight(pt.ub) : weight(pt.u);
    out[i] = lam * row[i] * row[i] * sg[i];
  }
  return out;
}

/// E^2_[k+1](t) for side TL, Eb^2_[k+1](t) for side TLb.
inline double energy_slice(const DerivativeTower& tw, int order, Side side,
                           const Weight& weight) {
  const auto sg = sqrt_g(tw);
  double acc = 0.0;
  for (int k1 = 0; k1 <= order; ++k1)
    acc += quad::trapezoid(tw.grid, energy_density(tw, {k1, order - k1}, side, weight, sg));
  return acc;
}

struct ProbeSet {
  std::vector<double> u;   // outgoing segments x = t - 2 u0
  std::vector<double> ub;  // incoming segments x = 2 ub0 - t
};

struct EnergyReport {
  double t = 0.0;
  std::vector<double> E2, Eb2;               // per order k = 0..N
  std::vector<std::vector<double>> F2, Fb2;  // [probe][k], running
  std::vector<bool> F2_truncated, Fb2_truncated;
  double min_g = 1.0;
  double sup_L = 0.0;   // max over |k| <= N-1 of sup_x Lambdab^(1/2) |L phi_k|
  double sup_Lb = 0.0;  // max over |k| <= N-1 of sup_x Lambda^(1/2) |Lb phi_k|
  double tail_fraction = 0.0;  // outermost-cell share of the energies

  double E2_total() const { return sum(E2); }
  double Eb2_total() const { return sum(Eb2); }
  double F2_total(std::size_t probe) const { return sum(F2[probe]); }
  double Fb2_total(std::size_t probe) const { return sum(Fb2[probe]); }

 private:
  static double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
};

/// Pointwise part of a report (everything except the running fluxes).
inline EnergyReport measure(const DerivativeTower& tw, const Weight& weight) {
  EnergyReport r;
  r.t = tw.t;
  const auto sg = sqrt_g(tw);
  const std::size_t n = tw.grid.n;
  r.min_g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) r.min_g = std::min(r.min_g, sg[i] * sg[i]);
  double edge = 0.0, total = 0.0;
  for (int order = 0; order <= tw.N; ++order) {
    double e = 0.0, eb = 0.0;
    for (int k1 = 0; k1 <= order; ++k1) {
      const MultiIndex k{k1, order - k1};
      const auto dl = energy_density(tw, k, Side::TL, weight, sg);
      const auto dlb = energy_density(tw, k, Side::TLb, weight, sg);
      e += quad::trapezoid(tw.grid, dl);
      eb += quad::trapezoid(tw.grid, dlb);
      edge += 0.5 * tw.grid.dx * (dl[0] + dl[1] + dl[n - 2] + dl[n - 1] +
                                  dlb[0] + dlb[1] + dlb[n - 2] + dlb[n - 1]);
      if (order <= tw.N - 1) {
        for (std::size_t i = 0; i < n; ++i) {
          r.sup_L = std::max(r.sup_L, std::sqrt(dl[i] / std::max(sg[i], 1e-300)));
          r.sup_Lb = std::max(r.sup_Lb, std::sqrt(dlb[i] / std::max(sg[i], 1e-300)));
        }
      }
    }
    r.E2.push_back(e);
    r.Eb2.push_back(eb);
    total += e + eb;
  }
  r.tail_fraction = total > 0.0 ? edge / total : 0.0;
  return r;
}

/// Running null fluxes F^2_[k+1](u0, t) and Fb^2_[k+1](ub0, t), integrated
/// in time by the trapezoid rule.
class FluxAccumulator {
 public:
  FluxAccumulator(ProbeSet probes, int N, Weight weight)
      : probes_(std::move(probes)), N_(N), weight_(weight) {
    F2_.assign(probes_.u.size(), std::vector<double>(std::size_t(N + 1), 0.0));
    Fb2_.assign(probes_.ub.size(), std::vector<double>(std::size_t(N + 1), 0.0));
    F2_trunc_.assign(probes_.u.size(), false);
    Fb2_trunc_.assign(probes_.ub.size(), false);
  }

  const ProbeSet& probes() const { return probes_; }

  void add(const DerivativeTower& tw) {
    auto cur_l = integrands(tw, Side::TL, F2_trunc_);
    auto cur_lb = integrands(tw, Side::TLb, Fb2_trunc_);
    if (last_t_) {
      const double h = tw.t - *last_t_;
      for (std::size_t p = 0; p < F2_.size(); ++p)
        for (int k = 0; k <= N_; ++k)
          F2_[p][std::size_t(k)] += 0.5 * h * (prev_l_[p][std::size_t(k)] + cur_l[p][std::size_t(k)]);
      for (std::size_t p = 0; p < Fb2_.size(); ++p)
        for (int k = 0; k <= N_; ++k)
          Fb2_[p][std::size_t(k)] += 0.5 * h * (prev_lb_[p][std::size_t(k)] + cur_lb[p][std::size_t(k)]);
    }
    prev_l_ = std::move(cur_l);
    prev_lb_ = std::move(cur_lb);
    last_t_ = tw.t;
  }

  void fill(EnergyReport& r) const {
    r.F2 = F2_;
    r.Fb2 = Fb2_;
    r.F2_truncated = F2_trunc_;
    r.Fb2_truncated = Fb2_trunc_;
  }

 private:
  std::vector<std::vector<double>> integrands(const DerivativeTower& tw, Side side,
                                              std::vector<bool>& trunc) const {
    const auto& params = side == Side::TL ? probes_.u : probes_.ub;
    std::vector<std::vector<double>> out(params.size(),
                                         std::vector<double>(std::size_t(N_ + 1), 0.0));
    const Grid1D& grid = tw.grid;
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double x = side == Side::TL ? tw.t - 2.0 * params[p] : 2.0 * params[p] - tw.t;
      if (x < grid.x0 || x > grid.x_end()) {
        trunc[p] = true;
        continue;
      }
      const NullPoint pt = null_coords(tw.t, x);
      const double lam = side == Side::TL ? weight_(pt.ub) : weight_(pt.u);
      const double a = stencil::interpolate(grid, tw.base_l(), x);
      const double b = stencil::interpolate(grid, tw.base_lb(), x);
      const double sg = std::sqrt(std::max(0.0, 1.0 - a * b));
      for (int order = 0; order <= N_; ++order) {
        double acc = 0.0;
        for (int k1 = 0; k1 <= order; ++k1) {
          const MultiIndex k{k1, order - k1};
          const double v = stencil::interpolate(grid, side == Side::TL ? tw.L(k) : tw.Lb(k), x);
          acc += v * v;
        }
        out[p][std::size_t(order)] = lam * acc * sg;
      }
    }
    return out;
  }

  ProbeSet probes_;
  int N_;
  Weight weight_;
  std::vector<std::vector<double>> F2_, Fb2_;
  std::vector<bool> F2_trunc_, Fb2_trunc_;
  std::vector<std::vector<double>> prev_l_, prev_lb_;
  std::optional<double> last_t_;
};

/// One energy identity: TL on the region right of x = t - 2 u0, or TLb on
/// the region left of x = 2 ub0 - t. Tracks
///   Sigma(t) + flux(t) - Sigma(0) + bulk(t),
/// which vanishes for exact solutions. Sigma integrates T(-Dt, xi) sqrt(g)
/// over the region's time slice, the flux integrates 2 T(-Du, xi) sqrt(g)
/// (resp. 2 T(-Dub, xi) sqrt(g)) along the boundary in t, and the bulk is the
/// space-time integral of d_a(sqrt(g) P^a).
struct BalanceSpec {
  Side side = Side::TL;
  double param = 0.0;  // u0 for TL, ub0 for TLb
  MultiIndex row{0, 0};
};

struct BalanceSample {
  double t = 0.0;
  double sigma = 0.0;
  double flux = 0.0;
  double bulk = 0.0;
  double residual = 0.0;
};

class BalanceTracker {
 public:
  BalanceTracker(BalanceSpec spec, Weight weight) : spec_(spec), weight_(weight) {}

  const BalanceSpec& spec() const { return spec_; }
  const std::vector<BalanceSample>& history() const { return history_; }
  bool truncated() const { return truncated_; }

  /// Largest |residual| relative to the initial Sigma.
  double max_residual() const {
    double r = 0.0;
    for (const auto& s : history_) r = std::max(r, std::abs(s.residual));
    return r;
  }

  void add(const DerivativeTower& tw) {
    const MultiIndex k = spec_.row;
    if (k.k1 + k.k2 + 1 > tw.N)
      throw ValidationError("energy balance needs the tower one order above the row");
    const Grid1D& grid = tw.grid;
    const std::size_t n = grid.n;
    const bool tl = spec_.side == Side::TL;
    const double s = tl ? tw.t - 2.0 * spec_.param : 2.0 * spec_.param - tw.t;
    const Direction dir = tl ? Direction::u : Direction::ub;

    std::vector<double> sigma_d(n), bulk_d(n), flux_d(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.x(i);
      const Jet phi = tw.base_jet(i);
      const Jet vphi = tw.row_jet(k, i);
      const Vec2 dv = vphi.d1();
      const MultiplierField m = multiplier_field(spec_.side, tw.t, x, phi, weight_);
      const Mat2 T = stress_tensor(phi, dv);
      const double sg = std::sqrt(determinant(phi));
      sigma_d[i] = contract(T, Direction::t, m.xi) * sg;
      flux_d[i] = 2.0 * contract(T, dir, m.xi) * sg;
      bulk_d[i] = divergence_density(spec_.side, tw.t, x, phi, vphi, weight_);
    }
    const auto sig = quad::half_line(grid, sigma_d, s, tl);
    const auto blk = quad::half_line(grid, bulk_d, s, tl);
    double fl = 0.0;
    if (s < grid.x0 || s > grid.x_end())
      truncated_ = true;
    else
      fl = stencil::interpolate(grid, flux_d, s);
    truncated_ = truncated_ || sig.truncated || blk.truncated;

    BalanceSample cur;
    cur.t = tw.t;
    cur.sigma = sig.value;
    if (history_.empty()) {
      sigma0_ = sig.value;
    } else {
      const BalanceSample& prev = history_.back();
      const double h = tw.t - prev.t;
      cur.flux = prev.flux + 0.5 * h * (last_flux_ + fl);
      cur.bulk = prev.bulk + 0.5 * h * (last_bulk_ + blk.value);
    }
    cur.residual = cur.sigma + cur.flux - sigma0_ + cur.bulk;
    last_flux_ = fl;
    last_bulk_ = blk.value;
    history_.push_back(cur);
  }

 private:
  BalanceSpec spec_;
  Weight weight_;
  std::vector<BalanceSample> history_;
  double sigma0_ = 0.0;
  double last_flux_ = 0.0;
  double last_bulk_ = 0.0;
  bool truncated_ = false;
};

struct DiagnosticsOptions {
  int N = 4;
  int time_order = 2;
  ProbeSet probes;
  std::vector<BalanceSpec> balances;
  int report_every = 1;  // keep every n-th report (the last one always)
};

struct RunResult {
  Grid1D grid;
  double dt = 0.0;
  std::vector<EnergyReport> reports;
  std::vector<BalanceTracker> balances;
  double max_speed = 0.0;
  double min_g = 1.0;
  std::optional<double> blowup_time;
  std::string blowup_reason;
  FieldState final_state;
};

/// Evolves with fixed dt = cfl * dx (the speeds never exceed 1) and runs
/// the diagnostics at every step. Levels before t = 0 come from backward
/// steps so the tower is centered from the start. `on_step`, if set, sees
/// every accepted forward level.
inline RunResult run_diagnostics(
    const Grid1D& grid, const FieldState& init, double t_end, const Weight& weight,
    const EvolverOptions& opt, const DiagnosticsOptions& dopt,
    const std::function<void(const FieldState&)>& on_step = {}) {
  RunResult res;
  res.grid = grid;
  const int steps = std::max(1, int(std::ceil(t_end / (opt.cfl * grid.dx) - 1e-9)));
  const double dt = t_end / steps;
  res.dt = dt;

  TowerWindow window(grid, dopt.N, dopt.time_order);
  const int r = window.radius();
  FluxAccumulator flux(dopt.probes, dopt.N, weight);
  for (const auto& b : dopt.balances) res.balances.emplace_back(b, weight);

  std::vector<FieldState> past;
  {
    FieldState s = init;
    for (int j = 0; j < r; ++j) {
      s = step_backward(grid, s, dt, opt);
      past.push_back(s);
    }
  }
  for (auto it = past.rbegin(); it != past.rend(); ++it) window.push(*it);

  const StateSummary s0 = summarize(init);
  res.max_speed = s0.max_speed;
  res.min_g = s0.min_g;
  int centered = 0;
  auto consume = [&] {
    const DerivativeTower tw = window.tower();
    EnergyReport rep = measure(tw, weight);
    flux.add(tw);
    flux.fill(rep);
    for (auto& b : res.balances) b.add(tw);
    const bool last = centered == steps;
    if (last || centered % std::max(1, dopt.report_every) == 0)
      res.reports.push_back(std::move(rep));
    ++centered;
  };

  FieldState cur = init;
  window.push(cur);
  if (on_step) on_step(cur);
  if (window.ready()) consume();
  // r extra steps past t_end keep the last tower centered.
  for (int n = 1; n <= steps + r; ++n) {
    try {
      cur = step_with_dt(grid, cur, dt, opt);
    } catch (const BlowupDetected& e) {
      if (n <= steps) {
        res.blowup_time = e.time();
        res.blowup_reason = e.reason();
        res.final_state = cur;
      }
      break;
    }
    cur.t = n * dt;
    if (n <= steps) {
      const StateSummary s = summarize(cur);
      res.max_speed = std::max(res.max_speed, s.max_speed);
      res.min_g = std::min(res.min_g, s.min_g);
      if (on_step) on_step(cur);
      if (n == steps) res.final_state = cur;
    }
    window.push(cur);
    if (window.ready() && centered <= steps) consume();
  }
  if (steps == 0) res.final_state = cur;
  return res;
}

}  // namespace stringlab
