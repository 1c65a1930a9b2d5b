#pragma once
// Method-of-lines evolution of the first-order system
//   phi_t = w,
//   w_t   = (2 w p w_x - (w^2 - 1) p_x) / (1 + p^2),
//   p_t   = w_x,
// with fourth-order centered differences and classical Runge-Kutta.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stringlab/core_null.hpp"
#include "stringlab/data_gen.hpp"
#include "stringlab/grid.hpp"

namespace stringlab {

struct FieldState {
  double t = 0.0;
  std::vector<double> phi;
  std::vector<double> w;
  std::vector<double> p;

  std::size_t size() const { return w.size(); }
};

struct EvolverOptions {
  double cfl = 0.4;
  double eps_ko = 0.01;
  double gmin = kDefaultGmin;
  double max_gradient = 1e6;
};

/// Pointwise summary of a state.
struct StateSummary {
  double min_g = 1.0;
  double max_speed = 0.0;
  double max_abs_w = 0.0;
  double max_abs_p = 0.0;
  bool finite = true;
};

inline StateSummary summarize(const FieldState& s) {
  StateSummary r;
  r.min_g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = s.w[i], p = s.p[i];
    if (!std::isfinite(w) || !std::isfinite(p) || !std::isfinite(s.phi[i])) {
      r.finite = false;
      continue;
    }
    const double disc = 1.0 + p * p - w * w;
    r.min_g = std::min(r.min_g, disc);
    r.max_abs_w = std::max(r.max_abs_w, std::abs(w));
    r.max_abs_p = std::max(r.max_abs_p, std::abs(p));
    if (disc > 0.0) {
      const Speeds sp = eigenvalues(w, p);
      r.max_speed = std::max({r.max_speed, std::abs(sp.minus), std::abs(sp.plus)});
    }
  }
  return r;
}

/// Samples (F, G, F') of the family on the grid.
inline FieldState init_state(const InducedData& data, const Grid1D& grid) {
  FieldState s;
  s.t = 0.0;
  s.phi.resize(grid.n);
  s.w.resize(grid.n);
  s.p.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    s.phi[i] = data.F(x);
    s.w[i] = data.G(x);
    s.p[i] = data.dF(x);
    const double disc = 1.0 + s.p[i] * s.p[i] - s.w[i] * s.w[i];
    if (!(disc > 0.0)) throw HyperbolicityLoss(disc);
  }
  return s;
}

inline FieldState init_state(const DataFamily& fam, const Grid1D& grid) {
  return init_state(build_data(fam, grid.x0), grid);
}

struct Rhs {
  std::vector<double> phi_t, w_t, p_t;

  explicit Rhs(std::size_t n = 0) : phi_t(n), w_t(n), p_t(n) {}
};

/// d_t w from the principal part only (no dissipation) given spatial
/// derivatives.
inline double w_rate(double w, double p, double wx, double px) {
  return (2.0 * w * p * wx - (w * w - 1.0) * px) / (1.0 + p * p);
}

/// Semi-discrete right-hand side, with optional fourth-difference
/// dissipation on w and p.
inline void rhs(const Grid1D& grid, const FieldState& s, double eps_ko,
                Rhs& out) {
  const std::size_t n = s.size();
  out.phi_t.resize(n);
  out.w_t.resize(n);
  out.p_t.resize(n);
  std::vector<double> wx(n), px(n);
  stencil::d1(s.w, grid.dx, wx);
  stencil::d1(s.p, grid.dx, px);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = s.w[i], p = s.p[i];
    const double disc = 1.0 + p * p - w * w;
    if (!(disc > 0.0)) throw HyperbolicityLoss(disc);
    out.phi_t[i] = w;
    out.w_t[i] = w_rate(w, p, wx[i], px[i]);
    out.p_t[i] = wx[i];
  }
  stencil::add_dissipation(s.w, grid.dx, eps_ko, out.w_t);
  stencil::add_dissipation(s.p, grid.dx, eps_ko, out.p_t);
}

inline Rhs rhs(const Grid1D& grid, const FieldState& s, double eps_ko = 0.0) {
  Rhs r(s.size());
  rhs(grid, s, eps_ko, r);
  return r;
}

/// cfl * dx / max |lambda|; max |lambda| <= 1 on any timelike state.
inline double stable_dt(const Grid1D& grid, const FieldState& s, double cfl) {
  const double speed = summarize(s).max_speed;
  return cfl * grid.dx / (speed > 0.0 ? speed : 1.0);
}

namespace detail {

inline void axpy(const FieldState& base, const Rhs& k, double h, FieldState& out) {
  const std::size_t n = base.size();
  out.phi.resize(n);
  out.w.resize(n);
  out.p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.phi[i] = base.phi[i] + h * k.phi_t[i];
    out.w[i] = base.w[i] + h * k.w_t[i];
    out.p[i] = base.p[i] + h * k.p_t[i];
  }
  out.t = base.t + h;
}

inline std::optional<std::string> blowup_reason(const StateSummary& s,
                                                const EvolverOptions& opt) {
  if (!s.finite) return "non-finite values";
  if (!(s.min_g > opt.gmin)) return "min g = " + std::to_string(s.min_g) + " <= gmin";
  if (s.max_abs_w > opt.max_gradient || s.max_abs_p > opt.max_gradient)
    return "gradient exceeds " + std::to_string(opt.max_gradient);
  return std::nullopt;
}

}  // namespace detail

/// One classical Runge-Kutta step of size dt. Throws BlowupDetected if any
/// stage or the result leaves the timelike, finite regime.
inline FieldState step_with_dt(const Grid1D& grid, const FieldState& s,
                               double dt, const EvolverOptions& opt) {
  const std::size_t n = s.size();
  Rhs k1(n), k2(n), k3(n), k4(n);
  FieldState tmp;
  try {
    rhs(grid, s, opt.eps_ko, k1);
    detail::axpy(s, k1, 0.5 * dt, tmp);
    rhs(grid, tmp, opt.eps_ko, k2);
    detail::axpy(s, k2, 0.5 * dt, tmp);
    rhs(grid, tmp, opt.eps_ko, k3);
    detail::axpy(s, k3, dt, tmp);
    rhs(grid, tmp, opt.eps_ko, k4);
  } catch (const HyperbolicityLoss& e) {
    throw BlowupDetected(s.t, e.what());
  }
  FieldState out;
  out.t = s.t + dt;
  out.phi.resize(n);
  out.w.resize(n);
  out.p.resize(n);
  const double h6 = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.phi[i] = s.phi[i] + h6 * (k1.phi_t[i] + 2.0 * (k2.phi_t[i] + k3.phi_t[i]) + k4.phi_t[i]);
    out.w[i] = s.w[i] + h6 * (k1.w_t[i] + 2.0 * (k2.w_t[i] + k3.w_t[i]) + k4.w_t[i]);
    out.p[i] = s.p[i] + h6 * (k1.p_t[i] + 2.0 * (k2.p_t[i] + k3.p_t[i]) + k4.p_t[i]);
  }
  if (auto why = detail::blowup_reason(summarize(out), opt))
    throw BlowupDetected(s.t, *why);
  return out;
}

inline FieldState step(const Grid1D& grid, const FieldState& s,
                       const EvolverOptions& opt) {
  return step_with_dt(grid, s, stable_dt(grid, s, opt.cfl), opt);
}

/// t -> -t, w -> -w; maps solutions to solutions.
inline FieldState time_reflect(FieldState s) {
  s.t = -s.t;
  for (double& v : s.w) v = -v;
  return s;
}

/// x -> -x, p -> -p on a grid symmetric about the origin.
inline FieldState space_reflect(FieldState s) {
  std::reverse(s.phi.begin(), s.phi.end());
  std::reverse(s.w.begin(), s.w.end());
  std::reverse(s.p.begin(), s.p.end());
  for (double& v : s.p) v = -v;
  return s;
}

/// Step of size -dt, taken as a forward step of the time-reflected state so
/// the dissipation still damps.
inline FieldState step_backward(const Grid1D& grid, const FieldState& s,
                                double dt, const EvolverOptions& opt) {
  return time_reflect(step_with_dt(grid, time_reflect(s), dt, opt));
}

/// Owns the state of a single run; tracks the largest measured speed.
class Evolver {
 public:
  Evolver(Grid1D grid, FieldState init, EvolverOptions opt = {})
      : grid_(grid), state_(std::move(init)), opt_(opt) {
    const StateSummary s = summarize(state_);
    if (!(s.min_g > 0.0)) throw HyperbolicityLoss(s.min_g);
    max_speed_ = s.max_speed;
    min_g_ = s.min_g;
  }

  const Grid1D& grid() const { return grid_; }
  const FieldState& state() const { return state_; }
  const EvolverOptions& options() const { return opt_; }
  double max_speed_seen() const { return max_speed_; }
  double min_g_seen() const { return min_g_; }
  double next_dt() const { return stable_dt(grid_, state_, opt_.cfl); }

  /// Advances one step; on blow-up the state is left at the last valid step.
  double advance() { return advance(next_dt()); }

  double advance(double dt) {
    state_ = step_with_dt(grid_, state_, dt, opt_);
    const StateSummary s = summarize(state_);
    max_speed_ = std::max(max_speed_, s.max_speed);
    min_g_ = std::min(min_g_, s.min_g);
    return dt;
  }

 private:
  Grid1D grid_;
  FieldState state_;
  EvolverOptions opt_;
  double max_speed_ = 0.0;
  double min_g_ = 1.0;
};

/// The right-travelling solution phi = F(x - t) of a delta = 0 family.
struct TravellingValue {
  double phi = 0.0;
  double w = 0.0;
  double p = 0.0;
};

inline TravellingValue exact_travelling(const InducedData& data, double t,
                                        double x) {
  if (data.family().delta != 0.0)
    throw ValidationError("exact travelling wave requires delta = 0");
  const double xi = x - t;
  return {data.F(xi), -data.dF(xi), data.dF(xi)};
}

/// CSV snapshot with columns t,x,phi,w,p.
inline void write_field_csv(std::ostream& os, const Grid1D& grid,
                            const FieldState& s, bool header = true) {
  if (header) os << "t,x,phi,w,p\n";
  os.precision(17);
  for (std::size_t i = 0; i < s.size(); ++i)
    os << s.t << ',' << grid.x(i) << ',' << s.phi[i] << ',' << s.w[i] << ','
       << s.p[i] << '\n';
}

enum class Family { plus, minus };

struct CharPath {
  Family family = Family::plus;
  double seed_x = 0.0;
  std::vector<std::pair<double, double>> samples;  // (t, x)
  bool active = true;
};

/// Integrates dx/dt = lambda_family(w, p) along a run. Fields between two
/// accepted levels are interpolated linearly in time and cubically in space.
class CharacteristicTracer {
 public:
  CharacteristicTracer(const Grid1D& grid, Family family,
                       const std::vector<double>& seeds, double t0)
      : grid_(grid) {
    for (double s : seeds) {
      CharPath p;
      p.family = family;
      p.seed_x = s;
      p.samples.emplace_back(t0, s);
      paths_.push_back(std::move(p));
    }
    record_separation(t0);
  }

  const std::vector<CharPath>& paths() const { return paths_; }
  double min_separation() const { return min_sep_; }
  double min_separation_time() const { return min_sep_t_; }
  /// (t, min adjacent separation) after each update.
  const std::vector<std::pair<double, double>>& separation_history() const {
    return history_;
  }

  void update(const FieldState& from, const FieldState& to) {
    const double dt = to.t - from.t;
    for (auto& path : paths_) {
      if (!path.active) continue;
      const double x0 = path.samples.back().second;
      auto speed = [&](double theta, double x) {
        const double w = (1.0 - theta) * stencil::interpolate(grid_, from.w, x) +
                         theta * stencil::interpolate(grid_, to.w, x);
        const double p = (1.0 - theta) * stencil::interpolate(grid_, from.p, x) +
                         theta * stencil::interpolate(grid_, to.p, x);
        const Speeds s = eigenvalues(w, p);
        return path.family == Family::plus ? s.plus : s.minus;
      };
      try {
        const double k1 = speed(0.0, x0);
        const double k2 = speed(0.5, x0 + 0.5 * dt * k1);
        const double k3 = speed(0.5, x0 + 0.5 * dt * k2);
        const double k4 = speed(1.0, x0 + dt * k3);
        const double x1 = x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (x1 <= grid_.x(1) || x1 >= grid_.x(grid_.n - 2)) {
          path.active = false;
          continue;
        }
        path.samples.emplace_back(to.t, x1);
      } catch (const HyperbolicityLoss&) {
        path.active = false;
      }
    }
    record_separation(to.t);
  }

 private:
  void record_separation(double t) {
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < paths_.size(); ++i) {
      if (!paths_[i].active || !paths_[i + 1].active) continue;
      sep = std::min(sep, std::abs(paths_[i + 1].samples.back().second -
                                   paths_[i].samples.back().second));
    }
    history_.emplace_back(t, sep);
    if (sep < min_sep_) {
      min_sep_ = sep;
      min_sep_t_ = t;
    }
  }

  Grid1D grid_;
  std::vector<CharPath> paths_;
  std::vector<std::pair<double, double>> history_;
  double min_sep_ = std::numeric_limits<double>::infinity();
  double min_sep_t_ = 0.0;
};

}  // namespace stringlab
