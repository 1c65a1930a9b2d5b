#pragma once
// Null derivatives L d^k phi, Lb d^k phi of an evolved solution for all
// multi-indices k = (k1, k2), k1 + k2 <= N, at one time level.
//
// Rows with k1 = 0 are repeated fourth-order spatial derivatives of
// Lphi = w + p and Lbphi = w - p. Rows with k1 = 1 differentiate d_t Lphi
// and d_t Lbphi, which the equation gives in terms of spatial derivatives.
// Rows with k1 >= 2 take centered time differences of the k1 = 1 rows over
// stored levels.

#include <cmath>
#include <deque>
#include <vector>

#include "stringlab/data_gen.hpp"
#include "stringlab/evolver.hpp"
#include "stringlab/grid.hpp"
#include "stringlab/stress.hpp"

namespace stringlab {

/// Spatial derivative stacks of one stored level.
struct TowerLevel {
  double t = 0.0;
  std::vector<std::vector<double>> a, b;    // d_x^j (w + p), d_x^j (w - p), j <= N
  std::vector<std::vector<double>> at, bt;  // d_x^j d_t(w + p), d_t(w - p), j <= N - 1
};

inline TowerLevel make_tower_level(const Grid1D& grid, const FieldState& s,
                                   int N) {
  const std::size_t n = s.size();
  TowerLevel lev;
  lev.t = s.t;
  std::vector<double> a(n), b(n), at(n), bt(n);
  const Rhs r = rhs(grid, s, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = s.w[i] + s.p[i];
    b[i] = s.w[i] - s.p[i];
    at[i] = r.w_t[i] + r.p_t[i];
    bt[i] = r.w_t[i] - r.p_t[i];
  }
  auto stack = [&](std::vector<double> f, int depth) {
    std::vector<std::vector<double>> out;
    out.push_back(std::move(f));
    for (int j = 1; j <= depth; ++j) out.push_back(stencil::d1(out.back(), grid.dx));
    return out;
  };
  lev.a = stack(std::move(a), N);
  lev.b = stack(std::move(b), N);
  lev.at = stack(std::move(at), N - 1);
  lev.bt = stack(std::move(bt), N - 1);
  return lev;
}

struct DerivativeTower {
  double t = 0.0;
  int N = 0;
  Grid1D grid;
  std::vector<std::vector<double>> l, lb;  // [row_index][grid]

  const std::vector<double>& L(MultiIndex k) const { return l[row_index(N, k)]; }
  const std::vector<double>& Lb(MultiIndex k) const { return lb[row_index(N, k)]; }
  const std::vector<double>& base_l() const { return L({0, 0}); }
  const std::vector<double>& base_lb() const { return Lb({0, 0}); }

  /// Second-order jet of phi at grid index i (value left at zero).
  Jet base_jet(std::size_t i) const { return row_jet({0, 0}, i); }

  /// Jet of d^k phi at index i; needs k1 + k2 + 1 <= N.
  Jet row_jet(MultiIndex k, std::size_t i) const {
    return Jet::from_null(L(k)[i], Lb(k)[i], L({k.k1 + 1, k.k2})[i],
                          Lb({k.k1 + 1, k.k2})[i], L({k.k1, k.k2 + 1})[i],
                          Lb({k.k1, k.k2 + 1})[i]);
  }
};

/// Half-width of the time window needed for order-N towers.
inline int tower_radius(int N, int time_order = 2) {
  return N >= 2 ? stencil::central_radius(N - 1, time_order) : 0;
}

/// Builds the tower at the middle of `levels` (odd count, equal spacing).
inline DerivativeTower build_tower(const std::vector<const TowerLevel*>& levels,
                                   const Grid1D& grid, int N,
                                   int time_order = 2) {
  if (N < 1) throw ValidationError("tower order N must be at least 1");
  const int radius = tower_radius(N, time_order);
  if (levels.size() % 2 == 0 || int(levels.size()) < 2 * radius + 1)
    throw InsufficientHistory("tower of order " + std::to_string(N) +
                              " needs " + std::to_string(2 * radius + 1) +
                              " centered levels, got " +
                              std::to_string(levels.size()));
  const int c = int(levels.size()) / 2;
  double dt = 0.0;
  if (levels.size() > 1) {
    dt = levels[1]->t - levels[0]->t;
    for (std::size_t j = 1; j < levels.size(); ++j) {
      const double d = levels[j]->t - levels[j - 1]->t;
      if (std::abs(d - dt) > 1e-9 * std::abs(dt))
        throw InsufficientHistory("stored levels are not equally spaced in time");
    }
  }
  const TowerLevel& mid = *levels[std::size_t(c)];
  DerivativeTower tw;
  tw.t = mid.t;
  tw.N = N;
  tw.grid = grid;
  const std::size_t n = grid.n;
  tw.l.assign(row_count(N), std::vector<double>(n, 0.0));
  tw.lb.assign(row_count(N), std::vector<double>(n, 0.0));
  for (int k2 = 0; k2 <= N; ++k2) {
    tw.l[row_index(N, {0, k2})] = mid.a[std::size_t(k2)];
    tw.lb[row_index(N, {0, k2})] = mid.b[std::size_t(k2)];
  }
  for (int k2 = 0; k2 + 1 <= N; ++k2) {
    tw.l[row_index(N, {1, k2})] = mid.at[std::size_t(k2)];
    tw.lb[row_index(N, {1, k2})] = mid.bt[std::size_t(k2)];
  }
  for (int k1 = 2; k1 <= N; ++k1) {
    const int m = k1 - 1;
    const auto wts = stencil::central_weights(m, time_order);
    const int r = int(wts.size()) / 2;
    const double scale = 1.0 / std::pow(dt, m);
    for (int k2 = 0; k1 + k2 <= N; ++k2) {
      auto& outl = tw.l[row_index(N, {k1, k2})];
      auto& outlb = tw.lb[row_index(N, {k1, k2})];
      for (int j = -r; j <= r; ++j) {
        const double wj = wts[std::size_t(j + r)] * scale;
        if (wj == 0.0) continue;
        const TowerLevel& lv = *levels[std::size_t(c + j)];
        for (std::size_t i = 0; i < n; ++i) {
          outl[i] += wj * lv.at[std::size_t(k2)][i];
          outlb[i] += wj * lv.bt[std::size_t(k2)][i];
        }
      }
    }
  }
  return tw;
}

inline DerivativeTower build_tower(const std::vector<FieldState>& history,
                                   const Grid1D& grid, int N,
                                   int time_order = 2) {
  std::vector<TowerLevel> levels;
  for (const auto& s : history) levels.push_back(make_tower_level(grid, s, N));
  std::vector<const TowerLevel*> ptrs;
  for (const auto& l : levels) ptrs.push_back(&l);
  // Use the widest odd window centered in the history.
  return build_tower(ptrs, grid, N, time_order);
}

/// Sliding window of stored levels; yields the tower at the window center.
class TowerWindow {
 public:
  TowerWindow(Grid1D grid, int N, int time_order = 2)
      : grid_(grid), N_(N), order_(time_order),
        width_(std::size_t(2 * tower_radius(N, time_order) + 1)) {}

  std::size_t width() const { return width_; }
  int radius() const { return int(width_ / 2); }

  void push(const FieldState& s) {
    levels_.push_back(make_tower_level(grid_, s, N_));
    if (levels_.size() > width_) levels_.pop_front();
  }

  bool ready() const { return levels_.size() == width_; }

  DerivativeTower tower() const {
    std::vector<const TowerLevel*> ptrs;
    for (const auto& l : levels_) ptrs.push_back(&l);
    return build_tower(ptrs, grid_, N_, order_);
  }

 private:
  Grid1D grid_;
  int N_;
  int order_;
  std::size_t width_;
  std::deque<TowerLevel> levels_;
};

}  // namespace stringlab
