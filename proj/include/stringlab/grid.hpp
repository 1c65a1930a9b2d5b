#pragma once
// Uniform grid, fourth-order stencils, dissipation and interpolation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "stringlab/errors.hpp"

namespace stringlab {

struct Grid1D {
  double x0 = -20.0;
  double dx = 0.02;
  std::size_t n = 2001;

  Grid1D() = default;
  Grid1D(double x0_, double dx_, std::size_t n_) : x0(x0_), dx(dx_), n(n_) {
    if (!(dx > 0.0)) throw ValidationError("grid spacing dx must be positive");
    if (n < 16) throw ValidationError("grid needs at least 16 samples");
  }

  /// Grid with n samples covering [lo, hi] inclusive.
  static Grid1D covering(double lo, double hi, std::size_t n) {
    return Grid1D(lo, (hi - lo) / double(n - 1), n);
  }

  double x(std::size_t i) const { return x0 + dx * double(i); }
  double x_end() const { return x(n - 1); }

  std::vector<double> points() const {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x(i);
    return xs;
  }

  bool operator==(const Grid1D&) const = default;
};

namespace stencil {

// Ghost values at both ends by 4-point (cubic) extrapolation.
inline void ghosts(std::span<const double> f, double g[4]) {
  const std::size_t n = f.size();
  const double gm1 = 4.0 * f[0] - 6.0 * f[1] + 4.0 * f[2] - f[3];
  const double gm2 = 4.0 * gm1 - 6.0 * f[0] + 4.0 * f[1] - f[2];
  const double gp1 = 4.0 * f[n - 1] - 6.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4];
  const double gp2 = 4.0 * gp1 - 6.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3];
  g[0] = gm2;
  g[1] = gm1;
  g[2] = gp1;
  g[3] = gp2;
}

/// Fourth-order centered first derivative; edges through extrapolated
/// ghost points.
inline void d1(std::span<const double> f, double dx, std::span<double> out) {
  const std::size_t n = f.size();
  double g[4];
  ghosts(f, g);
  auto at = [&](std::ptrdiff_t i) {
    if (i == -2) return g[0];
    if (i == -1) return g[1];
    if (i == std::ptrdiff_t(n)) return g[2];
    if (i == std::ptrdiff_t(n) + 1) return g[3];
    return f[std::size_t(i)];
  };
  const double c = 1.0 / (12.0 * dx);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = std::ptrdiff_t(i);
    if (i >= 2 && i + 2 < n)
      out[i] = c * (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]);
    else
      out[i] = c * (-at(k + 2) + 8.0 * at(k + 1) - 8.0 * at(k - 1) + at(k - 2));
  }
}

inline std::vector<double> d1(std::span<const double> f, double dx) {
  std::vector<double> out(f.size());
  d1(f, dx, out);
  return out;
}

/// Adds -eps / (16 dx) * (undivided fourth difference of f) to out.
inline void add_dissipation(std::span<const double> f, double dx, double eps,
                            std::span<double> out) {
  if (eps == 0.0) return;
  const std::size_t n = f.size();
  double g[4];
  ghosts(f, g);
  auto at = [&](std::ptrdiff_t i) {
    if (i == -2) return g[0];
    if (i == -1) return g[1];
    if (i == std::ptrdiff_t(n)) return g[2];
    if (i == std::ptrdiff_t(n) + 1) return g[3];
    return f[std::size_t(i)];
  };
  const double c = -eps / (16.0 * dx);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = std::ptrdiff_t(i);
    double d4;
    if (i >= 2 && i + 2 < n)
      d4 = f[i + 2] - 4.0 * f[i + 1] + 6.0 * f[i] - 4.0 * f[i - 1] + f[i - 2];
    else
      d4 = at(k + 2) - 4.0 * at(k + 1) + 6.0 * at(k) - 4.0 * at(k - 1) + at(k - 2);
    out[i] += c * d4;
  }
}

/// Four-point Lagrange interpolation at x. The stencil is clamped inside
/// the grid; callers check the domain themselves.
inline double interpolate(const Grid1D& grid, std::span<const double> f,
                          double x) {
  const double s = (x - grid.x0) / grid.dx;
  auto i = std::ptrdiff_t(std::floor(s)) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, std::ptrdiff_t(grid.n) - 4);
  const double r = s - double(i);  // position relative to node i, in [1,2]
  double acc = 0.0;
  for (int j = 0; j < 4; ++j) {
    double wj = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != j) wj *= (r - m) / double(j - m);
    acc += wj * f[std::size_t(i + j)];
  }
  return acc;
}

/// Fornberg weights for the m-th derivative at 0 on nodes `z`.
inline std::vector<double> fd_weights(std::span<const double> z, int m) {
  const std::size_t n = z.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(std::size_t(m) + 1, 0.0));
  double c1 = 1.0, c4 = z[0];
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(int(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = z[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = z[i] - z[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][std::size_t(m)];
  return w;
}

/// Half-width of the centered stencil used for an m-th derivative at the
/// given formal order (2 or 4).
inline int central_radius(int m, int order) {
  return (m + 1) / 2 + (order - 2) / 2;
}

/// Centered m-th derivative weights on offsets -r..r, unit spacing.
inline std::vector<double> central_weights(int m, int order) {
  const int r = central_radius(m, order);
  std::vector<double> z;
  for (int j = -r; j <= r; ++j) z.push_back(double(j));
  return fd_weights(z, m);
}

}  // namespace stencil
}  // namespace stringlab
