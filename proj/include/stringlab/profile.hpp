#pragma once
// Closed-form seed profiles with exact derivatives of any order.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stringlab/errors.hpp"

namespace stringlab {

enum class ProfileKind { gaussian, bump, polynomial_gaussian };

inline std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::bump: return "bump";
    case ProfileKind::polynomial_gaussian: return "polynomial-gaussian";
  }
  return "?";
}

inline ProfileKind parse_profile_kind(const std::string& s) {
  if (s == "gaussian") return ProfileKind::gaussian;
  if (s == "bump") return ProfileKind::bump;
  if (s == "polynomial-gaussian") return ProfileKind::polynomial_gaussian;
  throw ValidationError("unknown profile kind '" + s + "'");
}

/// h(x) = amplitude * shape((x - center) / width) where shape is
///   gaussian:            exp(-s^2)
///   bump:                exp(-1 / (1 - s^2)) on |s| < 1, zero outside
///   polynomial-gaussian: (c0 + c1 s + c2 s^2 + ...) exp(-s^2)
struct ProfileSpec {
  ProfileKind kind = ProfileKind::gaussian;
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;
  std::vector<double> coeffs{1.0};  // polynomial-gaussian only

  static ProfileSpec zero() { return {}; }

  static ProfileSpec gaussian(double amp, double c = 0.0, double w = 1.0) {
    return {ProfileKind::gaussian, amp, c, w, {1.0}};
  }
  static ProfileSpec bump(double amp, double c = 0.0, double w = 1.0) {
    return {ProfileKind::bump, amp, c, w, {1.0}};
  }
  static ProfileSpec poly_gaussian(double amp, std::vector<double> coeffs,
                                   double c = 0.0, double w = 1.0) {
    return {ProfileKind::polynomial_gaussian, amp, c, w, std::move(coeffs)};
  }

  bool is_zero() const {
    if (amplitude == 0.0) return true;
    if (kind == ProfileKind::polynomial_gaussian)
      return std::all_of(coeffs.begin(), coeffs.end(),
                         [](double c) { return c == 0.0; });
    return false;
  }

  /// Half-width beyond which |h^{(k)}| < 1e-14 * peak for the low orders
  /// used in practice. Exact for the bump.
  double support_radius() const {
    if (kind == ProfileKind::bump) return width;
    const double deg =
        kind == ProfileKind::polynomial_gaussian ? double(coeffs.size() - 1) : 0.0;
    // exp(-s^2) s^(deg + 12) < 1e-14 comfortably past s = 6 + deg / 2.
    return width * (6.5 + 0.5 * deg);
  }

  bool operator==(const ProfileSpec&) const = default;
};

namespace detail {

// Coefficients (in s) of the polynomial P_k with d^k/ds^k [P_0 e^{-s^2}] =
// P_k e^{-s^2}, using P_{k+1} = P_k' - 2 s P_k. For P_0 = 1 this is the
// Hermite recurrence, P_k = (-1)^k H_k.
inline std::vector<double> gaussian_poly_derivative(std::vector<double> p,
                                                    int k) {
  for (int n = 0; n < k; ++n) {
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t j = 1; j < p.size(); ++j) next[j - 1] += double(j) * p[j];
    for (std::size_t j = 0; j < p.size(); ++j) next[j + 1] -= 2.0 * p[j];
    p = std::move(next);
  }
  return p;
}

inline double horner(const std::vector<double>& p, double s) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * s + *it;
  return acc;
}

// d^m/ds^m of psi(s) = -1/(1 - s^2) = -(1/2) [1/(1-s) + 1/(1+s)].
inline double bump_log_derivative(int m, double s) {
  double fact = 1.0;
  for (int i = 2; i <= m; ++i) fact *= i;
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return -0.5 * fact *
         (1.0 / std::pow(1.0 - s, m + 1) + sign / std::pow(1.0 + s, m + 1));
}

// k-th derivative in s of exp(psi(s)) via h^{(n+1)} = sum_j C(n,j)
// psi^{(j+1)} h^{(n-j)}.
inline double bump_shape_derivative(int k, double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double h0 = std::exp(-1.0 / (1.0 - s * s));
  if (h0 == 0.0) return 0.0;
  std::vector<double> h(k + 1, 0.0), dpsi(k + 1, 0.0);
  h[0] = h0;
  for (int m = 1; m <= k; ++m) dpsi[m] = bump_log_derivative(m, s);
  for (int n = 0; n < k; ++n) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= n; ++j) {
      acc += binom * dpsi[j + 1] * h[n - j];
      binom = binom * double(n - j) / double(j + 1);
    }
    h[n + 1] = acc;
  }
  return h[k];
}

inline double moment_primitive(int n, double s) {
  // I_n(s) = int_0^s t^n e^{-t^2} dt
  // I_0 = sqrt(pi)/2 erf(s), I_1 = (1 - e^{-s^2}) / 2,
  // I_n = -(1/2) s^{n-1} e^{-s^2} + (n-1)/2 I_{n-2}.
  const double e = std::exp(-s * s);
  if (n == 0) return 0.5 * std::sqrt(std::numbers::pi) * std::erf(s);
  if (n == 1) return 0.5 * (1.0 - e);
  return -0.5 * std::pow(s, n - 1) * e +
         0.5 * double(n - 1) * moment_primitive(n - 2, s);
}

}  // namespace detail

/// Exact k-th derivative h^{(k)}(x).
inline double profile_derivative(const ProfileSpec& h, int k, double x) {
  if (h.amplitude == 0.0) return 0.0;
  const double s = (x - h.center) / h.width;
  const double scale = h.amplitude / std::pow(h.width, k);
  switch (h.kind) {
    case ProfileKind::gaussian: {
      const auto p = detail::gaussian_poly_derivative({1.0}, k);
      return scale * detail::horner(p, s) * std::exp(-s * s);
    }
    case ProfileKind::polynomial_gaussian: {
      const auto p = detail::gaussian_poly_derivative(h.coeffs, k);
      return scale * detail::horner(p, s) * std::exp(-s * s);
    }
    case ProfileKind::bump:
      return scale * detail::bump_shape_derivative(k, s);
  }
  return 0.0;
}

inline double profile_value(const ProfileSpec& h, double x) {
  return profile_derivative(h, 0, x);
}

/// int_{x_left}^{x} h(y) dy.
inline double profile_integral(const ProfileSpec& h, double x_left, double x) {
  if (h.is_zero()) return 0.0;
  switch (h.kind) {
    case ProfileKind::gaussian:
    case ProfileKind::polynomial_gaussian: {
      const double s0 = (x_left - h.center) / h.width;
      const double s1 = (x - h.center) / h.width;
      double acc = 0.0;
      for (std::size_t n = 0; n < h.coeffs.size(); ++n) {
        if (h.coeffs[n] == 0.0) continue;
        acc += h.coeffs[n] * (detail::moment_primitive(int(n), s1) -
                              detail::moment_primitive(int(n), s0));
      }
      return h.amplitude * h.width * acc;
    }
    case ProfileKind::bump: {
      // G(y) = int_{c-w}^{y} h, constant outside the support.
      auto primitive = [&](double y) {
        const double a = h.center - h.width;
        const double b = std::min(y, h.center + h.width);
        if (b <= a) return 0.0;
        auto f = [&](double z) { return profile_value(h, z); };
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            f, a, b, 15, 1e-14);
      };
      return primitive(x) - primitive(x_left);
    }
  }
  return 0.0;
}

}  // namespace stringlab
