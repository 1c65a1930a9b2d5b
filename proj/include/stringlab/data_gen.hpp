#pragma once
// Initial-data families, weighted data norms, the data-restricted
// characteristic speeds with the Kong-Tsuji ordering check, and the
// higher-order null traces of the solution on {t = 0}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stringlab/core_null.hpp"
#include "stringlab/profile.hpp"

namespace stringlab {

/// Data with G + F' = delta f and G - F' = fb.
struct DataFamily {
  double gamma = 0.5;
  double delta = 0.1;
  ProfileSpec f = ProfileSpec::gaussian(1.0);
  ProfileSpec fb = ProfileSpec::gaussian(1.0);

  void validate() const { Weight{gamma}; }

  /// Smallest and largest abscissa where either seed is non-negligible.
  std::pair<double, double> support() const {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto* h : {&f, &fb}) {
      if (h->is_zero()) continue;
      const double r = h->support_radius();
      lo = any ? std::min(lo, h->center - r) : h->center - r;
      hi = any ? std::max(hi, h->center + r) : h->center + r;
      any = true;
    }
    return {lo, hi};
  }
};

/// (F', G, F) induced by a family. F is pinned by F(x_left) = 0.
class InducedData {
 public:
  InducedData(DataFamily fam, double x_left)
      : fam_(std::move(fam)), x_left_(x_left) {}

  const DataFamily& family() const { return fam_; }
  double x_left() const { return x_left_; }

  /// k-th derivative of F' = (delta f - fb) / 2.
  double dF(double x, int k = 0) const {
    return 0.5 * (fam_.delta * profile_derivative(fam_.f, k, x) -
                  profile_derivative(fam_.fb, k, x));
  }
  /// k-th derivative of G = (delta f + fb) / 2.
  double G(double x, int k = 0) const {
    return 0.5 * (fam_.delta * profile_derivative(fam_.f, k, x) +
                  profile_derivative(fam_.fb, k, x));
  }
  double F(double x) const {
    return 0.5 * (fam_.delta * profile_integral(fam_.f, x_left_, x) -
                  profile_integral(fam_.fb, x_left_, x));
  }

 private:
  DataFamily fam_;
  double x_left_;
};

inline InducedData build_data(const DataFamily& fam, double x_left) {
  fam.validate();
  return InducedData(fam, x_left);
}

struct WeightedNormOptions {
  double truncation = 1e-14;  // relative to the peak integrand
  double max_radius = 1e4;    // NonIntegrable beyond this
};

/// int (1 + |x|)^{2 + 2 gamma} |h^{(k)}(x)|^2 dx for a single k.
inline double weighted_integral(const ProfileSpec& h, double gamma, int k,
                                const WeightedNormOptions& opt = {}) {
  if (h.is_zero()) return 0.0;
  auto integrand = [&](double x) {
    const double d = profile_derivative(h, k, x);
    return std::pow(1.0 + std::abs(x), 2.0 + 2.0 * gamma) * d * d;
  };
  const double step = 0.25 * h.width;
  double peak = 0.0;
  for (double s = -8.0; s <= 8.0; s += 1.0 / 64.0)
    peak = std::max(peak, integrand(h.center + s * h.width));
  if (peak == 0.0) return 0.0;

  // March outward until the integrand stays below the truncation level for
  // a full width.
  auto edge = [&](double dir) {
    double x = h.center;
    double quiet = 0.0;
    while (quiet < h.width) {
      x += dir * step;
      if (std::abs(x - h.center) > opt.max_radius)
        throw NonIntegrable("weighted integrand does not decay within radius " +
                            std::to_string(opt.max_radius));
      const double v = integrand(x);
      if (!std::isfinite(v))
        throw NonIntegrable("non-finite weighted integrand");
      quiet = (v < opt.truncation * peak) ? quiet + step : 0.0;
    }
    return x;
  };
  const double lo = edge(-1.0);
  const double hi = edge(+1.0);

  // Panels of one quarter width, split at the weight's kink at x = 0.
  std::vector<double> cuts;
  for (double x = lo; x < hi; x += step) cuts.push_back(x);
  cuts.push_back(hi);
  if (lo < 0.0 && hi > 0.0) {
    cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end());
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, cuts[i], cuts[i + 1], 10, 1e-13);
  }
  return total;
}

/// max over k <= k_max of the weighted integral.
inline double weighted_norm(const ProfileSpec& h, double gamma, int k_max,
                            const WeightedNormOptions& opt = {}) {
  Weight{gamma};
  double best = 0.0;
  for (int k = 0; k <= k_max; ++k)
    best = std::max(best, weighted_integral(h, gamma, k, opt));
  return best;
}

struct SampledSpeeds {
  std::vector<double> minus;
  std::vector<double> plus;
};

/// Characteristic speeds restricted to the data surface, per sample.
inline SampledSpeeds data_eigenvalues(std::span<const double> dF,
                                      std::span<const double> G) {
  SampledSpeeds out;
  out.minus.resize(dF.size());
  out.plus.resize(dF.size());
  for (std::size_t i = 0; i < dF.size(); ++i) {
    const Speeds s = eigenvalues(G[i], dF[i]);
    out.minus[i] = s.minus;
    out.plus[i] = s.plus;
  }
  return out;
}

inline SampledSpeeds data_eigenvalues(const InducedData& data,
                                      std::span<const double> xs) {
  std::vector<double> dF(xs.size()), G(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    dF[i] = data.dF(xs[i]);
    G[i] = data.G(xs[i]);
  }
  return data_eigenvalues(dF, G);
}

struct CriterionReport {
  std::vector<double> lambda_minus;
  std::vector<double> lambda_plus;
  double lam_star_lo = 0.0;
  double lam_star_hi = 0.0;
  double gap_min = 0.0;
  /// min over j of lambda_plus[j] - max_{i <= j} lambda_minus[i]
  double order_margin = 0.0;
  double threshold = 1e-10;
  bool pass = false;
};

/// Sampled Kong-Tsuji check: bounds, pointwise gap, and the ordering of
/// Lambda_-(x1) below Lambda_+(x2) for x1 <= x2, by a prefix-maximum scan.
inline CriterionReport check_kong_tsuji(std::vector<double> lambda_minus,
                                        std::vector<double> lambda_plus,
                                        double threshold = 1e-10) {
  CriterionReport r;
  r.threshold = threshold;
  const std::size_t n = std::min(lambda_minus.size(), lambda_plus.size());
  if (n > 0) {
    r.lam_star_lo = std::min(*std::min_element(lambda_minus.begin(), lambda_minus.begin() + n),
                             *std::min_element(lambda_plus.begin(), lambda_plus.begin() + n));
    r.lam_star_hi = std::max(*std::max_element(lambda_minus.begin(), lambda_minus.begin() + n),
                             *std::max_element(lambda_plus.begin(), lambda_plus.begin() + n));
    r.gap_min = lambda_plus[0] - lambda_minus[0];
    r.order_margin = r.gap_min;
    double prefix_max = lambda_minus[0];
    for (std::size_t j = 0; j < n; ++j) {
      prefix_max = std::max(prefix_max, lambda_minus[j]);
      r.gap_min = std::min(r.gap_min, lambda_plus[j] - lambda_minus[j]);
      r.order_margin = std::min(r.order_margin, lambda_plus[j] - prefix_max);
    }
  }
  r.pass = n > 0 && r.gap_min > threshold && r.order_margin > threshold;
  r.lambda_minus = std::move(lambda_minus);
  r.lambda_plus = std::move(lambda_plus);
  return r;
}

inline CriterionReport check_kong_tsuji(const SampledSpeeds& s,
                                        double threshold = 1e-10) {
  return check_kong_tsuji(s.minus, s.plus, threshold);
}

/// Multi-index (time derivatives, space derivatives).
struct MultiIndex {
  int k1 = 0;
  int k2 = 0;
  int order() const { return k1 + k2; }
  bool operator==(const MultiIndex&) const = default;
};

/// Rows indexed by multi-index (k1, k2) with k1 + k2 <= N, stored in the
/// order (0,0), (0,1), ..., (0,N), (1,0), ..., (N,0).
inline std::size_t row_index(int N, MultiIndex k) {
  // rows before level k1: sum_{j < k1} (N + 1 - j)
  return std::size_t(k.k1 * (N + 1) - k.k1 * (k.k1 - 1) / 2 + k.k2);
}

inline std::size_t row_count(int N) { return std::size_t((N + 1) * (N + 2) / 2); }

namespace detail {

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * std::uint64_t(n - k + i) / std::uint64_t(i);
  return r;
}

/// Pointwise trace induction. `l` and `lb` hold L d^k phi and Lb d^k phi per
/// row index; the k1 = 0 rows must be filled on entry. `llb` receives
/// L Lb d^k phi for rows with k1 + k2 <= N - 1. Returns the smallest
/// denominator 4 + (Lphi - Lbphi)^2 encountered.
inline double induce_rows(int N, std::vector<double>& l, std::vector<double>& lb,
                          std::vector<double>& llb) {
  const double a = l[row_index(N, {0, 0})];
  const double b = lb[row_index(N, {0, 0})];
  const double denom = 4.0 + (a - b) * (a - b);
  auto L = [&](int k1, int k2) { return l[row_index(N, {k1, k2})]; };
  auto Lb = [&](int k1, int k2) { return lb[row_index(N, {k1, k2})]; };
  for (int k1 = 0; k1 < N; ++k1) {
    for (int k2 = 0; k1 + k2 < N; ++k2) {
      // Leibniz expansion of the cubic terms; the c = k terms form the
      // principal part on the left.
      double rhs = 0.0;
      for (int c1 = 0; c1 <= k1; ++c1) {
        for (int c2 = 0; c2 <= k2; ++c2) {
          if (c1 == k1 && c2 == k2) continue;
          const double llb_c = llb[row_index(N, {c1, c2})];
          const double ll_c = L(c1 + 1, c2) + L(c1, c2 + 1);
          const double lblb_c = Lb(c1 + 1, c2) - Lb(c1, c2 + 1);
          const double cc = double(binomial(k1, c1) * binomial(k2, c2));
          for (int a1 = 0; a1 <= k1 - c1; ++a1) {
            for (int a2 = 0; a2 <= k2 - c2; ++a2) {
              const int b1 = k1 - c1 - a1, b2 = k2 - c2 - a2;
              const double m = cc * double(binomial(k1 - c1, a1) *
                                           binomial(k2 - c2, a2));
              rhs -= m * (-2.0 * L(a1, a2) * Lb(b1, b2) * llb_c +
                          Lb(a1, a2) * Lb(b1, b2) * ll_c +
                          L(a1, a2) * L(b1, b2) * lblb_c);
            }
          }
        }
      }
      const double x_l = L(k1, k2 + 1);
      const double x_lb = Lb(k1, k2 + 1);
      const double v = (rhs - 2.0 * b * b * x_l + 2.0 * a * a * x_lb) / denom;
      llb[row_index(N, {k1, k2})] = v;
      l[row_index(N, {k1 + 1, k2})] = v + x_l;
      lb[row_index(N, {k1 + 1, k2})] = v - x_lb;
    }
  }
  return denom;
}

}  // namespace detail

/// Null traces L d^k phi and Lb d^k phi on {t = 0} for all k1 + k2 <= N.
struct TraceTable {
  int N = 0;
  std::vector<double> x;
  std::vector<std::vector<double>> l;    // [row][grid]
  std::vector<std::vector<double>> lb;   // [row][grid]
  std::vector<std::vector<double>> llb;  // L Lb d^k phi, rows with order < N
  double min_denominator = 0.0;

  const std::vector<double>& L(MultiIndex k) const { return l[row_index(N, k)]; }
  const std::vector<double>& Lb(MultiIndex k) const { return lb[row_index(N, k)]; }

  /// CSV with columns x,k1,k2,L_trace,Lb_trace.
  void write_csv(std::ostream& os) const {
    os << "x,k1,k2,L_trace,Lb_trace\n";
    os.precision(17);
    for (int k1 = 0; k1 <= N; ++k1)
      for (int k2 = 0; k1 + k2 <= N; ++k2)
        for (std::size_t i = 0; i < x.size(); ++i)
          os << x[i] << ',' << k1 << ',' << k2 << ',' << L({k1, k2})[i] << ','
             << Lb({k1, k2})[i] << '\n';
  }
};

inline TraceTable higher_order_traces(const DataFamily& fam, int N,
                                      std::span<const double> xs) {
  if (N < 1 || N > 12) throw ValidationError("trace order N must lie in [1,12]");
  fam.validate();
  TraceTable t;
  t.N = N;
  t.x.assign(xs.begin(), xs.end());
  const std::size_t rows = row_count(N);
  t.l.assign(rows, std::vector<double>(xs.size(), 0.0));
  t.lb.assign(rows, std::vector<double>(xs.size(), 0.0));
  t.llb.assign(rows, std::vector<double>(xs.size(), 0.0));
  t.min_denominator = std::numeric_limits<double>::infinity();
  std::vector<double> l(rows), lb(rows), llb(rows);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::fill(l.begin(), l.end(), 0.0);
    std::fill(lb.begin(), lb.end(), 0.0);
    std::fill(llb.begin(), llb.end(), 0.0);
    for (int k2 = 0; k2 <= N; ++k2) {
      l[row_index(N, {0, k2})] = fam.delta * profile_derivative(fam.f, k2, xs[i]);
      lb[row_index(N, {0, k2})] = profile_derivative(fam.fb, k2, xs[i]);
    }
    t.min_denominator = std::min(t.min_denominator, detail::induce_rows(N, l, lb, llb));
    for (std::size_t r = 0; r < rows; ++r) {
      t.l[r][i] = l[r];
      t.lb[r][i] = lb[r];
      t.llb[r][i] = llb[r];
    }
  }
  return t;
}

}  // namespace stringlab
