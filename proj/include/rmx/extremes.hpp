#ifndef RMX_EXTREMES_HPP_
#define RMX_EXTREMES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rmx/errors.hpp"
#include "rmx/quadrature.hpp"
#include "rmx/spectral.hpp"
#include "rmx/stats.hpp"

namespace rmx {

/// Closed interval [lo, hi]. lo == hi is allowed and has zero length.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  void validate(const char* what) const {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi))
      throw DomainError(std::string(what) + ": interval must satisfy lo <= hi");
  }
};

/// One point of the small-gap process: the rescaled gap N^{(b+2)/(b+1)}(l_{i+1} - l_i)
/// at location l_i. `index` is the 1-based i.
struct GapPoint {
  double rescaled_gap = 0.0;
  double location = 0.0;
  std::size_t index = 0;
};

inline double gap_exponent(int beta) {
  detail::require(beta == 1 || beta == 2, "gap exponent: beta must be 1 or 2");
  return (beta + 2.0) / (beta + 1.0);
}

inline std::vector<GapPoint> gap_process(const Spectrum& s, double kappa) {
  detail::require(kappa > 0.0 && kappa < 2.0, "gap_process: kappa must lie in (0, 2)");
  const double scale = std::pow(static_cast<double>(s.size()), gap_exponent(s.beta));
  std::vector<GapPoint> out;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (!(std::abs(s[i]) < 2.0 - kappa)) continue;
    const double g = s[i + 1] - s[i];
    if (g > 0.0) out.push_back({scale * g, s[i], i + 1});
  }
  return out;
}

/// Number of points of the gap process with rescaled gap in A and location in I.
inline std::size_t count_points(std::span<const GapPoint> points, const Interval& a, const Interval& i) {
  std::size_t n = 0;
  for (const auto& p : points)
    if (a.contains(p.rescaled_gap) && i.contains(p.location)) ++n;
  return n;
}

namespace detail {

// Gaps l_{i+1} - l_i with l_i in I, sorted ascending by (gap, index).
inline std::vector<std::pair<double, std::size_t>> gaps_in(const Spectrum& s, const Interval& iv) {
  std::vector<std::pair<double, std::size_t>> g;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (iv.contains(s[i])) g.emplace_back(s[i + 1] - s[i], i);
  std::sort(g.begin(), g.end());
  return g;
}

inline void require_bulk_interval(const Interval& iv, const char* what) {
  iv.validate(what);
  if (!(iv.lo > -2.0 && iv.hi < 2.0 && iv.lo < iv.hi))
    throw DomainError(std::string(what) + ": interval must be a nondegenerate subset of (-2, 2)");
}

}  // namespace detail

/// Integral over I of (4 - x^2)^{3/2} (beta 1) or (4 - x^2)^2 (beta 2).
inline double edge_weight_integral(const Interval& iv, int beta) {
  detail::require(beta == 1 || beta == 2, "edge_weight_integral: beta must be 1 or 2");
  const double lo = std::max(iv.lo, -2.0), hi = std::min(iv.hi, 2.0);
  if (!(lo < hi)) return 0.0;
  if (beta == 1)
    return integrate([](double x) { return std::pow(std::max(0.0, 4.0 - x * x), 1.5); }, lo, hi, 1e-10).value;
  return integrate([](double x) { return (4.0 - x * x) * (4.0 - x * x); }, lo, hi, 1e-10).value;
}

/// Normalization of the k-th smallest gap:
/// beta 1: (int_I (4-x^2)^{3/2} / (96 pi))^{1/2} N^{3/2}; beta 2: (int_I (4-x^2)^2 / (144 pi^2))^{1/3} N^{4/3}.
inline double smallest_gap_scale(const Interval& iv, std::size_t n, int beta) {
  const double pi = std::numbers::pi;
  const double nn = static_cast<double>(n);
  if (beta == 1) return std::sqrt(edge_weight_integral(iv, 1) / (96.0 * pi)) * std::pow(nn, 1.5);
  return std::cbrt(edge_weight_integral(iv, 2) / (144.0 * pi * pi)) * std::pow(nn, 4.0 / 3.0);
}

/// tau_k: the k-th smallest gap among {l_{i+1} - l_i : l_i in I}, rescaled.
/// The class is taken from the spectrum.
inline double k_smallest_rescaled(const Spectrum& s, const Interval& iv, std::size_t k) {
  detail::require_bulk_interval(iv, "k_smallest_rescaled");
  detail::require(k >= 1, "k_smallest_rescaled: k must be at least 1");
  const auto g = detail::gaps_in(s, iv);
  if (g.size() < k)
    throw DomainError("k_smallest_rescaled: only " + std::to_string(g.size()) + " gaps in I, need " +
                      std::to_string(k));
  return smallest_gap_scale(iv, s.size(), s.beta) * g[k - 1].first;
}

/// P(tau_k <= x) = 1 - e^{-x^p} sum_{j<k} x^{pj}/j!, p = beta + 1.
inline double limit_cdf_smallest(std::size_t k, int beta, double x) {
  detail::require(k >= 1, "limit_cdf_smallest: k must be at least 1");
  detail::require(beta == 1 || beta == 2, "limit_cdf_smallest: beta must be 1 or 2");
  if (!(x > 0.0)) return 0.0;
  const double y = std::pow(x, beta + 1);
  double term = 1.0, sum = 1.0;
  for (std::size_t j = 1; j < k; ++j) {
    term *= y / static_cast<double>(j);
    sum += term;
  }
  return std::clamp(1.0 - std::exp(-y) * sum, 0.0, 1.0);
}

/// Limit density of tau_k: (p/(k-1)!) x^{pk-1} e^{-x^p}, p = beta + 1.
inline double limit_density_smallest(std::size_t k, int beta, double x) {
  detail::require(k >= 1 && (beta == 1 || beta == 2), "limit_density_smallest: bad k or beta");
  if (!(x > 0.0)) return 0.0;
  const double p = beta + 1.0;
  const double kk = static_cast<double>(k);
  return p * std::exp((p * kk - 1.0) * std::log(x) - std::pow(x, p) - std::lgamma(kk));
}

/// zeta'(-1) = 1/12 - log A. log A comes from the functional equation
/// log A = (gamma + log 2 pi)/12 - zeta'(2)/(2 pi^2), with
/// zeta'(2) = -sum log n / n^2 summed by Euler-Maclaurin.
inline double zeta_prime_minus_one() {
  using R = long double;
  constexpr int m = 40;
  R sum = 0;
  for (int n = 2; n < m; ++n) sum += std::log(R(n)) / (R(n) * R(n));
  const R x = m, lx = std::log(x);
  // tail sum_{n >= m} f(n), f(x) = log x / x^2
  R tail = (lx + 1) / x + lx / (x * x) / 2;
  const R d1 = (1 - 2 * lx) / (x * x * x);
  const R d3 = (26 - 24 * lx) / std::pow(x, R(5));
  const R d5 = (1044 - 720 * lx) / std::pow(x, R(7));
  const R d7 = (69264 - 40320 * lx) / std::pow(x, R(9));
  tail -= R(1) / 12 * d1 - R(1) / 720 * d3 + R(1) / 30240 * d5 - R(1) / 1209600 * d7;
  const R zeta2_prime = -(sum + tail);
  const R pi = std::numbers::pi_v<long double>;
  const R euler_gamma = std::numbers::egamma_v<long double>;
  const R log_a = (euler_gamma + std::log(2 * pi)) / 12 - zeta2_prime / (2 * pi * pi);
  return static_cast<double>(R(1) / 12 - log_a);
}

/// log of the Glaisher-Kinkelin constant.
inline double log_glaisher() { return 1.0 / 12.0 - zeta_prime_minus_one(); }

/// S(I) = inf_I sqrt(4 - x^2).
inline double edge_factor(const Interval& iv) {
  detail::require_bulk_interval(iv, "edge_factor");
  const double m = std::max(std::abs(iv.lo), std::abs(iv.hi));
  return std::sqrt(4.0 - m * m);
}

/// Centering constant of the largest-gap Gumbel law. The endpoints are
/// oriented so that |a| <= |b|.
inline double gumbel_constant(const Interval& iv) {
  detail::require_bulk_interval(iv, "gumbel_constant");
  double a = iv.lo, b = iv.hi;
  if (std::abs(a) > std::abs(b)) std::swap(a, b);
  if (b == 0.0) throw DomainError("gumbel_constant: |b| = 0 makes log(4|b|) singular");
  const double ln2 = std::numbers::ln2;
  double c = ln2 / 12.0 + 3.0 * zeta_prime_minus_one() + 1.5 * std::log(4.0 - b * b) - std::log(4.0 * std::abs(b));
  if (a == -b) c += ln2;
  return c;
}

/// tau*_k = (2 log N)^{1/2} (N S(I) t*_k - (32 log N)^{1/2}) / 4 + (5/8) log(2 log N)
/// for a raw gap t*_k.
inline double rescale_largest_gap(double gap, std::size_t n, const Interval& iv) {
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);
  return std::sqrt(2.0 * ln) * (nn * edge_factor(iv) * gap - std::sqrt(32.0 * ln)) / 4.0 +
         0.625 * std::log(2.0 * ln);
}

/// tau*_k from the k-th largest gap with l_i in I. Hermitian class only.
inline double k_largest_rescaled(const Spectrum& s, const Interval& iv, std::size_t k) {
  if (s.beta != 2)
    throw DomainError("k_largest_rescaled: the Gumbel limit is only established for the hermitian class");
  detail::require_bulk_interval(iv, "k_largest_rescaled");
  detail::require(k >= 1, "k_largest_rescaled: k must be at least 1");
  const auto g = detail::gaps_in(s, iv);
  if (g.size() < k)
    throw DomainError("k_largest_rescaled: only " + std::to_string(g.size()) + " gaps in I, need " +
                      std::to_string(k));
  return rescale_largest_gap(g[g.size() - k].first, s.size(), iv);
}

/// P(tau*_k <= x) = e^{-y} sum_{j<k} y^j/j!, y = e^{c - x}.
inline double limit_cdf_largest(std::size_t k, double c, double x) {
  detail::require(k >= 1, "limit_cdf_largest: k must be at least 1");
  const double y = std::exp(c - x);
  if (!std::isfinite(y)) return 0.0;
  double term = 1.0, sum = 1.0;
  for (std::size_t j = 1; j < k; ++j) {
    term *= y / static_cast<double>(j);
    sum += term;
  }
  return std::clamp(std::exp(-y) * sum, 0.0, 1.0);
}

inline double limit_density_largest(std::size_t k, double c, double x) {
  const double kk = static_cast<double>(k);
  return std::exp(kk * (c - x) - std::exp(c - x) - std::lgamma(kk));
}

/// Expected number of points of the gap process in A x I.
inline double intensity(const Interval& a, const Interval& i, int beta) {
  a.validate("intensity");
  i.validate("intensity");
  detail::require(a.lo >= 0.0, "intensity: A must lie in [0, inf)");
  if (a.length() == 0.0 || i.length() == 0.0) return 0.0;
  const double pi = std::numbers::pi;
  if (beta == 1) {
    const double ua = 0.5 * (a.hi * a.hi - a.lo * a.lo);
    return ua * edge_weight_integral(i, 1) / (48.0 * pi);
  }
  detail::require(beta == 2, "intensity: beta must be 1 or 2");
  const double ua = (a.hi * a.hi * a.hi - a.lo * a.lo * a.lo) / 3.0;
  return ua * edge_weight_integral(i, 2) / (48.0 * pi * pi);
}

struct KsResult {
  double distance = 0.0;
  double location = 0.0;    // where the supremum is attained
  double reference = 0.0;   // reference CDF at that point
  double stderr_binomial = 0.0;  // sqrt(F(1 - F)/n) at that point
};

/// One-sample Kolmogorov distance against a continuous CDF.
inline KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
  detail::require(!samples.empty(), "ks_distance: empty sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  KsResult r;
  r.distance = -1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    const double d = std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n);
    if (d > r.distance) {
      r.distance = d;
      r.location = x[i];
      r.reference = f;
    }
  }
  r.stderr_binomial = std::sqrt(std::max(r.reference * (1.0 - r.reference), 1.0 / n) / n);
  return r;
}

inline double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  return ks_test(samples, cdf).distance;
}

/// Two-sample Kolmogorov distance between empirical CDFs.
inline double ks_distance(std::span<const double> xs, std::span<const double> ys) {
  detail::require(!xs.empty() && !ys.empty(), "ks_distance: empty sample");
  std::vector<double> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() || j < b.size()) {
    const double v = j == b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// First Wasserstein distance between empirical laws, int |F - G|.
inline double w1_distance(std::span<const double> xs, std::span<const double> ys) {
  detail::require(!xs.empty() && !ys.empty(), "w1_distance: empty sample");
  std::vector<double> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
  }
  // |F - G| is piecewise constant between merged jump points
  std::vector<double> pts;
  pts.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(pts));
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double s = 0.0;
  std::size_t i = 0, j = 0;
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    while (i < a.size() && a[i] <= pts[p]) ++i;
    while (j < b.size() && b[j] <= pts[p]) ++j;
    s += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (pts[p + 1] - pts[p]);
  }
  return s;
}

struct Dispersion {
  double mean = 0.0;
  double variance = 0.0;
  double ratio = 0.0;  // variance / mean; 0 when the variance is 0
};

inline Dispersion poisson_dispersion(std::span<const std::int64_t> counts) {
  detail::require(counts.size() >= 2, "poisson_dispersion: need at least two counts");
  std::vector<double> v;
  v.reserve(counts.size());
  for (auto c : counts) {
    detail::require(c >= 0, "poisson_dispersion: counts must be nonnegative");
    v.push_back(static_cast<double>(c));
  }
  Dispersion d;
  d.mean = mean(v);
  d.variance = variance(v);
  if (d.variance == 0.0) return d;
  detail::require(d.mean > 0.0, "poisson_dispersion: zero mean with nonzero variance");
  d.ratio = d.variance / d.mean;
  return d;
}

enum class Edge { lower, upper };

/// c = (3/2)^{1/3} pi beta^{1/2}
inline double edge_fluctuation_constant(int beta) {
  return std::cbrt(1.5) * std::numbers::pi * std::sqrt(static_cast<double>(beta));
}

/// X_i = c (l_i - g_i) / ((log i)^{1/2} N^{-2/3} i^{-1/3}), i counted from the
/// chosen edge; the upper edge is handled by reflecting the spectrum.
inline double edge_fluctuation(const Spectrum& s, std::size_t i, Edge edge = Edge::lower) {
  const std::size_t n = s.size();
  if (i == 1) throw DomainError("edge_fluctuation: i = 1 gives log i = 0");
  detail::require(i >= 2 && 2 * i <= n, "edge_fluctuation: need 2 <= i <= N/2");
  const double nn = static_cast<double>(n), ii = static_cast<double>(i);
  const double lam = edge == Edge::lower ? s[i - 1] : -s[n - i];
  const double gam = classical_location(i, n);
  const double scale = std::sqrt(std::log(ii)) * std::pow(nn, -2.0 / 3.0) * std::pow(ii, -1.0 / 3.0);
  return edge_fluctuation_constant(s.beta) * (lam - gam) / scale;
}

}  // namespace rmx

#endif  // RMX_EXTREMES_HPP_
