#ifndef RMX_SPECTRAL_HPP_
#define RMX_SPECTRAL_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "rmx/eigensolver.hpp"
#include "rmx/ensembles.hpp"
#include "rmx/errors.hpp"

namespace rmx {

/// Sorted eigenvalue sequence together with its symmetry class.
struct Spectrum {
  std::vector<double> values;  // ascending
  int beta = 1;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }

  static Spectrum from_values(std::vector<double> v, int beta) {
    std::sort(v.begin(), v.end());
    return Spectrum{std::move(v), beta};
  }
};

inline Spectrum eigenvalues(const MatrixSample& sample) {
  if (sample.symmetry() == SymmetryClass::symmetric)
    return Spectrum{symmetric_eigenvalues(sample.real()), 1};
  return Spectrum{hermitian_eigenvalues(sample.complex()), 2};
}

inline double semicircle_density(double x) {
  return std::abs(x) >= 2.0 ? 0.0 : std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi);
}

/// Mass of the semicircle law on (-inf, x].
inline double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  const double v = 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) +
                   std::asin(0.5 * x) / std::numbers::pi;
  return std::clamp(v, 0.0, 1.0);
}

/// Semicircle quantile: the x with semicircle_cdf(x) = p.
///
/// With x = 2 sin(phi/2) the CDF is 1/2 + (phi + sin phi)/(2 pi), so the
/// root is found in phi, which stays well conditioned at the edges.
inline double semicircle_quantile(double p) {
  detail::require(p >= 0.0 && p <= 1.0, "semicircle_quantile: p must lie in [0, 1]");
  if (p == 0.0) return -2.0;
  if (p == 1.0) return 2.0;
  const double target = 2.0 * std::numbers::pi * (p - 0.5);
  double lo = -std::numbers::pi, hi = std::numbers::pi;
  double phi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double g = phi + std::sin(phi) - target;
    if (g > 0.0) hi = phi; else lo = phi;
    const double dg = 1.0 + std::cos(phi);
    double next = dg > 0.0 ? phi - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - phi) <= 1e-16 * (1.0 + std::abs(phi)) || hi - lo < 1e-16) {
      phi = next;
      break;
    }
    phi = next;
  }
  return 2.0 * std::sin(0.5 * phi);
}

/// Classical location gamma_k, defined by semicircle_cdf(gamma_k) = k/N.
inline double classical_location(std::size_t k, std::size_t n) {
  detail::require(n >= 1 && k >= 1 && k <= n, "classical_location: need 1 <= k <= N");
  if (k == n) return 2.0;
  if (2 * k == n) return 0.0;
  return semicircle_quantile(static_cast<double>(k) / static_cast<double>(n));
}

inline std::vector<double> classical_locations(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t k = 1; k <= n; ++k) g[k - 1] = classical_location(k, n);
  return g;
}

/// sqrt(z^2 - 4) on the branch with Im > 0 for Im z > 0, computed as
/// sqrt(z - 2) sqrt(z + 2) with principal roots. Real z is read as z + i0.
inline cplx sqrt_z2_minus_4(cplx z) {
  if (z.imag() == 0.0) {
    const double x = z.real();
    if (x >= 2.0) return {std::sqrt(x * x - 4.0), 0.0};
    if (x <= -2.0) return {-std::sqrt(x * x - 4.0), 0.0};
    return {0.0, std::sqrt(4.0 - x * x)};
  }
  return std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
}

/// Stieltjes transform of the semicircle law, m(z) = (-z + sqrt(z^2 - 4))/2.
inline cplx stieltjes_semicircle(cplx z) {
  if (z.imag() < 0.0) throw DomainError("stieltjes_semicircle: requires Im z >= 0");
  if (z.imag() == 0.0 && std::abs(z.real()) < 2.0)
    throw DomainError("stieltjes_semicircle: boundary value on [-2, 2] is ambiguous");
  // m * m' = 1 with m' = (-z - sqrt)/2; this form avoids cancellation for large |z|
  return -2.0 / (z + sqrt_z2_minus_4(z));
}

/// (1/N) sum_k 1/(lambda_k - z).
inline cplx stieltjes_empirical(std::span<const double> values, cplx z) {
  if (z.imag() == 0.0) throw DomainError("stieltjes_empirical: requires Im z != 0");
  cplx s = 0.0;
  for (double x : values) {
    const cplx d = x - z;
    if (std::abs(d) < 1e-300) throw DomainError("stieltjes_empirical: z collides with an eigenvalue");
    s += 1.0 / d;
  }
  return s / static_cast<double>(values.size());
}

inline cplx stieltjes_empirical(const Spectrum& s, cplx z) { return stieltjes_empirical(s.values, z); }

inline std::size_t khat(std::size_t k, std::size_t n) { return std::min(k, n + 1 - k); }

/// r_k = N^{2/3} khat^{1/3} |lambda_k - gamma_k| with khat = min(k, N+1-k).
inline std::vector<double> rigidity_profile(const Spectrum& s) {
  const std::size_t n = s.size();
  const double n23 = std::cbrt(static_cast<double>(n) * static_cast<double>(n));
  std::vector<double> r(n);
  for (std::size_t k = 1; k <= n; ++k)
    r[k - 1] = n23 * std::cbrt(static_cast<double>(khat(k, n))) *
               std::abs(s.values[k - 1] - classical_location(k, n));
  return r;
}

inline double rigidity_statistic(const Spectrum& s) {
  const auto r = rigidity_profile(s);
  return *std::max_element(r.begin(), r.end());
}

}  // namespace rmx

#endif  // RMX_SPECTRAL_HPP_
