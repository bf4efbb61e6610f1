#ifndef RMX_OBSERVABLE_HPP_
#define RMX_OBSERVABLE_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "rmx/errors.hpp"
#include "rmx/spectral.hpp"
#include "rmx/trajectory.hpp"

namespace rmx {

/// Characteristic of the advection equation d_t h = (sqrt(z^2-4)/2) d_z h:
/// z_t = (e^{t/2}(z + sqrt(z^2-4)) + e^{-t/2}(z - sqrt(z^2-4)))/2.
/// Real z is read as z + i0, so points of (-2, 2) map into the upper half plane.
inline cplx characteristic(cplx z, double t) {
  if (z.imag() < 0.0) throw DomainError("characteristic: requires Im z >= 0");
  detail::require(std::isfinite(t) && t >= 0.0, "characteristic: t must be nonnegative");
  if (t == 0.0) return z;
  const cplx s = sqrt_z2_minus_4(z);
  const double up = std::exp(0.5 * t), down = std::exp(-0.5 * t);
  return 0.5 * (up * (z + s) + down * (z - s));
}

/// kappa(z) = min(|z - 2|, |z + 2|).
inline double edge_distance(cplx z) { return std::min(std::abs(z - 2.0), std::abs(z + 2.0)); }

/// a(z) = dist(z, [-2, 2]).
inline double dist_to_support(cplx z) {
  const double x = std::clamp(z.real(), -2.0, 2.0);
  return std::abs(z - x);
}

/// b(z) = dist(z, R \ [-2, 2]).
inline double dist_to_outside(cplx z) {
  if (std::abs(z.real()) >= 2.0) return std::abs(z.imag());
  return edge_distance(z);
}

/// f_t(z) = e^{-t/2} sum_k w_k / (x_k - z).
struct ObservableEval {
  cplx value;
  cplx z;
  double t = 0.0;
};

inline ObservableEval evaluate_f(std::span<const double> positions, std::span<const double> weights,
                                 cplx z, double t) {
  detail::require(positions.size() == weights.size(), "evaluate_f: positions and weights differ in length");
  if (z.imag() == 0.0) throw DomainError("evaluate_f: requires Im z != 0");
  cplx s = 0.0;
  for (std::size_t k = 0; k < positions.size(); ++k) s += weights[k] / (positions[k] - z);
  return {std::exp(-0.5 * t) * s, z, t};
}

/// f-tilde: the same sum with |weights|.
inline ObservableEval evaluate_f_abs(std::span<const double> positions, std::span<const double> weights,
                                     cplx z, double t) {
  std::vector<double> a(weights.size());
  std::transform(weights.begin(), weights.end(), a.begin(), [](double w) { return std::abs(w); });
  return evaluate_f(positions, a, z, t);
}

enum class DiffusionCoefficient {
  exact,    // (1/(2N)) (2/beta - 1), what the term-by-term expansion yields
  printed,  // (1/N) (2/beta - 1); agrees with `exact` only at beta = 2
};

/// Both sides of the deterministic drift of df_t.
struct DriftIdentity {
  cplx assembled;  // -f/2 + e^{-t/2} sum d_t u_k/(x_k - z) + (II) + (III) + (IV)
  cplx closed;     // (s(z) + z/2) d_z f + coefficient * d_zz f
  double scale;    // sum of the magnitudes of the assembled terms
  double residual() const { return std::abs(assembled - closed); }
  double relative_residual() const { return scale > 0.0 ? residual() / scale : residual(); }
};

/// Expands the drift of df_t term by term for weights u_k evolving by
/// d_t u_k = sum_{l != k} (u_l - u_k) / (N (x_k - x_l)^2) and positions
/// following the beta-DBM, then compares with the advection closed form.
inline DriftIdentity drift_identity(std::span<const double> x, std::span<const double> u, cplx z,
                                    double t, double beta,
                                    DiffusionCoefficient coefficient = DiffusionCoefficient::exact) {
  const std::size_t n = x.size();
  detail::require(n >= 1 && u.size() == n, "drift_identity: positions and weights differ in length");
  if (z.imag() == 0.0) throw DomainError("drift_identity: requires Im z != 0");
  detail::require(beta > 0.0, "drift_identity: beta must be positive");
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l)
      if (x[k] == x[l]) throw DomainError("drift_identity: coincident positions");
  const double nn = static_cast<double>(n);
  const double e = std::exp(-0.5 * t);

  cplx f = 0.0, fz = 0.0, fzz = 0.0, s = 0.0;
  cplx pairs = 0.0, iii = 0.0, iv = 0.0;
  double pair_mag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx a = x[k] - z;
    const cplx d1 = 1.0 / a, d2 = d1 * d1, d3 = d2 * d1;
    f += u[k] * d1;
    fz += u[k] * d2;
    fzz += u[k] * d3;
    s += d1;
    iii += u[k] * x[k] * d2;
    iv += u[k] * d3;
    // The weight flow and the interaction term of a pair (k, l) each carry
    // 1/(x_k - x_l)^2; together they reduce to u_k/(a^2 b) + u_l/(a b^2).
    for (std::size_t l = k + 1; l < n; ++l) {
      const cplx b1 = 1.0 / (x[l] - z);
      const cplx p = d1 * b1 * (u[k] * d1 + u[l] * b1);
      pairs += p;
      pair_mag += std::abs(p);
    }
  }
  f *= e;
  fz *= e;
  fzz *= 2.0 * e;
  s /= nn;
  pairs *= e / nn;
  iii *= 0.5 * e;
  iv *= 2.0 * e / (beta * nn);
  const double mag = 0.5 * std::abs(f) + e / nn * pair_mag + std::abs(iii) + std::abs(iv);

  const double diff = coefficient == DiffusionCoefficient::exact ? (2.0 / beta - 1.0) / (2.0 * nn)
                                                                  : (2.0 / beta - 1.0) / nn;
  DriftIdentity out;
  out.assembled = -0.5 * f + pairs + iii + iv;
  out.closed = (s + 0.5 * z) * fz + diff * fzz;
  out.scale = mag;
  return out;
}

/// |assembled drift - closed form|; pure rounding noise for the exact coefficient.
inline double drift_identity_residual(std::span<const double> x, std::span<const double> u, cplx z,
                                      double t, double beta) {
  return drift_identity(x, u, z, t, beta).residual();
}

struct BulkWindow {
  double kappa = 0.1;   // |Re z| < 2 - kappa
  double c = 1.0;       // Im z > c / N
};

namespace detail {

inline void coupled_fields_at(const CoupledTrajectory& traj, std::size_t idx, std::vector<double>& x,
                              std::vector<double>& delta) {
  const auto& lam = traj.lambda[idx].values;
  const auto& mu = traj.mu[idx].values;
  const double g = std::exp(0.5 * traj.times[idx]);
  x.resize(lam.size());
  delta.resize(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k) {
    // midpoint of the two flows stands in for the nu-integrated positions
    x[k] = 0.5 * (lam[k] + mu[k]);
    delta[k] = g * (lam[k] - mu[k]);
  }
}

}  // namespace detail

/// N Im z |f_t(z) - f_0(z_t)| with weights delta_k(s) = e^{s/2}(lambda_k(s) - mu_k(s)).
inline double advection_residual(const CoupledTrajectory& traj, cplx z, double t,
                                 BulkWindow window = {}) {
  const double nn = static_cast<double>(traj.n());
  if (!(std::abs(z.real()) < 2.0 - window.kappa) || !(z.imag() > window.c / nn) || !(z.imag() < 1.0))
    throw DomainError("advection_residual: z outside the bulk window");
  detail::require(t >= 0.0 && t < 1.0, "advection_residual: t must lie in [0, 1)");
  std::vector<double> x0, d0, xt, dt;
  detail::coupled_fields_at(traj, traj.index_of(0.0), x0, d0);
  detail::coupled_fields_at(traj, traj.index_of(t), xt, dt);
  const cplx ft = evaluate_f(xt, dt, z, t).value;
  const cplx f0 = evaluate_f(x0, d0, characteristic(z, t), 0.0).value;
  return nn * z.imag() * std::abs(ft - f0);
}

struct EdgeBoundResult {
  double statistic;      // Im f-tilde_t(z) / normalization
  double normalization;  // kappa^{1/2} / max(kappa^{1/2}, t)
  cplx z;
};

/// Im f-tilde_t at z = E + i w^2 / (N kappa(E)^{1/2}), divided by
/// kappa(E)^{1/2} / max(kappa(E)^{1/2}, t). w stands in for the polylog factor.
inline EdgeBoundResult edge_bound_statistic(const CoupledTrajectory& traj, double energy, double t,
                                            double w = 2.0, double c_kappa = 1.0) {
  detail::require(std::abs(energy) < 2.0, "edge_bound_statistic: need |E| < 2");
  const double nn = static_cast<double>(traj.n());
  const double kappa = 2.0 - std::abs(energy);
  if (kappa <= c_kappa * std::pow(nn, -2.0 / 3.0))
    throw DomainError("edge_bound_statistic: kappa(E) below c N^{-2/3}");
  const double rk = std::sqrt(kappa);
  const cplx z(energy, w * w / (nn * rk));
  std::vector<double> x, delta;
  detail::coupled_fields_at(traj, traj.index_of(t), x, delta);
  const double im = evaluate_f_abs(x, delta, z, t).value.imag();
  const double norm = rk / std::max(rk, t);
  return {im / norm, norm, z};
}

}  // namespace rmx

#endif  // RMX_OBSERVABLE_HPP_
