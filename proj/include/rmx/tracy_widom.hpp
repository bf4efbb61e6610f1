#ifndef RMX_TRACY_WIDOM_HPP_
#define RMX_TRACY_WIDOM_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rmx/airy.hpp"
#include "rmx/ensembles.hpp"
#include "rmx/errors.hpp"
#include "rmx/extremes.hpp"
#include "rmx/parallel.hpp"
#include "rmx/quadrature.hpp"
#include "rmx/random.hpp"
#include "rmx/spectral.hpp"

namespace rmx {

/// Hastings-McLeod solution q of q'' = s q + 2 q^3 sampled on a decreasing
/// grid, together with the integrals needed for the Tracy-Widom laws:
///   u(s) = int_s^inf q^2,  log_f2(s) = -int_s^inf (x - s) q(x)^2 dx,  i1(s) = int_s^inf q.
struct PainleveSolution {
  std::vector<double> s;
  std::vector<double> q, qp, u, log_f2, i1;
  double shooting_factor = 1.0;  // q(s0) = shooting_factor * Ai(s0)
};

struct PainleveOptions {
  double tolerance = 1e-12;  // local error per unit step, relative and absolute
  double blowup = 1e6;
};

namespace detail {

using State = std::array<long double, 5>;  // q, q', u, log F2, I1

inline State painleve_rhs(long double s, const State& y) {
  return {y[1], s * y[0] + 2 * y[0] * y[0] * y[0], -y[0] * y[0], y[2], -y[0]};
}

enum class ShootOutcome { ok, blew_up, went_negative };

// Dormand-Prince 5(4) from y at s to each point of `out_grid` (decreasing).
inline ShootOutcome integrate_painleve(long double s, State y, const std::vector<double>& out_grid,
                                       const PainleveOptions& opts, std::vector<State>* out,
                                       double* stop_at) {
  static constexpr long double a21 = 1.0L / 5, a31 = 3.0L / 40, a32 = 9.0L / 40, a41 = 44.0L / 45,
                               a42 = -56.0L / 15, a43 = 32.0L / 9, a51 = 19372.0L / 6561,
                               a52 = -25360.0L / 2187, a53 = 64448.0L / 6561, a54 = -212.0L / 729,
                               a61 = 9017.0L / 3168, a62 = -355.0L / 33, a63 = 46732.0L / 5247,
                               a64 = 49.0L / 176, a65 = -5103.0L / 18656, b1 = 35.0L / 384,
                               b3 = 500.0L / 1113, b4 = 125.0L / 192, b5 = -2187.0L / 6784,
                               b6 = 11.0L / 84, e1 = 71.0L / 57600, e3 = -71.0L / 16695,
                               e4 = 71.0L / 1920, e5 = -17253.0L / 339200, e6 = 22.0L / 525,
                               e7 = -1.0L / 40;
  const long double tol = opts.tolerance;
  long double h = -1e-3L;
  State k1 = painleve_rhs(s, y);
  for (double target : out_grid) {
    while (s > target) {
      if (s + h < target) h = target - s;
      State t, k2, k3, k4, k5, k6, k7, yn;
      for (int i = 0; i < 5; ++i) t[i] = y[i] + h * a21 * k1[i];
      k2 = painleve_rhs(s + h / 5, t);
      for (int i = 0; i < 5; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = painleve_rhs(s + 3 * h / 10, t);
      for (int i = 0; i < 5; ++i) t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = painleve_rhs(s + 4 * h / 5, t);
      for (int i = 0; i < 5; ++i)
        t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = painleve_rhs(s + 8 * h / 9, t);
      for (int i = 0; i < 5; ++i)
        t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      k6 = painleve_rhs(s + h, t);
      for (int i = 0; i < 5; ++i)
        yn[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      k7 = painleve_rhs(s + h, yn);
      long double err = 0;
      for (int i = 0; i < 5; ++i) {
        const long double e =
            h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const long double sc = tol * (1 + std::max(std::abs(y[i]), std::abs(yn[i])));
        err = std::max(err, std::abs(e) / sc);
      }
      if (!(err <= 1) && std::abs(h) > 1e-14L) {
        h *= std::max(0.1L, 0.9L * std::pow(err, -0.2L));
        continue;
      }
      s += h;
      y = yn;
      k1 = k7;
      if (std::abs(s - target) < 1e-15L) s = target;
      if (!std::isfinite(static_cast<double>(y[0])) || std::abs(y[0]) > opts.blowup) {
        if (stop_at) *stop_at = static_cast<double>(s);
        return ShootOutcome::blew_up;
      }
      if (y[0] < 0) {
        if (stop_at) *stop_at = static_cast<double>(s);
        return ShootOutcome::went_negative;
      }
      const long double grow = err > 0 ? 0.9L * std::pow(err, -0.2L) : 5.0L;
      h *= std::min(5.0L, std::max(0.2L, grow));
      h = std::max(h, -0.05L);
    }
    if (out) out->push_back(y);
  }
  return ShootOutcome::ok;
}

inline State painleve_start(double s0, long double factor) {
  const AiryValue a = airy_both(s0);
  const long double ai = factor * a.ai, aip = factor * a.aip, s = s0;
  // int_{s0}^inf Ai: quadrature to 12, then Ai(x)/sqrt(x) for the remainder
  const double tail = integrate([](double x) { return airy(x); }, s0, kAiryMax, 1e-18).value +
                      airy(kAiryMax) / std::sqrt(kAiryMax);
  State y;
  y[0] = ai;
  y[1] = aip;
  y[2] = aip * aip - s * ai * ai;
  y[3] = -(2 * s * s * ai * ai - 2 * s * aip * aip - ai * aip) / 3;
  y[4] = factor * tail;
  return y;
}

}  // namespace detail

/// Integrates the Hastings-McLeod solution backward from grid[0] >= 8 with
/// q(s0) = k Ai(s0), k = 1 up to the shooting refinement.
inline PainleveSolution hastings_mcleod(const std::vector<double>& grid, const PainleveOptions& opts = {}) {
  detail::require(!grid.empty() && grid.front() >= 8.0 && grid.front() <= kAiryMax,
                  "hastings_mcleod: grid must start at some s0 in [8, 12]");
  for (std::size_t i = 1; i < grid.size(); ++i)
    detail::require(grid[i] < grid[i - 1], "hastings_mcleod: grid must be decreasing");
  const double s0 = grid.front();
  std::vector<double> rest(grid.begin() + 1, grid.end());

  auto attempt = [&](long double k, const std::vector<double>* to, std::vector<detail::State>* out,
                     double* stop) {
    return detail::integrate_painleve(s0, detail::painleve_start(s0, k), *to, opts, out, stop);
  };

  // The solution is separatrix-unstable backward, so q(s0) = k Ai(s0) is
  // always refined: bisection on k against the integrator itself, classified
  // on an extended interval so that the kept solution follows the separatrix
  // well past the last grid point.
  std::vector<double> probe_grid = rest;
  if (probe_grid.empty()) probe_grid.push_back(s0 - 1.0);
  probe_grid.push_back(probe_grid.back() - 4.0);
  long double lo = 1 - 1e-4L, hi = 1 + 1e-4L;
  double stop = 0.0;
  if (attempt(lo, &probe_grid, nullptr, &stop) != detail::ShootOutcome::went_negative ||
      attempt(hi, &probe_grid, nullptr, &stop) != detail::ShootOutcome::blew_up)
    throw NumericalError("hastings_mcleod: shooting could not bracket q(s0); last stop at s = " +
                         std::to_string(stop));
  long double k = 1;
  bool survived = false;
  for (int it = 0; it < 200 && !survived; ++it) {
    const long double mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) break;
    k = mid;
    switch (attempt(mid, &probe_grid, nullptr, &stop)) {
      case detail::ShootOutcome::ok: survived = true; break;
      case detail::ShootOutcome::blew_up: hi = mid; break;
      case detail::ShootOutcome::went_negative: lo = mid; break;
    }
  }
  std::vector<detail::State> states;
  if (attempt(k, &rest, &states, &stop) != detail::ShootOutcome::ok)
    throw NumericalError("hastings_mcleod: blow-up at s = " + std::to_string(stop) +
                         " even after shooting refinement; tolerance too loose");

  PainleveSolution sol;
  sol.shooting_factor = static_cast<double>(k);
  const detail::State y0 = detail::painleve_start(s0, k);
  auto push = [&](double s, const detail::State& y) {
    sol.s.push_back(s);
    sol.q.push_back(static_cast<double>(y[0]));
    sol.qp.push_back(static_cast<double>(y[1]));
    sol.u.push_back(static_cast<double>(y[2]));
    sol.log_f2.push_back(static_cast<double>(y[3]));
    sol.i1.push_back(static_cast<double>(y[4]));
  };
  push(s0, y0);
  for (std::size_t i = 0; i < rest.size(); ++i) push(rest[i], states[i]);
  return sol;
}

struct TwBuildOptions {
  double s_min = -10.0;
  double s_max = 6.0;
  double step = 1.0 / 64.0;
  double s0 = 8.0;
  double tolerance = 1e-12;
};

/// Tabulated Tracy-Widom CDF with exact node derivatives and monotone cubic
/// Hermite interpolation in between.
struct TwTable {
  int beta = 2;
  std::vector<double> grid;     // increasing
  std::vector<double> cdf;
  std::vector<double> density;  // dF/ds at the nodes
  double tolerance = 0.0;
  double accuracy = 0.0;        // max |F| change against a build at 100x the tolerance

  double lower() const { return grid.front(); }
  double upper() const { return grid.back(); }

  /// F(s); outside the grid the nearest end value is returned and *clamped is set.
  double operator()(double s, bool* clamped = nullptr) const {
    if (clamped) *clamped = false;
    if (s <= grid.front() || s >= grid.back()) {
      if (clamped) *clamped = s < grid.front() || s > grid.back();
      return s <= grid.front() ? cdf.front() : cdf.back();
    }
    const std::size_t i = cell_of(s);
    return hermite(i, s, false);
  }

  /// dF/ds from the interpolant; 0 outside the grid.
  double pdf(double s) const {
    if (s < grid.front() || s > grid.back()) return 0.0;
    if (s == grid.back()) return density.back();
    return hermite(cell_of(s), s, true);
  }

  /// Moments of the tabulated law, with the right tail beyond the grid included.
  double mean() const { return moment(1); }
  double variance() const {
    const double m = mean();
    return moment(2) - m * m;
  }

 private:
  std::size_t cell_of(double s) const {
    auto it = std::upper_bound(grid.begin(), grid.end(), s);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - grid.begin() - 1));
  }

  // Hermite interpolant with Fritsch-Carlson limited slopes
  double hermite(std::size_t i, double s, bool derivative) const {
    const double h = grid[i + 1] - grid[i];
    const double delta = (cdf[i + 1] - cdf[i]) / h;
    double d0 = density[i], d1 = density[i + 1];
    if (delta <= 0.0) {
      d0 = d1 = 0.0;
    } else {
      const double a = d0 / delta, b = d1 / delta;
      const double r = a * a + b * b;
      if (r > 9.0) {
        const double tau = 3.0 / std::sqrt(r);
        d0 = tau * a * delta;
        d1 = tau * b * delta;
      }
    }
    const double t = (s - grid[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    if (!derivative) {
      return (2 * t3 - 3 * t2 + 1) * cdf[i] + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * cdf[i + 1] +
             (t3 - t2) * h * d1;
    }
    return ((6 * t2 - 6 * t) * cdf[i] + (-6 * t2 + 6 * t) * cdf[i + 1]) / h + (3 * t2 - 4 * t + 1) * d0 +
           (3 * t2 - 2 * t) * d1;
  }

  double moment(int p) const {
    // 3-point Gauss on each cell is exact for s^p F'(s) with p <= 2
    static constexpr double x[3] = {-0.774596669241483377, 0.0, 0.774596669241483377};
    static constexpr double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double c = 0.5 * (grid[i] + grid[i + 1]), h = 0.5 * (grid[i + 1] - grid[i]);
      for (int j = 0; j < 3; ++j) {
        const double s = c + h * x[j];
        total += w[j] * h * std::pow(s, p) * hermite(i, s, true);
      }
    }
    // Left of the grid the mass is negligible and sits at the end point. To
    // the right the tail is treated as exponential with the hazard rate at
    // the last node, E[s^p | s > b] ~ b^p + p b^{p-1}/r + p(p-1) b^{p-2}/r^2.
    total += cdf.front() * std::pow(grid.front(), p);
    const double b = grid.back(), tail = 1.0 - cdf.back();
    if (tail > 0.0 && density.back() > 0.0) {
      const double m = tail / density.back();
      total += tail * (std::pow(b, p) + p * std::pow(b, p - 1) * m + (p > 1 ? p * (p - 1) * m * m : 0.0));
    } else {
      total += tail * std::pow(b, p);
    }
    return total;
  }
};

namespace detail {

inline TwTable tw_table_once(int beta, const TwBuildOptions& opts) {
  detail::require(beta == 1 || beta == 2, "tw table: beta must be 1 or 2");
  detail::require(opts.s_min < opts.s_max && opts.s_max < opts.s0 && opts.step > 0.0,
                  "tw table: need s_min < s_max < s0 and a positive step");
  const std::size_t nodes = static_cast<std::size_t>(std::llround((opts.s_max - opts.s_min) / opts.step)) + 1;
  std::vector<double> down{opts.s0};
  for (std::size_t i = 0; i < nodes; ++i)
    down.push_back(opts.s_max - static_cast<double>(i) * (opts.s_max - opts.s_min) / static_cast<double>(nodes - 1));
  PainleveOptions po;
  po.tolerance = opts.tolerance;
  const PainleveSolution sol = hastings_mcleod(down, po);
  TwTable t;
  t.beta = beta;
  t.tolerance = opts.tolerance;
  for (std::size_t j = sol.s.size(); j-- > 1;) {
    const double lf2 = sol.log_f2[j];
    double f, d;
    if (beta == 2) {
      f = std::exp(lf2);
      d = f * sol.u[j];
    } else {
      f = std::exp(0.5 * lf2 - 0.5 * sol.i1[j]);
      d = f * 0.5 * (sol.u[j] + sol.q[j]);
    }
    t.grid.push_back(sol.s[j]);
    t.cdf.push_back(f);
    t.density.push_back(d);
  }
  return t;
}

}  // namespace detail

/// Builds the table; the accuracy field compares against a build at 100x the tolerance.
inline TwTable build_tw_table(int beta, const TwBuildOptions& opts = {}) {
  TwTable t = detail::tw_table_once(beta, opts);
  TwBuildOptions loose = opts;
  loose.tolerance = std::min(1e-6, opts.tolerance * 100.0);
  const TwTable l = detail::tw_table_once(beta, loose);
  double acc = 0.0;
  for (std::size_t i = 0; i < t.cdf.size(); ++i) acc = std::max(acc, std::abs(t.cdf[i] - l.cdf[i]));
  t.accuracy = acc;
  return t;
}

/// Default tables, built once per process.
inline const TwTable& tw_table(int beta) {
  detail::require(beta == 1 || beta == 2, "tw_table: beta must be 1 or 2");
  static const TwTable t1 = build_tw_table(1);
  static const TwTable t2 = build_tw_table(2);
  return beta == 1 ? t1 : t2;
}

inline double tw_cdf(int beta, double s, bool* clamped = nullptr) { return tw_table(beta)(s, clamped); }

struct EdgeRateRow {
  std::size_t n = 0;
  double d_k = 0.0;
  double stderr_binomial = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> statistics;  // N^{2/3}(l_N - 2), by sample id
};

/// N^{2/3}(l_N - 2) for one spectrum.
inline double edge_statistic(const Spectrum& s) {
  return std::pow(static_cast<double>(s.size()), 2.0 / 3.0) * (s.values.back() - 2.0);
}

/// For each N draws `samples` matrices with the class and entry law of `base`
/// (flat profile) and measures the Kolmogorov distance of N^{2/3}(l_N - 2) to
/// TW_beta. Sample j uses substream j of `seed`, split by N.
inline std::vector<EdgeRateRow> edge_rate_experiment(const EnsembleSpec& base, const std::vector<std::size_t>& n_list,
                                                     std::size_t samples, std::uint64_t seed,
                                                     unsigned workers = 1) {
  if (samples == 0) throw DomainError("edge_rate_experiment: samples must be positive");
  detail::require(!n_list.empty(), "edge_rate_experiment: empty N list");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    detail::require(n_list[i] > n_list[i - 1], "edge_rate_experiment: N list must be increasing");
  detail::require(!base.profile, "edge_rate_experiment: only the flat profile is supported across sizes");
  const TwTable& table = tw_table(base.beta());
  std::vector<EdgeRateRow> rows;
  for (std::size_t n : n_list) {
    EnsembleSpec spec = base;
    spec.n = n;
    spec.validate();
    EdgeRateRow row;
    row.n = n;
    row.samples = samples;
    row.seed = seed;
    row.statistics = parallel_map(samples, workers, [&](std::size_t id) {
      return edge_statistic(eigenvalues(sample_matrix(spec, RandomStream(seed, id).split(n))));
    });
    const KsResult ks = ks_test(row.statistics, [&](double x) { return table(x); });
    row.d_k = ks.distance;
    row.stderr_binomial = ks.stderr_binomial;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rmx

#endif  // RMX_TRACY_WIDOM_HPP_
