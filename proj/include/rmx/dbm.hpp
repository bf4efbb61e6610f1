#ifndef RMX_DBM_HPP_
#define RMX_DBM_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rmx/ensembles.hpp"
#include "rmx/errors.hpp"
#include "rmx/observable.hpp"
#include "rmx/random.hpp"
#include "rmx/spectral.hpp"
#include "rmx/trajectory.hpp"

namespace rmx {

namespace detail {

inline void validate_time_grid(std::span<const double> grid) {
  detail::require(!grid.empty() && grid.front() == 0.0, "time grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    detail::require(grid[i] > grid[i - 1], "time grid must be strictly increasing");
  detail::require(grid.back() <= 1.0, "time grid must end at or before 1");
}

}  // namespace detail

/// Matrix-level coupling from given initial matrices: both are driven by the
/// same Gaussian increment through the exact OU transition at every grid step.
inline CoupledTrajectory couple_exact(const MatrixSample& h0, const MatrixSample& g0,
                                      std::span<const double> time_grid, const RandomStream& stream) {
  detail::validate_time_grid(time_grid);
  detail::require(h0.size() == g0.size() && h0.symmetry() == g0.symmetry(),
                  "couple_exact: initial matrices differ in size or class");
  CoupledTrajectory traj;
  traj.stream_id = stream.substream_index();
  MatrixSample h = h0, g = g0;
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    if (i > 0) {
      const double step = time_grid[i] - time_grid[i - 1];
      const MatrixSample w = sample_invariant_gaussian(h.symmetry(), h.size(), stream.split(2 + i));
      h = ou_convolve(h, step, w);
      g = ou_convolve(g, step, w);
    }
    traj.times.push_back(time_grid[i]);
    traj.lambda.push_back(eigenvalues(h));
    traj.mu.push_back(eigenvalues(g));
  }
  return traj;
}

/// Draws H0 from `spec` and G0 from the invariant Gaussian ensemble of the
/// same class, then couples them at the matrix level.
inline CoupledTrajectory couple_exact(const EnsembleSpec& spec, std::span<const double> time_grid,
                                      const RandomStream& stream) {
  detail::validate_time_grid(time_grid);
  const MatrixSample h0 = sample_matrix(spec, stream.split(0));
  const MatrixSample g0 = sample_invariant_gaussian(spec.symmetry, spec.n, stream.split(1));
  return couple_exact(h0, g0, time_grid, stream);
}

/// Particle configuration of the beta-DBM.
struct ParticleState {
  std::vector<double> positions;  // strictly increasing
  double time = 0.0;
  double beta = 1.0;
};

enum class ParticleScheme {
  // fully explicit Euler-Maruyama
  euler_maruyama,
  // nearest-neighbour repulsion implicit, all other drift explicit; the
  // implicit part keeps the ordering by construction
  split_implicit,
};

struct ParticleOptions {
  ParticleScheme scheme = ParticleScheme::split_implicit;
  double dt_max = 2e-4;
  // dt <= stability / max_k sum_l 1/(N (x_k - x_l)^2), the sum running over
  // the explicitly treated pairs
  double stability = 0.2;
  int max_halvings = 20;
};

namespace detail {

inline bool strictly_increasing(std::span<const double> x, std::size_t* bad = nullptr) {
  for (std::size_t k = 0; k + 1 < x.size(); ++k)
    if (!(x[k] < x[k + 1])) {
      if (bad) *bad = k;
      return false;
    }
  return true;
}

/// b_k = (1/N) sum_{l != k} 1/(x_k - x_l) - x_k/2; returns max_k (1/N) sum_l (x_k - x_l)^{-2}.
/// With `skip_nearest` the pairs |k - l| = 1 are left out of both sums.
inline double dbm_drift(std::span<const double> x, std::span<double> b, std::span<double> c,
                        bool skip_nearest = false) {
  const std::size_t n = x.size();
  std::fill(b.begin(), b.end(), 0.0);
  std::fill(c.begin(), c.end(), 0.0);
  const std::size_t offset = skip_nearest ? 2 : 1;
  for (std::size_t k = 0; k < n; ++k) {
    const double xk = x[k];
    double bk = 0.0, ck = 0.0;
    for (std::size_t l = k + offset; l < n; ++l) {
      const double inv = 1.0 / (xk - x[l]);
      const double inv2 = inv * inv;
      bk += inv;
      ck += inv2;
      b[l] -= inv;
      c[l] += inv2;
    }
    b[k] += bk;
    c[k] += ck;
  }
  const double nn = static_cast<double>(n);
  double cmax = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    b[k] = b[k] / nn - 0.5 * x[k];
    cmax = std::max(cmax, c[k] / nn);
  }
  return cmax;
}

/// Solves y_k = r_k + h (1/(y_k - y_{k-1}) + 1/(y_k - y_{k+1})) for increasing y,
/// i.e. minimizes sum (y_k - r_k)^2 / 2 - h sum log(y_{k+1} - y_k), by damped
/// Newton from the increasing start `y`. Returns false if it does not converge.
inline bool solve_nearest_implicit(std::span<const double> r, double h, std::span<double> y,
                                   std::vector<double>& work) {
  const std::size_t n = r.size();
  if (n < 2) {
    std::copy(r.begin(), r.end(), y.begin());
    return true;
  }
  work.resize(5 * n);
  double* g = work.data();
  double* diag = g + n;
  double* off = diag + n;
  double* dir = off + n;
  double* trial = dir + n;
  auto objective = [&](const double* v) {
    double f = 0.0;
    for (std::size_t k = 0; k < n; ++k) f += 0.5 * (v[k] - r[k]) * (v[k] - r[k]);
    for (std::size_t k = 0; k + 1 < n; ++k) f -= h * std::log(v[k + 1] - v[k]);
    return f;
  };
  double scale = 1.0;
  for (std::size_t k = 0; k < n; ++k) scale = std::max(scale, std::abs(r[k]));
  double phi = objective(y.data());
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t k = 0; k < n; ++k) {
      g[k] = y[k] - r[k];
      diag[k] = 1.0;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double inv = 1.0 / (y[k + 1] - y[k]);
      const double w = h * inv * inv;
      g[k] += h * inv;
      g[k + 1] -= h * inv;
      diag[k] += w;
      diag[k + 1] += w;
      off[k] = -w;
    }
    // Thomas algorithm on the SPD tridiagonal Hessian
    for (std::size_t k = 0; k < n; ++k) dir[k] = -g[k];
    for (std::size_t k = 1; k < n; ++k) {
      const double m = off[k - 1] / diag[k - 1];
      diag[k] -= m * off[k - 1];
      dir[k] -= m * dir[k - 1];
    }
    dir[n - 1] /= diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) dir[k] = (dir[k] - off[k] * dir[k + 1]) / diag[k];

    double step_norm = 0.0, slope = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      step_norm = std::max(step_norm, std::abs(dir[k]));
      slope += g[k] * dir[k];
    }
    if (step_norm <= 4.0 * std::numeric_limits<double>::epsilon() * scale) return true;
    double alpha = 1.0;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = y[k] + alpha * dir[k];
      if (!strictly_increasing(std::span<const double>(trial, n))) continue;
      const double f = objective(trial);
      // the slack absorbs rounding in f once the iterate is converged
      if (f <= phi + 1e-4 * alpha * slope + 1e-14 * std::abs(phi)) {
        phi = f;
        break;
      }
    }
    if (alpha < std::ldexp(1.0, -59)) return false;
    std::copy(trial, trial + n, y.begin());
    if (alpha * step_norm <= 1e-15 * scale) return true;
  }
  return false;
}

/// Several particle systems driven by the same Brownian motions B_k.
class SharedNoiseStepper {
 public:
  SharedNoiseStepper(std::vector<std::vector<double>*> systems, double beta, RandomStream& stream,
                     ParticleOptions opts)
      : systems_(std::move(systems)), beta_(beta), stream_(stream), opts_(opts) {
    n_ = systems_.front()->size();
    for (auto* s : systems_) {
      detail::require(s->size() == n_, "dbm: coupled systems differ in size");
      std::size_t bad = 0;
      if (!strictly_increasing(*s, &bad))
        throw DomainError("dbm: initial positions not strictly increasing at index " +
                          std::to_string(bad));
    }
    detail::require(beta >= 1.0, "dbm: beta must be at least 1");
    detail::require(opts.dt_max > 0.0 && opts.stability > 0.0, "dbm: dt_max and stability must be positive");
    sigma_ = std::sqrt(2.0 / (beta * static_cast<double>(n_)));
    drift_.assign(systems_.size(), std::vector<double>(n_));
    stiff_.resize(n_);
    proposal_.assign(systems_.size(), std::vector<double>(n_));
  }

  /// Evolves all systems from `from` to `to` with adaptive steps.
  void run(double from, double to) {
    double time = from;
    std::vector<double> db(n_);
    while (time < to) {
      const double cmax = refresh_drift();
      double dt = opts_.dt_max;
      if (cmax > 0.0) dt = std::min(dt, opts_.stability / cmax);
      const bool last = dt >= to - time;
      if (last) dt = to - time;
      stream_.fill_normal(db);
      for (double& z : db) z *= std::sqrt(dt);
      step_with_drift(dt, db, 0, true, 0.0);
      time = last ? to : time + dt;
      ++steps_;
    }
  }

  /// One step of fixed size dt (halved on ordering violations).
  void step(double dt) {
    std::vector<double> db(n_);
    stream_.fill_normal(db);
    for (double& z : db) z *= std::sqrt(dt);
    refresh_drift();
    step_with_drift(dt, db, 0, false, 0.0);
    ++steps_;
  }

  std::size_t steps() const { return steps_; }

 private:
  bool split() const { return opts_.scheme == ParticleScheme::split_implicit; }

  double refresh_drift() {
    double cmax = 0.0;
    for (std::size_t s = 0; s < systems_.size(); ++s)
      cmax = std::max(cmax, dbm_drift(*systems_[s], drift_[s], stiff_, split()));
    return cmax;
  }

  // drift_ must hold the drift at the current state. With `adaptive`, a
  // sub-step that the stiffness controller would not allow is refined too.
  void step_with_drift(double dt, const std::vector<double>& db, int depth, bool adaptive,
                       double cmax) {
    bool ok = !(adaptive && cmax > 0.0 && dt * cmax > opts_.stability);
    bool stiff = !ok;
    std::size_t bad_sys = 0, bad_k = 0;
    const double h = dt / static_cast<double>(n_);
    for (std::size_t s = 0; s < systems_.size() && ok; ++s) {
      const auto& x = *systems_[s];
      auto& p = proposal_[s];
      for (std::size_t k = 0; k < n_; ++k) p[k] = x[k] + drift_[s][k] * dt + sigma_ * db[k];
      if (split()) {
        rhs_.assign(p.begin(), p.end());
        if (!strictly_increasing(p)) p = x;
        if (!solve_nearest_implicit(rhs_, h, p, work_)) {
          ok = false;
          bad_sys = s;
          bad_k = n_;
        }
      } else if (!strictly_increasing(p, &bad_k)) {
        ok = false;
        bad_sys = s;
      }
    }
    if (ok) {
      for (std::size_t s = 0; s < systems_.size(); ++s) std::swap(*systems_[s], proposal_[s]);
      return;
    }
    if (depth >= opts_.max_halvings) {
      if (stiff)
        throw NumericalError("dbm: step still too stiff after " + std::to_string(depth) +
                             " halvings; dt too large for N");
      if (bad_k == n_)
        throw NumericalError("dbm: implicit solve for system " + std::to_string(bad_sys) +
                             " failed after " + std::to_string(depth) + " halvings");
      throw NumericalError("dbm: particles " + std::to_string(bad_k) + " and " +
                           std::to_string(bad_k + 1) + " of system " + std::to_string(bad_sys) +
                           " still collide after " + std::to_string(depth) +
                           " halvings; dt too large for N");
    }
    // Brownian bridge split of the increment over [0, dt]
    std::vector<double> first(n_), second(n_);
    const double half = 0.5 * dt;
    const double bridge_sd = std::sqrt(0.25 * dt);
    stream_.fill_normal(first);
    for (std::size_t k = 0; k < n_; ++k) {
      first[k] = 0.5 * db[k] + bridge_sd * first[k];
      second[k] = db[k] - first[k];
    }
    step_with_drift(half, first, depth + 1, adaptive, cmax);
    const double c2 = refresh_drift();
    step_with_drift(half, second, depth + 1, adaptive, c2);
  }

  std::vector<std::vector<double>*> systems_;
  double beta_;
  RandomStream& stream_;
  ParticleOptions opts_;
  std::size_t n_ = 0;
  double sigma_ = 0.0;
  std::vector<std::vector<double>> drift_;
  std::vector<double> stiff_;
  std::vector<std::vector<double>> proposal_;
  std::vector<double> rhs_, work_;
  std::size_t steps_ = 0;
};

}  // namespace detail

/// One Euler-Maruyama step of
///   dx_k = sqrt(2/(beta N)) dB_k + ((1/N) sum_{l != k} 1/(x_k - x_l) - x_k/2) dt.
/// A step that breaks the ordering is split in two by a Brownian bridge,
/// recursively, up to `max_halvings` times.
inline ParticleState particle_step(const ParticleState& state, double dt, RandomStream& stream,
                                   int max_halvings = 20) {
  detail::require(dt > 0.0 && std::isfinite(dt), "particle_step: dt must be positive");
  ParticleState out = state;
  ParticleOptions opts;
  opts.scheme = ParticleScheme::euler_maruyama;
  opts.max_halvings = max_halvings;
  detail::SharedNoiseStepper stepper({&out.positions}, state.beta, stream, opts);
  stepper.step(dt);
  out.time += dt;
  return out;
}

/// x_k(0) = nu mu_k(0) + (1 - nu) lambda_k(0).
inline ParticleState interpolate_initial(const Spectrum& lambda0, const Spectrum& mu0, double nu) {
  detail::require(lambda0.size() == mu0.size(), "interpolate_initial: size mismatch");
  detail::require(nu >= 0.0 && nu <= 1.0, "interpolate_initial: nu must lie in [0, 1]");
  ParticleState s;
  s.beta = lambda0.beta;
  s.positions.resize(lambda0.size());
  for (std::size_t k = 0; k < lambda0.size(); ++k)
    s.positions[k] = nu == 0.0 ? lambda0[k] : nu == 1.0 ? mu0[k] : nu * mu0[k] + (1.0 - nu) * lambda0[k];
  return s;
}

/// Particle-level coupling: lambda and mu follow the beta-DBM with literally
/// the same Brownian motions B_k, sampled on a common adaptive step.
inline CoupledTrajectory couple_particle(const Spectrum& lambda0, const Spectrum& mu0, double beta,
                                         std::span<const double> time_grid, const RandomStream& stream,
                                         ParticleOptions opts = {}) {
  detail::validate_time_grid(time_grid);
  detail::require(lambda0.size() == mu0.size(), "couple_particle: size mismatch");
  CoupledTrajectory traj;
  traj.stream_id = stream.substream_index();
  std::vector<double> lam = lambda0.values, mu = mu0.values;
  RandomStream noise = stream.split(7);
  detail::SharedNoiseStepper stepper({&lam, &mu}, beta, noise, opts);
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    if (i > 0) stepper.run(time_grid[i - 1], time_grid[i]);
    traj.times.push_back(time_grid[i]);
    traj.lambda.push_back(Spectrum{lam, lambda0.beta});
    traj.mu.push_back(Spectrum{mu, mu0.beta});
  }
  return traj;
}

/// Evolves one configuration to each time of the grid with the adaptive scheme.
inline std::vector<ParticleState> evolve_particles(const ParticleState& start,
                                                   std::span<const double> time_grid,
                                                   const RandomStream& stream, ParticleOptions opts = {}) {
  detail::validate_time_grid(time_grid);
  std::vector<double> x = start.positions;
  RandomStream noise = stream.split(7);
  detail::SharedNoiseStepper stepper({&x}, start.beta, noise, opts);
  std::vector<ParticleState> out;
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    if (i > 0) stepper.run(time_grid[i - 1], time_grid[i]);
    out.push_back({x, time_grid[i], start.beta});
  }
  return out;
}

struct CouplingFields {
  std::vector<double> delta;      // e^{t/2}(lambda_k - mu_k), k = 1..N
  std::vector<double> gap_error;  // (lambda_{k+1} - lambda_k) - (mu_{k+1} - mu_k), k = 1..N-1
};

inline CouplingFields coupling_fields(const CoupledTrajectory& traj, double t) {
  const std::size_t idx = traj.index_of(t);
  const auto& lam = traj.lambda[idx].values;
  const auto& mu = traj.mu[idx].values;
  const double g = std::exp(0.5 * traj.times[idx]);
  CouplingFields out;
  out.delta.resize(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k) out.delta[k] = g * (lam[k] - mu[k]);
  if (lam.size() >= 2) {
    out.gap_error.resize(lam.size() - 1);
    for (std::size_t k = 0; k + 1 < lam.size(); ++k)
      out.gap_error[k] = (lam[k + 1] - lam[k]) - (mu[k + 1] - mu[k]);
  }
  return out;
}

/// u-bar_k(t) = (1/(N Im m(g))) sum_j Im(1/(gamma_j - g)) (lambda_j(0) - mu_j(0)),
/// g = (gamma_k + i0)_t. k is 1-based and must satisfy alpha N <= k <= (1 - alpha) N.
inline double bar_u(const Spectrum& lambda0, const Spectrum& mu0, std::size_t k, double t,
                    double alpha = 0.1) {
  const std::size_t n = lambda0.size();
  detail::require(mu0.size() == n, "bar_u: size mismatch");
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  if (!(kk >= alpha * nn && kk <= (1.0 - alpha) * nn))
    throw DomainError("bar_u: k outside the declared bulk");
  if (!(t > 0.0)) throw DomainError("bar_u: t must be positive");
  const cplx g = characteristic(cplx(classical_location(k, n), 0.0), t);
  const double im_m = stieltjes_semicircle(g).imag();
  double s = 0.0;
  for (std::size_t j = 1; j <= n; ++j)
    s += (1.0 / (classical_location(j, n) - g)).imag() * (lambda0[j - 1] - mu0[j - 1]);
  return s / (nn * im_m);
}

}  // namespace rmx

#endif  // RMX_DBM_HPP_
