#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rmx/dbm.hpp"
#include "rmx/ensembles.hpp"
#include "rmx/observable.hpp"

using namespace rmx;

namespace {

using lcplx = std::complex<long double>;

// Generator of the (positions, weights) diffusion applied to
// f = e^{-t/2} sum u_k/(x_k - z), with the x-derivatives taken by central
// differences in long double: sum b_k d_k f + (1/(beta N)) sum d_kk f
// + sum (du_k/dt) d_{u_k} f + d_t f.
cplx generator_by_differences(const std::vector<double>& x, const std::vector<double>& u, cplx z, double t,
                              double beta) {
  const std::size_t n = x.size();
  const long double nn = n, e = std::exp(-0.5L * t);
  const lcplx zl(z.real(), z.imag());
  auto f = [&](const std::vector<long double>& xs) {
    lcplx s = 0;
    for (std::size_t k = 0; k < n; ++k) s += static_cast<long double>(u[k]) / (xs[k] - zl);
    return e * s;
  };
  std::vector<long double> xl(x.begin(), x.end());
  const long double f0r = 0;
  (void)f0r;
  lcplx total = -0.5L * f(xl);
  const long double h = 1e-5L;
  for (std::size_t k = 0; k < n; ++k) {
    long double b = -0.5L * xl[k];
    long double du = 0;
    for (std::size_t l = 0; l < n; ++l)
      if (l != k) {
        b += 1.0L / (nn * (xl[k] - xl[l]));
        du += (u[l] - u[k]) / (nn * (xl[k] - xl[l]) * (xl[k] - xl[l]));
      }
    auto xp = xl, xm = xl;
    xp[k] += h;
    xm[k] -= h;
    const lcplx fp = f(xp), fm = f(xm), fc = f(xl);
    total += b * (fp - fm) / (2 * h) + (1.0L / (beta * nn)) * (fp - 2.0L * fc + fm) / (h * h);
    total += du * e / (xl[k] - zl);
  }
  return cplx(static_cast<double>(total.real()), static_cast<double>(total.imag()));
}

}  // namespace

TEST(Characteristic, SemigroupAndEdgeImage) {
  RandomStream r(3, 0);
  for (int i = 0; i < 200; ++i) {
    const cplx z(4.0 * r.uniform() - 2.0, 2.0 * r.uniform() + 1e-3);
    const double s = r.uniform(), t = r.uniform();
    const cplx a = characteristic(characteristic(z, s), t), b = characteristic(z, s + t);
    EXPECT_LT(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(b)));
  }
  for (double t : {0.1, 0.5, 1.0}) EXPECT_NEAR(characteristic(2.0, t).real(), 2.0 * std::cosh(0.5 * t), 1e-14);
  EXPECT_THROW(characteristic({0.0, -1.0}, 0.1), DomainError);
}

TEST(Characteristic, BulkPointsEnterUpperHalfPlane) {
  const cplx z = characteristic(0.5, 0.2);
  EXPECT_GT(z.imag(), 0.0);
  // z_t solves d z/dt = sqrt(z^2 - 4)/2
  const double h = 1e-6;
  const cplx dz = (characteristic(0.5, 0.2 + h) - characteristic(0.5, 0.2 - h)) / (2 * h);
  EXPECT_LT(std::abs(dz - 0.5 * sqrt_z2_minus_4(z)), 1e-7);
}

TEST(DriftIdentity, ExactCoefficientMatchesGenerator) {
  RandomStream r(5, 0);
  for (double beta : {1.0, 2.0, 4.0}) {
    std::vector<double> x(12), u(12);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = -1.8 + 0.3 * static_cast<double>(k) + 0.1 * r.uniform();
      u[k] = r.normal();
    }
    const cplx z(0.3, 0.2);
    const DriftIdentity d = drift_identity(x, u, z, 0.3, beta);
    const cplx oracle = generator_by_differences(x, u, z, 0.3, beta);
    EXPECT_LT(std::abs(d.assembled - oracle), 1e-5 * d.scale) << beta;
    EXPECT_LT(d.relative_residual(), 1e-12) << beta;
    const DriftIdentity p = drift_identity(x, u, z, 0.3, beta, DiffusionCoefficient::printed);
    if (beta == 2.0)
      EXPECT_LT(p.relative_residual(), 1e-12);
    else
      EXPECT_GT(p.relative_residual(), 1e-6);
  }
}

TEST(DriftIdentity, Domain) {
  const std::vector<double> x{0.0, 0.0}, u{1.0, 1.0};
  EXPECT_THROW(drift_identity(x, u, {0.1, 0.1}, 0.0, 1.0), DomainError);
  const std::vector<double> y{0.0, 1.0};
  EXPECT_THROW(drift_identity(y, u, {0.1, 0.0}, 0.0, 1.0), DomainError);
}

TEST(Observable, ResidualsOnCoupledRun) {
  const std::size_t n = 100;
  const std::vector<double> grid{0.0, 0.1, 0.25};
  const RandomStream s(12, 0);
  const Spectrum l0 = eigenvalues(sample_invariant_gaussian(SymmetryClass::symmetric, n, s.split(0)));
  const Spectrum m0 = eigenvalues(sample_invariant_gaussian(SymmetryClass::symmetric, n, s.split(1)));
  const auto tr = couple_particle(l0, m0, 1.0, grid, s);
  const double a = advection_residual(tr, {0.2, 0.05}, 0.25);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_GE(a, 0.0);
  EXPECT_EQ(advection_residual(tr, {0.2, 0.05}, 0.0), 0.0);
  EXPECT_THROW(advection_residual(tr, {1.95, 0.05}, 0.1), DomainError);
  EXPECT_THROW(advection_residual(tr, {0.2, 0.001}, 0.1), DomainError);
  const auto e = edge_bound_statistic(tr, 1.5, 0.25);
  EXPECT_GT(e.statistic, 0.0);
  EXPECT_NEAR(e.normalization, std::sqrt(0.5) / std::max(std::sqrt(0.5), 0.25), 1e-15);
  EXPECT_THROW(edge_bound_statistic(tr, 1.99, 0.1), DomainError);
}

TEST(Observable, FAndFTilde) {
  const std::vector<double> x{-1.0, 1.0}, w{1.0, -1.0};
  const cplx z(0.0, 1.0);
  const cplx f = evaluate_f(x, w, z, 0.0).value;
  EXPECT_NEAR(std::abs(f - (1.0 / (-1.0 - z) - 1.0 / (1.0 - z))), 0.0, 1e-15);
  EXPECT_GT(evaluate_f_abs(x, w, z, 0.0).value.imag(), 0.0);
}
