#include <gtest/gtest.h>

#include <cmath>

#include "rmx/ensembles.hpp"
#include "rmx/quadrature.hpp"
#include "rmx/spectral.hpp"

using namespace rmx;

TEST(Semicircle, CdfIsIntegralOfDensity) {
  for (double x : {-1.9, -1.0, -0.3, 0.0, 0.8, 1.5, 1.99}) {
    const double q = integrate(semicircle_density, -2.0, x, 1e-13).value;
    EXPECT_NEAR(semicircle_cdf(x), q, 1e-10) << x;
  }
  EXPECT_EQ(semicircle_cdf(-3.0), 0.0);
  EXPECT_EQ(semicircle_cdf(2.5), 1.0);
}

TEST(Semicircle, QuantileInvertsCdf) {
  for (double p : {1e-9, 1e-4, 0.1, 0.37, 0.5, 0.9, 0.9999})
    EXPECT_NEAR(semicircle_cdf(semicircle_quantile(p)), p, 1e-13) << p;
  EXPECT_EQ(classical_location(100, 100), 2.0);
  EXPECT_EQ(classical_location(50, 100), 0.0);
  EXPECT_NEAR(classical_location(1, 1000), -classical_location(999, 1000), 1e-13);
}

TEST(Semicircle, StieltjesSolvesSelfConsistentEquation) {
  for (cplx z : {cplx(0.3, 0.01), cplx(-1.5, 2.0), cplx(50.0, 1e-3), cplx(2.0, 1e-8)}) {
    const cplx m = stieltjes_semicircle(z);
    EXPECT_LT(std::abs(m * m + z * m + 1.0), 1e-12) << z;
    EXPECT_GT(m.imag(), 0.0);
  }
  EXPECT_THROW(stieltjes_semicircle({0.5, -0.1}), DomainError);
}

TEST(Semicircle, EmpiricalStieltjesConverges) {
  const Spectrum s = eigenvalues(sample_matrix(EnsembleSpec::wigner(SymmetryClass::hermitian, 400), RandomStream(2, 0)));
  const cplx z(0.4, 0.1);
  EXPECT_LT(std::abs(stieltjes_empirical(s, z) - stieltjes_semicircle(z)), 0.03);
}

TEST(Rigidity, BoundedForGue) {
  const Spectrum s = eigenvalues(sample_matrix(EnsembleSpec::wigner(SymmetryClass::hermitian, 300), RandomStream(2, 1)));
  const auto r = rigidity_profile(s);
  ASSERT_EQ(r.size(), 300u);
  EXPECT_LT(rigidity_statistic(s), 3.0 * std::log(300.0));
}

TEST(Quadrature, KnownIntegrals) {
  EXPECT_NEAR(integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0).value, std::sqrt(std::numbers::pi), 1e-12);
  EXPECT_NEAR(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12).value, 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(integrate([](double x) { return x; }, 1.0, 0.0).value, -0.5, 1e-14);
}
