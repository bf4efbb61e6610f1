#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "rmx/ensembles.hpp"
#include "rmx/extremes.hpp"
#include "rmx/quadrature.hpp"
#include "rmx/stats.hpp"

using namespace rmx;

namespace {

// int (4 - x^2)^{3/2} and int (4 - x^2)^2, closed-form antiderivatives
double antideriv_b1(double x) {
  const double r = std::sqrt(4.0 - x * x);
  return x * r * r * r / 4.0 + 1.5 * x * r + 6.0 * std::asin(x / 2.0);
}
double antideriv_b2(double x) { return 16.0 * x - 8.0 * x * x * x / 3.0 + std::pow(x, 5) / 5.0; }

// log A from the hyperfactorial asymptotics
// log prod k^k = (n^2/2 + n/2 + 1/12) log n - n^2/4 + log A + 1/(720 n^2) - 1/(5040 n^4) + 1/(10080 n^6) - ...
long double log_glaisher_by_hyperfactorial() {
  const int n = 200;
  long double s = 0;
  for (int k = 2; k <= n; ++k) s += k * std::log(static_cast<long double>(k));
  const long double nn = n, n2 = nn * nn;
  return s - (n2 / 2 + nn / 2 + 1.0L / 12) * std::log(nn) + n2 / 4 - 1.0L / (720 * n2) + 1.0L / (5040 * n2 * n2) -
         1.0L / (10080 * n2 * n2 * n2);
}

}  // namespace

TEST(Extremes, EdgeWeightIntegralClosedForm) {
  for (Interval iv : {Interval{-1.0, 1.0}, Interval{-0.5, 1.7}, Interval{0.2, 0.3}}) {
    EXPECT_NEAR(edge_weight_integral(iv, 1), antideriv_b1(iv.hi) - antideriv_b1(iv.lo), 1e-9);
    EXPECT_NEAR(edge_weight_integral(iv, 2), antideriv_b2(iv.hi) - antideriv_b2(iv.lo), 1e-9);
  }
}

TEST(Extremes, LimitCdfIsIntegralOfDensity) {
  for (int beta : {1, 2})
    for (std::size_t k : {1u, 2u, 4u})
      for (double x : {0.3, 1.0, 1.7}) {
        const double q = integrate([&](double y) { return limit_density_smallest(k, beta, y); }, 0.0, x).value;
        EXPECT_NEAR(limit_cdf_smallest(k, beta, x), q, 1e-10);
      }
  const double c = 0.7;
  for (std::size_t k : {1u, 3u})
    for (double x : {-1.0, 0.5, 3.0}) {
      const double q = integrate([&](double y) { return limit_density_largest(k, c, y); }, -30.0, x).value;
      EXPECT_NEAR(limit_cdf_largest(k, c, x), q, 1e-9);
    }
}

TEST(Extremes, LimitMeanOfSmallestGap) {
  // tau^p ~ Gamma(k, 1), so E tau = Gamma(k + 1/p)/Gamma(k)
  for (int beta : {1, 2}) {
    const double p = beta + 1.0;
    const double m = integrate([&](double y) { return y * limit_density_smallest(2, beta, y); }, 0.0, 8.0).value;
    EXPECT_NEAR(m, boost::math::tgamma(2.0 + 1.0 / p) / boost::math::tgamma(2.0), 1e-9);
  }
}

TEST(Extremes, GlaisherConstant) {
  EXPECT_NEAR(log_glaisher(), static_cast<double>(log_glaisher_by_hyperfactorial()), 1e-11);
  EXPECT_NEAR(zeta_prime_minus_one(), 1.0 / 12.0 - static_cast<double>(log_glaisher_by_hyperfactorial()), 1e-11);
}

TEST(Extremes, GumbelConstantSymmetryAndOrientation) {
  const double c = gumbel_constant({-1.0, 1.0});
  const double expected = std::numbers::ln2 / 12.0 + 3.0 * zeta_prime_minus_one() + 1.5 * std::log(3.0) -
                          std::log(4.0) + std::numbers::ln2;
  EXPECT_NEAR(c, expected, 1e-14);
  EXPECT_DOUBLE_EQ(gumbel_constant({-0.5, 1.2}), gumbel_constant({-1.2, 0.5}));
  EXPECT_THROW(gumbel_constant({-3.0, 1.0}), DomainError);
}

TEST(Extremes, IntensityMatchesSmallestGapLaw) {
  // for a Poisson limit P(tau_1 > x) = exp(-mu([0, y] x I)) with y the raw rescaling of x
  const Interval iv{-1.0, 1.0};
  const std::size_t n = 400;
  for (int beta : {1, 2}) {
    const double ratio = std::pow(static_cast<double>(n), gap_exponent(beta)) / smallest_gap_scale(iv, n, beta);
    for (double x : {0.5, 1.0, 1.5}) {
      const double mu = intensity({0.0, x * ratio}, iv, beta);
      EXPECT_NEAR(1.0 - std::exp(-mu), limit_cdf_smallest(1, beta, x), 1e-12);
    }
  }
  EXPECT_EQ(intensity({0.5, 0.5}, iv, 2), 0.0);
}

TEST(Extremes, GapProcessAndOrderStatistics) {
  const Spectrum s{{-1.5, -0.9, -0.8, -0.2, 0.0, 0.6, 1.9}, 2};
  const auto pts = gap_process(s, 0.3);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts.front().index, 1u);
  EXPECT_NEAR(pts.front().rescaled_gap, std::pow(7.0, 4.0 / 3.0) * 0.6, 1e-12);
  const Interval iv{-1.0, 1.0};
  EXPECT_NEAR(k_smallest_rescaled(s, iv, 1), smallest_gap_scale(iv, 7, 2) * 0.1, 1e-12);
  EXPECT_NEAR(k_smallest_rescaled(s, iv, 2), smallest_gap_scale(iv, 7, 2) * 0.2, 1e-12);
  EXPECT_NEAR(k_largest_rescaled(s, iv, 1), rescale_largest_gap(1.3, 7, iv), 1e-12);
  EXPECT_THROW(k_smallest_rescaled(s, iv, 9), DomainError);
  EXPECT_THROW(k_largest_rescaled(Spectrum{s.values, 1}, iv, 1), DomainError);
  EXPECT_EQ(count_points(pts, {0.0, 1e9}, iv), 5u);
}

TEST(Extremes, KsMatchesKolmogorovLaw) {
  // uniform samples: (sqrt(n) + 0.12 + 0.11/sqrt(n)) D_n is close to the Kolmogorov law
  const double n = 500.0, scale = std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n);
  std::vector<double> ds;
  for (std::uint64_t r = 0; r < 400; ++r) {
    RandomStream s(31, r);
    std::vector<double> u(500);
    for (double& x : u) x = s.uniform();
    ds.push_back(scale * ks_distance(u, [](double x) { return x; }));
  }
  auto kolmogorov = [](double x) {
    if (x <= 0.0) return 0.0;
    double s = 0.0;
    for (int k = 1; k < 100; ++k) s += (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
    return 1.0 - 2.0 * s;
  };
  EXPECT_LT(ks_distance(ds, kolmogorov), 0.08);
}

TEST(Extremes, DistancesOnSmallSamples) {
  const std::vector<double> a{0.0, 1.0, 2.0}, b{0.5, 1.5, 2.5}, c{0.0, 3.0};
  EXPECT_NEAR(w1_distance(a, b), 0.5, 1e-15);
  EXPECT_NEAR(w1_distance(a, c), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(ks_distance(a, b), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(ks_distance(a, a), 0.0);
  const KsResult r = ks_test(std::vector<double>{0.5}, [](double x) { return x; });
  EXPECT_NEAR(r.distance, 0.5, 1e-15);
}

TEST(Extremes, PoissonDispersion) {
  RandomStream s(4, 0);
  std::vector<std::int64_t> counts;
  for (int i = 0; i < 20000; ++i) {
    // Poisson(3) by inversion
    double u = s.uniform(), p = std::exp(-3.0), f = p;
    std::int64_t k = 0;
    while (u > f) {
      ++k;
      p *= 3.0 / static_cast<double>(k);
      f += p;
    }
    counts.push_back(k);
  }
  const Dispersion d = poisson_dispersion(counts);
  EXPECT_NEAR(d.mean, 3.0, 0.05);
  EXPECT_NEAR(d.ratio, 1.0, 0.04);
  EXPECT_EQ(poisson_dispersion(std::vector<std::int64_t>{2, 2}).ratio, 0.0);
}

TEST(Extremes, EdgeFluctuationReflection) {
  std::vector<double> v(100);
  for (std::size_t k = 1; k <= 100; ++k) v[k - 1] = classical_location(k, 100) + (k == 10 ? 1e-3 : 0.0);
  const Spectrum s{v, 1};
  EXPECT_GT(edge_fluctuation(s, 10), 0.0);
  Spectrum r{v, 1};
  for (auto& x : r.values) x = -x;
  std::reverse(r.values.begin(), r.values.end());
  EXPECT_NEAR(edge_fluctuation(r, 10, Edge::upper), edge_fluctuation(s, 10), 1e-6);
  EXPECT_THROW(edge_fluctuation(s, 1), DomainError);
  EXPECT_NEAR(edge_fluctuation_constant(2), std::cbrt(1.5) * std::numbers::pi * std::sqrt(2.0), 1e-15);
}
