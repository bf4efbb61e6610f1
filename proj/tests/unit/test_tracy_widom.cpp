#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <functional>
#include <vector>

#include "rmx/ensembles.hpp"
#include "rmx/tracy_widom.hpp"

using namespace rmx;

namespace {

// Fredholm determinant det(I - K) on [a, b] by Gauss-Legendre (Nystrom).
double fredholm_det(const std::function<double(double, double)>& kernel, double a, double b) {
  using Rule = boost::math::quadrature::gauss<double, 60>;
  std::vector<double> x, w;
  const auto& ab = Rule::abscissa();
  const auto& wt = Rule::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    x.push_back(c + h * ab[i]);
    w.push_back(h * wt[i]);
    if (ab[i] != 0.0) {
      x.push_back(c - h * ab[i]);
      w.push_back(h * wt[i]);
    }
  }
  const std::size_t m = x.size();
  std::vector<double> a_mat(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      a_mat[i * m + j] = (i == j ? 1.0 : 0.0) - std::sqrt(w[i]) * kernel(x[i], x[j]) * std::sqrt(w[j]);
  double det = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < m; ++i)
      if (std::abs(a_mat[i * m + k]) > std::abs(a_mat[p * m + k])) p = i;
    if (p != k) {
      for (std::size_t j = 0; j < m; ++j) std::swap(a_mat[k * m + j], a_mat[p * m + j]);
      det = -det;
    }
    det *= a_mat[k * m + k];
    for (std::size_t i = k + 1; i < m; ++i) {
      const double f = a_mat[i * m + k] / a_mat[k * m + k];
      for (std::size_t j = k; j < m; ++j) a_mat[i * m + j] -= f * a_mat[k * m + j];
    }
  }
  return det;
}

double airy_kernel(double x, double y) {
  using boost::math::airy_ai;
  using boost::math::airy_ai_prime;
  if (std::abs(x - y) < 1e-9) return airy_ai_prime(x) * airy_ai_prime(x) - x * airy_ai(x) * airy_ai(x);
  return (airy_ai(x) * airy_ai_prime(y) - airy_ai_prime(x) * airy_ai(y)) / (x - y);
}

double f2_oracle(double s) { return fredholm_det(airy_kernel, s, s + 16.0); }

// the kernel depends on (x + y)/2, so the cut must reach 2(12 - s) for the
// truncation to be negligible along the whole boundary
double f1_oracle(double s) {
  return fredholm_det([s](double x, double y) { return 0.5 * boost::math::airy_ai(0.5 * (x + y) + s); }, 0.0,
                      2.0 * (12.0 - s));
}

}  // namespace

TEST(HastingsMcLeod, AsymptoticsAtBothEnds) {
  std::vector<double> grid;
  for (double s = 10.0; s >= -10.0; s -= 0.25) grid.push_back(s);
  const PainleveSolution sol = hastings_mcleod(grid);
  EXPECT_NEAR(sol.shooting_factor, 1.0, 1e-6);
  const double s = sol.s.back();
  EXPECT_NEAR(s, -10.0, 1e-12);
  // q(s) ~ sqrt(-s/2) (1 + 1/(8 s^3)) for s -> -inf
  EXPECT_NEAR(sol.q.back(), std::sqrt(-s / 2.0) * (1.0 + 1.0 / (8.0 * s * s * s)), 1e-5);
  for (std::size_t i = 0; i < sol.s.size() && sol.s[i] >= 4.0; ++i)
    EXPECT_NEAR(sol.q[i], boost::math::airy_ai(sol.s[i]), 1e-8) << sol.s[i];
  for (std::size_t i = 1; i < sol.s.size(); ++i) {
    ASSERT_GT(sol.q[i], sol.q[i - 1]);
    if (sol.s[i] == 0.0) EXPECT_NEAR(sol.q[i], 0.36706155154807, 1e-9);
  }
}

TEST(TracyWidom, MatchesFredholmDeterminants) {
  const TwTable& t1 = tw_table(1);
  const TwTable& t2 = tw_table(2);
  for (double s : {-5.0, -3.7, -2.0, -1.1, 0.0, 0.77, 2.0, 4.0}) {
    EXPECT_NEAR(t2(s), f2_oracle(s), 2e-9) << s;
    EXPECT_NEAR(t1(s), f1_oracle(s), 2e-9) << s;
  }
}

TEST(TracyWidom, MomentsAndShape) {
  const TwTable& t1 = tw_table(1);
  const TwTable& t2 = tw_table(2);
  EXPECT_NEAR(t2.mean(), -1.7710868074, 1e-7);
  EXPECT_NEAR(t1.mean(), -1.2065335745, 1e-7);
  EXPECT_NEAR(t2.variance(), 0.8131947928, 1e-6);
  EXPECT_NEAR(t1.variance(), 1.6077810345, 1e-6);
  for (const TwTable* t : {&t1, &t2}) {
    for (std::size_t i = 1; i < t->cdf.size(); ++i) ASSERT_GE(t->cdf[i], t->cdf[i - 1]);
    for (double s = -9.99; s < 5.99; s += 0.013) {
      const double h = 1e-5;
      EXPECT_NEAR(t->pdf(s), ((*t)(s + h) - (*t)(s - h)) / (2 * h), 1e-6);
    }
    EXPECT_LT(t->accuracy, 1e-7);
  }
  for (std::size_t i = 0; i < t1.grid.size(); ++i) ASSERT_LT(t1.cdf[i], std::sqrt(t2.cdf[i]));
}

TEST(TracyWidom, ClampsOutsideTable) {
  bool clamped = false;
  EXPECT_EQ(tw_cdf(2, 7.0, &clamped), tw_table(2).cdf.back());
  EXPECT_TRUE(clamped);
  tw_cdf(2, 0.0, &clamped);
  EXPECT_FALSE(clamped);
  EXPECT_EQ(tw_cdf(1, -20.0, &clamped), tw_table(1).cdf.front());
  EXPECT_TRUE(clamped);
  EXPECT_LT(tw_table(1).cdf.front(), 1e-6);
  EXPECT_LT(tw_table(2).cdf.front(), 1e-6);
  EXPECT_GT(tw_table(2).cdf.back(), 1.0 - 1e-8);
  // 1 - F1(6) is about 2e-6, so the TW1 table cannot reach 1 - 1e-8 at s = 6
  EXPECT_GT(tw_table(1).cdf.back(), 1.0 - 1e-5);
  EXPECT_THROW(tw_table(3), DomainError);
}

TEST(TracyWidom, RebuildAtTwoTolerancesAgrees) {
  TwBuildOptions a, b;
  a.tolerance = 1e-10;
  b.tolerance = 1e-13;
  const TwTable x = build_tw_table(2, a), y = build_tw_table(2, b);
  double d = 0;
  for (std::size_t i = 0; i < x.cdf.size(); ++i) d = std::max(d, std::abs(x.cdf[i] - y.cdf[i]));
  EXPECT_LT(d, 1e-7);
}

TEST(EdgeRate, RowsAndDeterminism) {
  const auto base = EnsembleSpec::wigner(SymmetryClass::hermitian, 50);
  const auto a = edge_rate_experiment(base, {30, 60}, 40, 5, 1);
  const auto b = edge_rate_experiment(base, {30, 60}, 40, 5, 3);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1].statistics, b[1].statistics);
  EXPECT_EQ(a[0].n, 30u);
  EXPECT_GT(a[0].d_k, 0.0);
  EXPECT_LT(a[0].d_k, 1.0);
  EXPECT_THROW(edge_rate_experiment(base, {60, 30}, 10, 1), DomainError);
}
