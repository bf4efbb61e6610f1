#include <gtest/gtest.h>

#include <boost/math/special_functions/airy.hpp>
#include <cmath>

#include "rmx/airy.hpp"

using namespace rmx;

TEST(Airy, MatchesBoost) {
  double worst = 0;
  for (double s = kAiryMin; s <= kAiryMax; s += 0.0625) {
    const double a = boost::math::airy_ai(s), ap = boost::math::airy_ai_prime(s);
    const AiryValue v = airy_both(s);
    const double scale_a = std::max(std::abs(a), 1e-300), scale_p = std::max(std::abs(ap), 1e-300);
    // relative away from zeros, absolute near them
    worst = std::max(worst, std::abs(static_cast<double>(v.ai) - a) / std::max(scale_a, 1e-3 * std::exp(-std::max(s, 0.0))));
    worst = std::max(worst, std::abs(static_cast<double>(v.aip) - ap) / std::max(scale_p, 1e-3 * std::exp(-std::max(s, 0.0))));
  }
  EXPECT_LT(worst, 1e-11);
}

TEST(Airy, WronskianWithBi) {
  // Ai Bi' - Ai' Bi = 1/pi
  for (double s : {-9.5, -4.0, 0.0, 3.0, 6.5}) {
    const double w = airy(s) * boost::math::airy_bi_prime(s) - airy_prime(s) * boost::math::airy_bi(s);
    EXPECT_NEAR(w, 1.0 / std::numbers::pi, 1e-11);
  }
}

TEST(Airy, SatisfiesEquation) {
  for (double s : {-7.3, -2.0, 1.0, 5.5, 9.0}) {
    const double h = 1e-4;
    const double d2 = (airy_prime(s + h) - airy_prime(s - h)) / (2 * h);
    EXPECT_NEAR(d2, s * airy(s), 1e-7 * std::max(1.0, std::abs(s * airy(s))));
  }
}

TEST(Airy, RangeChecked) {
  EXPECT_THROW(airy(-10.5), DomainError);
  EXPECT_THROW(airy(12.5), DomainError);
  EXPECT_THROW(airy(std::nan("")), DomainError);
}
