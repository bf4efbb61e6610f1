#ifndef RMX_AIRY_HPP_
#define RMX_AIRY_HPP_

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "rmx/errors.hpp"

namespace rmx {

/// Ai and Ai' at one point.
struct AiryValue {
  long double ai = 0;
  long double aip = 0;
};

namespace detail {

// Ai(0) and -Ai'(0)
inline constexpr long double kAiryC1 = 0.355028053887817239260063186004183176L;
inline constexpr long double kAiryC2 = 0.258819403792806798405183560189203963L;

inline AiryValue airy_maclaurin(long double x) {
  // Ai = c1 f - c2 g with f = sum a_n x^{3n}, g = sum b_n x^{3n+1}
  long double f = 1, g = x, fp = 0, gp = 1;
  long double tf = 1, tg = x;
  const long double x3 = x * x * x;
  for (int n = 1; n < 200; ++n) {
    const long double k = 3.0L * n;
    tf *= x3 / ((k - 1) * k);
    tg *= x3 / (k * (k + 1));
    f += tf;
    g += tg;
    fp += tf * k / x;
    gp += tg * (k + 1) / x;
    if (std::abs(tf) + std::abs(tg) < 1e-24L * (std::abs(f) + std::abs(g))) break;
  }
  if (x == 0) fp = 0, gp = 1;
  return {kAiryC1 * f - kAiryC2 * g, kAiryC1 * fp - kAiryC2 * gp};
}

// Asymptotic expansion for large positive x, truncated at the smallest term.
inline AiryValue airy_asymptotic(long double x) {
  const long double pi = std::numbers::pi_v<long double>;
  const long double zeta = 2.0L / 3.0L * x * std::sqrt(x);
  long double u = 1, v = 1, sa = 1, sp = 1;
  long double last = 1;
  for (int k = 1; k < 60; ++k) {
    u *= (6.0L * k - 5) * (6.0L * k - 3) * (6.0L * k - 1) / ((2.0L * k - 1) * 216.0L * k);
    v = -(6.0L * k + 1) / (6.0L * k - 1) * u;
    const long double p = std::pow(-zeta, -k);
    const long double term = u * p;
    if (std::abs(term) > last) break;
    last = std::abs(term);
    sa += term;
    sp += v * p;
    if (last < 1e-22L) break;
  }
  const long double e = std::exp(-zeta);
  const long double x4 = std::sqrt(std::sqrt(x));
  return {e / (2 * std::sqrt(pi) * x4) * sa, -x4 * e / (2 * std::sqrt(pi)) * sp};
}

// Continues (Ai, Ai') from x0 to x1 with local power series of y'' = x y.
// Used only in directions where Ai is not the decaying solution.
inline AiryValue airy_continue(AiryValue start, long double x0, long double x1) {
  const int steps = static_cast<int>(std::ceil(std::abs(x1 - x0) / 0.25L));
  const long double h = steps > 0 ? (x1 - x0) / steps : 0;
  long double y = start.ai, yp = start.aip, x = x0;
  for (int s = 0; s < steps; ++s) {
    // y(x + t) = sum c_n t^n, (n+2)(n+1) c_{n+2} = x c_n + c_{n-1}
    long double cm1 = 0, c0 = y, c1 = yp;
    long double val = c0 + c1 * h, der = c1;
    long double hp = h;  // h^{n+1} for the next c_{n+2}
    long double cn = c0, cn1 = c1, cprev = cm1;
    for (int n = 0; n < 80; ++n) {
      const long double c2 = (x * cn + cprev) / ((n + 2.0L) * (n + 1.0L));
      der += (n + 2.0L) * c2 * hp;
      hp *= h;
      const long double add = c2 * hp;
      val += add;
      cprev = cn;
      cn = cn1;
      cn1 = c2;
      if (n > 4 && std::abs(add) < 1e-26L * (std::abs(val) + 1e-300L)) break;
    }
    y = val;
    yp = der;
    x += h;
  }
  return {y, yp};
}

}  // namespace detail

inline constexpr double kAiryMin = -10.0;
inline constexpr double kAiryMax = 12.0;

/// Ai(s) and Ai'(s) for s in [-10, 12], about 1e-12 relative or better.
/// Maclaurin series on [-5, 5]; the asymptotic expansion for s >= 8; power
/// series continuation of the Airy equation from 8 down to 5 and from -5 down
/// to -10, i.e. always in a direction where Ai is not the decaying solution.
inline AiryValue airy_both(double s) {
  if (!(s >= kAiryMin && s <= kAiryMax))
    throw DomainError("airy: argument " + std::to_string(s) + " outside [-10, 12]");
  const long double x = s;
  if (x >= 8) return detail::airy_asymptotic(x);
  if (x > 5) return detail::airy_continue(detail::airy_asymptotic(8), 8, x);
  if (x >= -5) return detail::airy_maclaurin(x);
  return detail::airy_continue(detail::airy_maclaurin(-5), -5, x);
}

inline double airy(double s) { return static_cast<double>(airy_both(s).ai); }
inline double airy_prime(double s) { return static_cast<double>(airy_both(s).aip); }

}  // namespace rmx

#endif  // RMX_AIRY_HPP_
