#ifndef RMX_QUADRATURE_HPP_
#define RMX_QUADRATURE_HPP_

#include <array>
#include <cmath>
#include <queue>
#include <string>

#include "rmx/errors.hpp"

namespace rmx {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
QuadratureResult gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kKronrodWeights[7];
  double g = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double x = h * kKronrodNodes[i];
    const double s = f(c - x) + f(c + x);
    k += kKronrodWeights[i] * s;
    if (i % 2 == 1) g += kGaussWeights[i / 2] * s;
  }
  return {k * h, std::abs((k - g) * h)};
}

// Globally adaptive: the segment with the largest error estimate is bisected
// until the summed estimate meets the tolerance. Unlike a recursion that
// splits the tolerance evenly, this copes with integrable endpoint
// singularities such as sqrt(x) at 0.
template <class F>
QuadratureResult adaptive_gk(F& f, double a, double b, double tol, int max_segments) {
  struct Segment {
    double a, b;
    QuadratureResult r;
    bool operator<(const Segment& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Segment> heap;
  QuadratureResult total = gk15(f, a, b);
  heap.push({a, b, total});
  for (int n = 1; total.error > tol; ++n) {
    if (n >= max_segments)
      throw NumericalError("quadrature: tolerance " + std::to_string(tol) + " not reached on [" + std::to_string(a) +
                           ", " + std::to_string(b) + "], error estimate " + std::to_string(total.error));
    const Segment s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    if (!(m > s.a && m < s.b)) {
      // the worst segment is at the resolution limit; accept what we have
      heap.push(s);
      break;
    }
    const QuadratureResult l = gk15(f, s.a, m), r = gk15(f, m, s.b);
    heap.push({s.a, m, l});
    heap.push({m, s.b, r});
    // re-sum rather than update incrementally, to avoid drift in the totals
    if (n % 64 == 0) {
      total = {};
      auto copy = heap;
      while (!copy.empty()) {
        total.value += copy.top().r.value;
        total.error += copy.top().r.error;
        copy.pop();
      }
    } else {
      total.value += l.value + r.value - s.r.value;
      total.error += l.error + r.error - s.r.error;
    }
  }
  total = {};
  while (!heap.empty()) {
    total.value += heap.top().r.value;
    total.error += heap.top().r.error;
    heap.pop();
  }
  return total;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b] to absolute tolerance.
template <class F>
QuadratureResult integrate(F f, double a, double b, double tol = 1e-12, int max_segments = 4000) {
  if (a == b) return {};
  if (a > b) {
    QuadratureResult r = integrate(f, b, a, tol, max_segments);
    r.value = -r.value;
    return r;
  }
  return detail::adaptive_gk(f, a, b, tol, max_segments);
}

}  // namespace rmx

#endif  // RMX_QUADRATURE_HPP_
