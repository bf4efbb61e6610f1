#ifndef RMX_EIGENSOLVER_HPP_
#define RMX_EIGENSOLVER_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rmx/errors.hpp"
#include "rmx/matrix.hpp"

namespace rmx {

/// Real symmetric tridiagonal matrix: diagonal d (n) and off-diagonal e (n-1).
struct Tridiagonal {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;
};

namespace detail {

inline void require_finite(const double* p, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k)
    if (!std::isfinite(p[k])) throw DomainError("eigenvalues: non-finite matrix entry");
}

}  // namespace detail

/// Householder reduction of a real symmetric matrix. Only the lower triangle
/// is read. Each step applies A <- H A H with H = I - tau v v^T through the
/// symmetric rank-2 update A -= v w^T + w v^T, w = p - (tau/2)(p.v) v, p = tau A v.
///
/// The rank-2 update of step k and the matrix-vector product of step k+1 share
/// one sweep over the trailing triangle: the next reflector only needs the
/// updated column k+1, which is formed ahead of the sweep.
inline Tridiagonal tridiagonalize(RealMatrix a) {
  const std::size_t n = a.size();
  Tridiagonal t;
  t.diagonal.resize(n);
  t.off_diagonal.resize(n > 0 ? n - 1 : 0);
  if (n == 0) return t;
  if (n == 1) {
    t.diagonal[0] = a(0, 0);
    return t;
  }
  std::vector<double> v(n), w(n), v_next(n), y_next(n), col(n);

  // Reflector annihilating x[1..] of column segment x = col[m..n); returns tau,
  // writes v[m..n) and the off-diagonal value.
  auto make_reflector = [&](std::size_t m, std::vector<double>& vv, double& offdiag) {
    const double alpha = col[m];
    double sigma = 0.0;
    for (std::size_t i = m + 1; i < n; ++i) sigma += col[i] * col[i];
    if (sigma == 0.0) {
      offdiag = alpha;
      return 0.0;
    }
    const double norm = std::sqrt(alpha * alpha + sigma);
    const double beta = alpha >= 0.0 ? -norm : norm;
    const double scale = 1.0 / (alpha - beta);
    vv[m] = 1.0;
    for (std::size_t i = m + 1; i < n; ++i) vv[i] = col[i] * scale;
    offdiag = beta;
    return (beta - alpha) / beta;
  };

  // First reflector and its matrix-vector product, unfused.
  double tau = 0.0;
  if (n > 2) {
    for (std::size_t i = 1; i < n; ++i) col[i] = a(i, 0);
    tau = make_reflector(1, v, t.off_diagonal[0]);
    std::fill(w.begin(), w.end(), 0.0);
    if (tau != 0.0) {
      for (std::size_t i = 1; i < n; ++i) {
        const double* row = a.data() + i * n;
        const double vi = v[i];
        double s = 0.0;
        for (std::size_t j = 1; j < i; ++j) {
          s += row[j] * v[j];
          w[j] += row[j] * vi;
        }
        w[i] += s + row[i] * vi;
      }
    }
  }

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = k + 1;
    t.diagonal[k] = a(k, k);
    // w currently holds y = A22 v
    if (tau != 0.0) {
      double pv = 0.0;
      for (std::size_t i = m; i < n; ++i) {
        w[i] *= tau;
        pv += w[i] * v[i];
      }
      const double c = -0.5 * tau * pv;
      for (std::size_t i = m; i < n; ++i) w[i] += c * v[i];
    }
    const bool has_next = m + 2 < n;
    double tau_next = 0.0;
    if (has_next) {
      for (std::size_t i = m + 1; i < n; ++i)
        col[i] = tau != 0.0 ? a(i, m) - (v[i] * w[m] + w[i] * v[m]) : a(i, m);
      tau_next = make_reflector(m + 1, v_next, t.off_diagonal[m]);
      std::fill(y_next.begin(), y_next.end(), 0.0);
    }
    const bool fuse = has_next && tau_next != 0.0;
    const std::size_t m2 = m + 1;
    if (tau != 0.0) {
      a(m, m) -= 2.0 * v[m] * w[m];
      for (std::size_t i = m2; i < n; ++i) {
        double* row = a.data() + i * n;
        const double vi = v[i], wi = w[i];
        row[m] -= vi * w[m] + wi * v[m];
        if (fuse) {
          const double ui = v_next[i];
          double s = 0.0;
          for (std::size_t j = m2; j < i; ++j) {
            const double x = row[j] - (vi * w[j] + wi * v[j]);
            row[j] = x;
            s += x * v_next[j];
            y_next[j] += x * ui;
          }
          row[i] -= vi * w[i] + wi * v[i];
          y_next[i] += s + row[i] * ui;
        } else {
          for (std::size_t j = m2; j <= i; ++j) row[j] -= vi * w[j] + wi * v[j];
        }
      }
    } else if (fuse) {
      for (std::size_t i = m2; i < n; ++i) {
        const double* row = a.data() + i * n;
        const double ui = v_next[i];
        double s = 0.0;
        for (std::size_t j = m2; j < i; ++j) {
          s += row[j] * v_next[j];
          y_next[j] += row[j] * ui;
        }
        y_next[i] += s + row[i] * ui;
      }
    }
    if (has_next) {
      std::swap(v, v_next);
      std::swap(w, y_next);
      tau = tau_next;
    }
  }
  t.diagonal[n - 2] = a(n - 2, n - 2);
  if (n == 2) t.off_diagonal[0] = a(1, 0);
  else if (t.off_diagonal.size() >= 1) {
    // last off-diagonal comes from the final 2x2 block
    t.off_diagonal[n - 2] = a(n - 1, n - 2);
  }
  t.diagonal[n - 1] = a(n - 1, n - 1);
  return t;
}

/// Complex Householder reduction of a Hermitian matrix (lower triangle read).
/// Reflectors H = I - tau v v^H with H^H x = beta e1, beta real, so the
/// resulting tridiagonal is already real; this is the diagonal phase
/// rotation folded into the reflector choice.
inline Tridiagonal tridiagonalize(const ComplexMatrix& h) {
  const std::size_t n = h.size();
  Tridiagonal t;
  t.diagonal.resize(n);
  t.off_diagonal.resize(n > 0 ? n - 1 : 0);
  if (n == 0) return t;
  // split storage keeps the inner loops vectorizable
  std::vector<double> re(n * n), im(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      re[i * n + j] = h(i, j).real();
      im[i * n + j] = h(i, j).imag();
    }
  std::vector<double> vr(n), vi(n), wr(n), wi(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = k + 1;
    const double ar = re[m * n + k], ai = im[m * n + k];
    double sigma = 0.0;
    for (std::size_t i = m + 1; i < n; ++i)
      sigma += re[i * n + k] * re[i * n + k] + im[i * n + k] * im[i * n + k];
    t.diagonal[k] = re[k * n + k];
    if (sigma == 0.0) {
      t.off_diagonal[k] = std::hypot(ar, ai);
      continue;
    }
    const double norm = std::sqrt(ar * ar + ai * ai + sigma);
    const double beta = ar >= 0.0 ? -norm : norm;
    // tau = (beta - alpha) / beta, v = x / (alpha - beta)
    const double tr = (beta - ar) / beta, ti = -ai / beta;
    const double dr = ar - beta, di = ai;
    const double dd = dr * dr + di * di;
    const double sr = dr / dd, si = -di / dd;  // 1 / (alpha - beta)
    vr[m] = 1.0;
    vi[m] = 0.0;
    for (std::size_t i = m + 1; i < n; ++i) {
      const double xr = re[i * n + k], xi = im[i * n + k];
      vr[i] = xr * sr - xi * si;
      vi[i] = xr * si + xi * sr;
    }
    t.off_diagonal[k] = std::abs(beta);

    // y = A22 v; A_ij for j < i is stored, A_ji = conj(A_ij).
    std::fill(wr.begin() + m, wr.end(), 0.0);
    std::fill(wi.begin() + m, wi.end(), 0.0);
    for (std::size_t i = m; i < n; ++i) {
      const double* rr = re.data() + i * n;
      const double* ri = im.data() + i * n;
      const double vri = vr[i], vii = vi[i];
      double sr2 = 0.0, si2 = 0.0;
      for (std::size_t j = m; j < i; ++j) {
        sr2 += rr[j] * vr[j] - ri[j] * vi[j];
        si2 += rr[j] * vi[j] + ri[j] * vr[j];
        wr[j] += rr[j] * vri + ri[j] * vii;
        wi[j] += rr[j] * vii - ri[j] * vri;
      }
      wr[i] += sr2 + rr[i] * vri;
      wi[i] += si2 + rr[i] * vii;
    }
    // c = v^H y (real); w = tau y - (|tau|^2 c / 2) v
    double c = 0.0;
    for (std::size_t i = m; i < n; ++i) c += vr[i] * wr[i] + vi[i] * wi[i];
    const double shift = 0.5 * (tr * tr + ti * ti) * c;
    for (std::size_t i = m; i < n; ++i) {
      const double yr = wr[i], yi = wi[i];
      wr[i] = tr * yr - ti * yi - shift * vr[i];
      wi[i] = tr * yi + ti * yr - shift * vi[i];
    }
    // A -= w v^H + v w^H
    for (std::size_t i = m; i < n; ++i) {
      double* rr = re.data() + i * n;
      double* ri = im.data() + i * n;
      const double wri = wr[i], wii = wi[i], vri = vr[i], vii = vi[i];
      for (std::size_t j = m; j <= i; ++j) {
        rr[j] -= wri * vr[j] + wii * vi[j] + vri * wr[j] + vii * wi[j];
        ri[j] -= wii * vr[j] - wri * vi[j] + vii * wr[j] - vri * wi[j];
      }
    }
  }
  if (n >= 2) {
    t.diagonal[n - 2] = re[(n - 2) * n + (n - 2)];
    t.off_diagonal[n - 2] = std::hypot(re[(n - 1) * n + (n - 2)], im[(n - 1) * n + (n - 2)]);
  }
  t.diagonal[n - 1] = re[(n - 1) * n + (n - 1)];
  return t;
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL with
/// Wilkinson shifts. Returned in ascending order.
inline std::vector<double> tridiagonal_eigenvalues(Tridiagonal t, int max_sweeps = 50) {
  std::vector<double>& d = t.diagonal;
  const std::size_t n = d.size();
  std::vector<double> e(n, 0.0);
  std::copy(t.off_diagonal.begin(), t.off_diagonal.end(), e.begin());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == max_sweeps)
          throw NumericalError("eigenvalues: QL did not converge for eigenvalue index " +
                               std::to_string(l));
        // Wilkinson shift from the leading 2x2 block
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        std::size_t i = m;
        bool underflow = false;
        while (i-- > l) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

/// Sorted eigenvalues of a real symmetric matrix.
inline std::vector<double> symmetric_eigenvalues(const RealMatrix& a) {
  detail::require_finite(a.data(), a.size() * a.size());
  return tridiagonal_eigenvalues(tridiagonalize(a));
}

/// Sorted eigenvalues of a complex Hermitian matrix.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a) {
  detail::require_finite(reinterpret_cast<const double*>(a.data()), 2 * a.size() * a.size());
  return tridiagonal_eigenvalues(tridiagonalize(a));
}

}  // namespace rmx

#endif  // RMX_EIGENSOLVER_HPP_
