#ifndef RMX_ENSEMBLES_HPP_
#define RMX_ENSEMBLES_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rmx/errors.hpp"
#include "rmx/matrix.hpp"
#include "rmx/random.hpp"

namespace rmx {

enum class SymmetryClass { symmetric, hermitian };

/// Dyson index: 1 for real symmetric, 2 for complex Hermitian.
inline constexpr int beta_of(SymmetryClass c) { return c == SymmetryClass::symmetric ? 1 : 2; }

inline std::string_view to_string(SymmetryClass c) {
  return c == SymmetryClass::symmetric ? "symmetric" : "hermitian";
}

enum class EntryLawKind { gaussian, uniform, rademacher, smoothed_rademacher };

inline std::string_view to_string(EntryLawKind k) {
  switch (k) {
    case EntryLawKind::gaussian: return "gaussian";
    case EntryLawKind::uniform: return "uniform";
    case EntryLawKind::rademacher: return "rademacher";
    case EntryLawKind::smoothed_rademacher: return "smoothed_rademacher";
  }
  return "?";
}

/// Law of the unit-scale entry sqrt(N) H_ij / (N sigma_ij^2)^{1/2}: mean 0, variance 1.
struct EntryLaw {
  EntryLawKind kind = EntryLawKind::gaussian;
  double smoothing_scale = 0.0;  // only read by smoothed_rademacher

  void validate() const {
    detail::require(std::isfinite(smoothing_scale) && smoothing_scale >= 0.0,
                    "entry law: smoothing scale must be a nonnegative real");
  }

  /// Fourth moment of the unit-variance law.
  double fourth_moment() const {
    switch (kind) {
      case EntryLawKind::gaussian: return 3.0;
      case EntryLawKind::uniform: return 9.0 / 5.0;
      case EntryLawKind::rademacher: return 1.0;
      case EntryLawKind::smoothed_rademacher: {
        // (s + sigma Z) / sqrt(1 + sigma^2)
        const double v = smoothing_scale * smoothing_scale;
        return (1.0 + 6.0 * v + 3.0 * v * v) / ((1.0 + v) * (1.0 + v));
      }
    }
    return 0.0;
  }
};

enum class ProfileKind { flat, two_band, random_doubly_stochastic };

inline std::string_view to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::flat: return "flat";
    case ProfileKind::two_band: return "two_band";
    case ProfileKind::random_doubly_stochastic: return "random_doubly_stochastic";
  }
  return "?";
}

/// Symmetric matrix of entry variances sigma_ij^2 with unit row sums.
class VarianceProfile {
 public:
  static constexpr double kDefaultNonDegeneracy = 10.0;
  static constexpr double kRowSumTolerance = 1e-12;

  VarianceProfile() = default;
  VarianceProfile(RealMatrix variances, double non_degeneracy = kDefaultNonDegeneracy,
                  bool flat = false)
      : variances_(std::move(variances)), c_(non_degeneracy), flat_(flat) {
    validate();
  }

  static VarianceProfile flat(std::size_t n) {
    detail::require(n >= 2, "variance profile: N must be at least 2");
    return VarianceProfile(RealMatrix(n, 1.0 / static_cast<double>(n)),
                           kDefaultNonDegeneracy, true);
  }

  std::size_t size() const { return variances_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return variances_(i, j); }
  const RealMatrix& variances() const { return variances_; }
  double non_degeneracy() const { return c_; }
  bool is_flat() const { return flat_; }

  double max_row_sum_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      double s = 0.0;
      for (double v : variances_.row(i)) s += v;
      worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
  }

  void validate() const {
    const std::size_t n = size();
    detail::require(n >= 2, "variance profile: N must be at least 2");
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double v = variances_(i, j);
        detail::require(std::isfinite(v) && v >= 0.0, "variance profile: negative or non-finite entry");
        detail::require(v == variances_(j, i), "variance profile: not symmetric");
        detail::require(nn * v >= 1.0 / c_ && nn * v <= c_,
                        "variance profile: N*sigma^2 outside [1/C, C] at (" + std::to_string(i) +
                            "," + std::to_string(j) + ")");
      }
    const double err = max_row_sum_error();
    detail::require(err <= kRowSumTolerance,
                    "variance profile: row sums differ from 1 by " + std::to_string(err));
  }

 private:
  RealMatrix variances_;
  double c_ = kDefaultNonDegeneracy;
  bool flat_ = false;
};

struct SinkhornOptions {
  std::size_t max_iterations = 10000;
  double tolerance = 1e-13;
};

/// Symmetric Sinkhorn-Knopp scaling: returns D A D with unit row and column sums.
inline RealMatrix sinkhorn_symmetric(const RealMatrix& a, const SinkhornOptions& opts = {}) {
  const std::size_t n = a.size();
  std::vector<double> d(n, 1.0), ad(n);
  double residual = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a(i, j) * d[j];
      ad[i] = s;
      residual = std::max(residual, std::abs(d[i] * s - 1.0));
    }
    if (residual <= opts.tolerance) {
      RealMatrix out(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = d[i] * a(i, j) * d[j];
      // symmetrize bitwise and absorb the last rounding into the diagonal
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) out(j, i) = out(i, j);
      for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) off += out(i, j);
        out(i, i) = 1.0 - off;
      }
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = std::sqrt(d[i] / ad[i]);
  }
  throw NumericalError("sinkhorn: no convergence after " + std::to_string(opts.max_iterations) +
                       " iterations, residual " + std::to_string(residual));
}

inline VarianceProfile build_variance_profile(ProfileKind kind, std::size_t n, RandomStream stream,
                                              const SinkhornOptions& opts = {}) {
  detail::require(n >= 2, "variance profile: N must be at least 2");
  const double nn = static_cast<double>(n);
  switch (kind) {
    case ProfileKind::flat:
      return VarianceProfile::flat(n);
    case ProfileKind::two_band: {
      // circulant: weight 3/2 within circular distance n/4, the rest shares the remainder
      const std::size_t half_width = n / 4;
      std::size_t near = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t d = std::min(j, n - j);
        if (d <= half_width) ++near;
      }
      const double hi = 1.5;
      const double lo = (nn - hi * static_cast<double>(near)) / (nn - static_cast<double>(near));
      RealMatrix v(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t diff = i > j ? i - j : j - i;
          const std::size_t d = std::min(diff, n - diff);
          v(i, j) = (d <= half_width ? hi : lo) / nn;
        }
      for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) off += v(i, j);
        v(i, i) = 1.0 - off;
      }
      return VarianceProfile(std::move(v));
    }
    case ProfileKind::random_doubly_stochastic: {
      RealMatrix a(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          const double u = to_unit_open_right(stream.block(i * (i + 1) / 2 + j).lo);
          a(i, j) = a(j, i) = 1.0 + u;
        }
      return VarianceProfile(sinkhorn_symmetric(a, opts));
    }
  }
  throw DomainError("variance profile: unknown kind");
}

/// Which random matrix to draw.
struct EnsembleSpec {
  SymmetryClass symmetry = SymmetryClass::symmetric;
  std::size_t n = 2;
  EntryLaw entry_law{};
  std::shared_ptr<const VarianceProfile> profile;  // null means flat

  int beta() const { return beta_of(symmetry); }

  double variance(std::size_t i, std::size_t j) const {
    return profile ? (*profile)(i, j) : 1.0 / static_cast<double>(n);
  }

  void validate() const {
    detail::require(n >= 2, "ensemble: N must be at least 2");
    entry_law.validate();
    if (profile) detail::require(profile->size() == n, "ensemble: variance profile is not N x N");
  }

  static EnsembleSpec wigner(SymmetryClass c, std::size_t n, EntryLaw law = {}) {
    EnsembleSpec s;
    s.symmetry = c;
    s.n = n;
    s.entry_law = law;
    return s;
  }
};

/// One draw of a symmetric or Hermitian matrix.
struct MatrixSample {
  std::variant<RealMatrix, ComplexMatrix> data;
  EnsembleSpec spec;
  std::uint64_t stream_id = 0;

  std::size_t size() const {
    return std::visit([](const auto& m) { return m.size(); }, data);
  }
  SymmetryClass symmetry() const {
    return std::holds_alternative<RealMatrix>(data) ? SymmetryClass::symmetric
                                                    : SymmetryClass::hermitian;
  }
  const RealMatrix& real() const { return std::get<RealMatrix>(data); }
  const ComplexMatrix& complex() const { return std::get<ComplexMatrix>(data); }
};

namespace detail {

inline std::uint64_t entry_index(std::size_t i, std::size_t j) {
  // i <= j
  return static_cast<std::uint64_t>(j) * (j + 1) / 2 + i;
}

/// Unit-variance draws for entry (i, j): `first` always, `second` for the
/// imaginary part. Uses counter blocks 2*idx and 2*idx+1 only.
inline std::array<double, 2> unit_entry(const EntryLaw& law, const RandomStream& s,
                                        std::uint64_t idx) {
  switch (law.kind) {
    case EntryLawKind::gaussian:
      return s.normal_pair_at(2 * idx);
    case EntryLawKind::uniform: {
      const auto b = s.block(2 * idx + 1);
      const double r3 = std::sqrt(3.0);
      return {r3 * (2.0 * to_unit_open_right(b.lo) - 1.0),
              r3 * (2.0 * to_unit_open_right(b.hi) - 1.0)};
    }
    case EntryLawKind::rademacher: {
      const auto b = s.block(2 * idx + 1);
      return {(b.lo >> 63) ? 1.0 : -1.0, (b.hi >> 63) ? 1.0 : -1.0};
    }
    case EntryLawKind::smoothed_rademacher: {
      const auto b = s.block(2 * idx + 1);
      const auto z = s.normal_pair_at(2 * idx);
      const double sig = law.smoothing_scale;
      const double norm = 1.0 / std::sqrt(1.0 + sig * sig);
      return {((b.lo >> 63) ? 1.0 : -1.0) * norm + sig * norm * z[0],
              ((b.hi >> 63) ? 1.0 : -1.0) * norm + sig * norm * z[1]};
    }
  }
  return {0.0, 0.0};
}

}  // namespace detail

/// Draws H with independent upper-triangular entries sigma_ij * xi_ij.
/// Entry (i, j) reads only its own counter blocks, so the result does not
/// depend on fill order.
inline MatrixSample sample_matrix(const EnsembleSpec& spec, const RandomStream& stream) {
  spec.validate();
  const std::size_t n = spec.n;
  MatrixSample out;
  out.spec = spec;
  out.stream_id = stream.substream_index();
  if (spec.symmetry == SymmetryClass::symmetric) {
    RealMatrix h(n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i <= j; ++i) {
        const double x = std::sqrt(spec.variance(i, j)) *
                         detail::unit_entry(spec.entry_law, stream, detail::entry_index(i, j))[0];
        h(i, j) = x;
        h(j, i) = x;
      }
    out.data = std::move(h);
  } else {
    ComplexMatrix h(n);
    const double half = std::sqrt(0.5);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i <= j; ++i) {
        const auto xi = detail::unit_entry(spec.entry_law, stream, detail::entry_index(i, j));
        const double sd = std::sqrt(spec.variance(i, j));
        if (i == j) {
          h(i, i) = cplx(sd * xi[0], 0.0);
        } else {
          const cplx x(sd * half * xi[0], sd * half * xi[1]);
          h(i, j) = x;
          h(j, i) = std::conj(x);
        }
      }
    out.data = std::move(h);
  }
  return out;
}

/// GOE (beta=1) or GUE (beta=2) with off-diagonal E|H_ij|^2 = 1/N; the
/// diagonal has variance 2/N (GOE) or 1/N (GUE), which makes the law
/// invariant and stationary for dH = dB/sqrt(N) - H/2 dt.
inline MatrixSample sample_invariant_gaussian(SymmetryClass c, std::size_t n,
                                              const RandomStream& stream) {
  EnsembleSpec spec = EnsembleSpec::wigner(c, n);
  MatrixSample out = sample_matrix(spec, stream);
  if (c == SymmetryClass::symmetric) {
    auto& h = std::get<RealMatrix>(out.data);
    for (std::size_t i = 0; i < n; ++i) h(i, i) *= std::sqrt(2.0);
  }
  return out;
}

/// e^{-t/2} H + (1 - e^{-t})^{1/2} U for a given Gaussian part U.
inline MatrixSample ou_convolve(const MatrixSample& sample, double t, const MatrixSample& gaussian) {
  detail::require(std::isfinite(t) && t >= 0.0, "ou_convolve: t must be nonnegative");
  if (sample.symmetry() != gaussian.symmetry())
    throw DomainError("ou_convolve: symmetry class of the Gaussian part does not match H");
  detail::require(sample.size() == gaussian.size(), "ou_convolve: size mismatch");
  const double a = std::exp(-0.5 * t);
  const double b = std::sqrt(-std::expm1(-t));
  MatrixSample out = sample;
  std::visit(
      [&](auto& h) {
        using M = std::decay_t<decltype(h)>;
        const M& u = std::get<M>(gaussian.data);
        const std::size_t nn = h.size() * h.size();
        for (std::size_t k = 0; k < nn; ++k) h.data()[k] = a * h.data()[k] + b * u.data()[k];
      },
      out.data);
  return out;
}

/// Exact time-t law of the matrix OU process started at H.
inline MatrixSample ou_convolve(const MatrixSample& sample, double t, const RandomStream& stream,
                                SymmetryClass gaussian_class) {
  if (sample.symmetry() != gaussian_class)
    throw DomainError("ou_convolve: requested Gaussian class does not match H");
  return ou_convolve(sample, t, sample_invariant_gaussian(gaussian_class, sample.size(), stream));
}

inline MatrixSample ou_convolve(const MatrixSample& sample, double t, const RandomStream& stream) {
  return ou_convolve(sample, t, stream, sample.symmetry());
}

}  // namespace rmx

#endif  // RMX_ENSEMBLES_HPP_
