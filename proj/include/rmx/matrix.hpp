#ifndef RMX_MATRIX_HPP_
#define RMX_MATRIX_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rmx {

using cplx = std::complex<double>;

/// Dense row-major square matrix.
template <class T>
class SquareMatrix {
 public:
  using value_type = T;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  static SquareMatrix identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

using RealMatrix = SquareMatrix<double>;
using ComplexMatrix = SquareMatrix<cplx>;

inline double conj_if(double x) { return x; }
inline cplx conj_if(cplx x) { return std::conj(x); }

/// max_ij |A_ij - conj(A_ji)|.
template <class T>
double hermiticity_defect(const SquareMatrix<T>& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - conj_if(a(j, i))));
  return worst;
}

template <class T>
double frobenius_norm_squared(const SquareMatrix<T>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size() * a.size(); ++i) s += std::norm(a.data()[i]);
  return s;
}

template <class T>
double trace_real(const SquareMatrix<T>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::real(a(i, i));
  return s;
}

template <class T>
SquareMatrix<T> multiply(const SquareMatrix<T>& a, const SquareMatrix<T>& b) {
  const std::size_t n = a.size();
  SquareMatrix<T> c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const T aik = a(i, k);
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class T>
SquareMatrix<T> adjoint(const SquareMatrix<T>& a) {
  SquareMatrix<T> t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) t(j, i) = conj_if(a(i, j));
  return t;
}

}  // namespace rmx

#endif  // RMX_MATRIX_HPP_
