#ifndef RMX_ERRORS_HPP_
#define RMX_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rmx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs was violated (bad size, interval, index...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical method failed (non-convergence, blow-up, collision).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace rmx

#endif  // RMX_ERRORS_HPP_
