#ifndef RMX_TRAJECTORY_HPP_
#define RMX_TRAJECTORY_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rmx/errors.hpp"
#include "rmx/spectral.hpp"

namespace rmx {

/// Two spectra evolved under shared noise, stored at user-chosen times.
/// lambda starts from the Wigner matrix, mu from the Gaussian ensemble.
struct CoupledTrajectory {
  std::vector<double> times;
  std::vector<Spectrum> lambda;
  std::vector<Spectrum> mu;
  std::uint64_t stream_id = 0;

  std::size_t n() const { return lambda.empty() ? 0 : lambda.front().size(); }
  int beta() const { return lambda.empty() ? 0 : lambda.front().beta; }

  /// Position of t on the stored grid; throws if t is not one of the stored times.
  std::size_t index_of(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
    throw DomainError("trajectory: t = " + std::to_string(t) + " is not on the stored grid");
  }
};

}  // namespace rmx

#endif  // RMX_TRAJECTORY_HPP_
