// Draws a few GUE matrices, prints the rescaled smallest bulk gap of each next
// to the limiting CDF, then couples one Wigner matrix to a GUE matrix through
// Dyson Brownian motion and reports how fast the bulk gaps homogenize.

#include <cstdio>
#include <vector>

#include "rmx/dbm.hpp"
#include "rmx/ensembles.hpp"
#include "rmx/experiments.hpp"
#include "rmx/extremes.hpp"
#include "rmx/spectral.hpp"
#include "rmx/tracy_widom.hpp"

int main() {
  using namespace rmx;
  const std::size_t n = 200;
  const Interval bulk{-1.0, 1.0};
  const EnsembleSpec gue = EnsembleSpec::wigner(SymmetryClass::hermitian, n);

  std::printf("sample  tau_1     P(tau_1 <= x)\n");
  for (std::uint64_t id = 0; id < 5; ++id) {
    const Spectrum s = eigenvalues(sample_matrix(gue, RandomStream(2024, id)));
    const double tau = k_smallest_rescaled(s, bulk, 1);
    std::printf("%6llu  %.5f   %.4f\n", static_cast<unsigned long long>(id), tau, limit_cdf_smallest(1, 2, tau));
  }

  const Spectrum s = eigenvalues(sample_matrix(gue, RandomStream(2024, 99)));
  std::printf("\nN^(2/3)(lambda_N - 2) = %.4f, TW2 CDF there = %.4f\n", edge_statistic(s), tw_cdf(2, edge_statistic(s)));

  const EnsembleSpec wig = EnsembleSpec::wigner(SymmetryClass::hermitian, n, EntryLaw{EntryLawKind::rademacher});
  const std::vector<double> grid{0.0, 0.05, 0.1, 0.2, 0.4};
  const RandomStream stream(7, 0);
  const Spectrum lambda0 = eigenvalues(sample_matrix(wig, stream.split(0)));
  const Spectrum mu0 = eigenvalues(sample_invariant_gaussian(SymmetryClass::hermitian, n, stream.split(1)));
  const CoupledTrajectory traj = couple_particle(lambda0, mu0, 2.0, grid, stream);
  std::printf("\n   t    median bulk |gap error|\n");
  for (double t : grid) std::printf("%5.2f  %.3e\n", t, bulk_gap_error(traj, t));
  return 0;
}
