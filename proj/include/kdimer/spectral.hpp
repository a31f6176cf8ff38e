#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kdimer/floquet.hpp"

namespace kdimer {

// Consecutive-gap ratios r_n = min(d_n, d_{n+1}) / max(d_n, d_{n+1}) of a sorted
// eigenphase list. Ratios touching a gap below 1e-12 are dropped and counted.
// The wrap-around gap between the last and first phase is not used.
struct RatioSeries {
  RVector ratios;
  int n_dropped = 0;
};

RatioSeries spacing_ratios(const RVector& sorted_phases);
double mean_r(const RatioSeries& series);

// Poisson and Wigner-Dyson (COE surmise) reference values of <r>.
inline constexpr double kPoissonMeanR = 0.38629436111989057;  // 2 ln 2 - 1
inline constexpr double kWignerDysonMeanR = 0.5307;

struct SweepResult {
  RVector k_values;
  RVector mu_values;
  RMatrix mean_r;              // rows follow k, columns follow mu; NaN marks a failed cell
  Eigen::MatrixXi n_dropped;   // -1 for failed cells
  std::vector<std::string> errors;  // "k=..,mu=..: message" for failed cells
  int two_j = 0;
  double wall_seconds = 0.0;
};

// Eigenphase source for one cell. The default diagonalizes build_floquet(spec);
// the CLI harness injects a cache-backed provider.
using PhaseProvider = std::function<RVector(const FloquetSpec&)>;

RVector floquet_eigenphases(const FloquetSpec& spec);

// One diagonalization per (k, mu) cell on a bounded worker pool. Requires
// dim = two_j + 1 >= 200. Cell failures are recorded, never thrown.
SweepResult sweep_mean_r(const RVector& k_grid, const RVector& mu_grid, int two_j, int workers = 0,
                         const PhaseProvider& provider = {}, double tau = 1.0);

// header `k,mu,two_j,mean_r,n_dropped_ratios`, one row per cell (k-major)
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace kdimer
