#include "kdimer/spectral.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>

#include "kdimer/csv.hpp"
#include "kdimer/parallel.hpp"

namespace kdimer {

namespace {
constexpr double kZeroSpacing = 1e-12;
}

RatioSeries spacing_ratios(const RVector& phases) {
  const auto n = phases.size();
  if (n < 3) throw ArgumentError("spacing_ratios: need at least 3 eigenphases");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(phases(i) >= phases(i - 1)))
      throw PreconditionError("spacing_ratios: eigenphases not sorted ascending");

  RatioSeries out;
  std::vector<double> kept;
  kept.reserve(n - 2);
  for (Eigen::Index i = 0; i + 2 < n; ++i) {
    const double d0 = phases(i + 1) - phases(i);
    const double d1 = phases(i + 2) - phases(i + 1);
    if (d0 < kZeroSpacing || d1 < kZeroSpacing) {
      ++out.n_dropped;
      continue;
    }
    kept.push_back(std::min(d0, d1) / std::max(d0, d1));
  }
  out.ratios = Eigen::Map<RVector>(kept.data(), static_cast<Eigen::Index>(kept.size()));
  return out;
}

double mean_r(const RatioSeries& series) {
  if (series.ratios.size() == 0) throw ArgumentError("mean_r: empty ratio series");
  return series.ratios.mean();
}

RVector floquet_eigenphases(const FloquetSpec& spec) {
  return eigenphases(build_floquet(spec).matrix);
}

SweepResult sweep_mean_r(const RVector& k_grid, const RVector& mu_grid, int two_j, int workers,
                         const PhaseProvider& provider, double tau) {
  if (k_grid.size() == 0 || mu_grid.size() == 0) throw ArgumentError("sweep: empty grid");
  if (two_j + 1 < 200) throw ArgumentError("sweep: dimension 2J+1 must be at least 200");
  const auto start = std::chrono::steady_clock::now();

  SweepResult result;
  result.k_values = k_grid;
  result.mu_values = mu_grid;
  result.two_j = two_j;
  const auto nk = static_cast<int>(k_grid.size());
  const auto nmu = static_cast<int>(mu_grid.size());
  result.mean_r = RMatrix::Constant(nk, nmu, std::numeric_limits<double>::quiet_NaN());
  result.n_dropped = Eigen::MatrixXi::Constant(nk, nmu, -1);
  std::vector<std::string> errors(static_cast<size_t>(nk) * nmu);

  parallel_for(nk * nmu, workers, [&](int cell) {
    const int ik = cell / nmu;
    const int imu = cell % nmu;
    const FloquetSpec spec{two_j, k_grid(ik), mu_grid(imu), tau};
    try {
      const RVector phases = provider ? provider(spec) : floquet_eigenphases(spec);
      const RatioSeries ratios = spacing_ratios(phases);
      result.mean_r(ik, imu) = mean_r(ratios);
      result.n_dropped(ik, imu) = ratios.n_dropped;
    } catch (const std::exception& e) {
      errors[cell] = "k=" + format_double(spec.k) + ",mu=" + format_double(spec.mu) + ": " + e.what();
    }
  });
  for (auto& e : errors)
    if (!e.empty()) result.errors.push_back(std::move(e));

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  CsvWriter csv(out);
  csv.header({"k", "mu", "two_j", "mean_r", "n_dropped_ratios"});
  for (Eigen::Index i = 0; i < result.k_values.size(); ++i)
    for (Eigen::Index j = 0; j < result.mu_values.size(); ++j) {
      csv.field(result.k_values(i)).field(result.mu_values(j)).field(result.two_j);
      csv.field(result.mean_r(i, j));
      if (result.n_dropped(i, j) >= 0)
        csv.field(result.n_dropped(i, j));
      else
        csv.field(std::string_view{});
      csv.end_row();
    }
}

}  // namespace kdimer
