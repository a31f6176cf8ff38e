// One PASS/FAIL line per acceptance criterion. Arguments select criteria by
// number; without arguments all of them run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "kdimer/classical.hpp"
#include "kdimer/dynamics.hpp"
#include "kdimer/harness.hpp"
#include "kdimer/spectral.hpp"
#include "support.hpp"

using namespace kdimer;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (ok ? "" : " [miss]");
  }
};

std::string fmt(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

const InitialState& recipe_state(const std::string& recipe, const std::string& doc,
                                 const std::string& label) {
  static std::map<std::string, std::vector<ExperimentConfig>> parsed;
  auto it = parsed.find(recipe);
  if (it == parsed.end()) {
    const Recipe* r = find_recipe(recipe);
    if (!r) throw std::runtime_error("recipe " + recipe + " missing");
    it = parsed.emplace(recipe, parse_configs(r->text, false)).first;
  }
  for (const auto& c : it->second)
    if (c.name == doc)
      for (const auto& s : c.states)
        if (s.label == label) return s;
  throw std::runtime_error("state " + label + " not in " + recipe + "/" + doc);
}

double mean_r_of(const FloquetSpec& spec) { return mean_r(spacing_ratios(floquet_eigenphases(spec))); }

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * (i + j) + 1;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

void unitarity_and_spectrum(Verdict& v) {
  double worst_u = 0, worst_mod = 0, worst_res = 0;
  for (int j : {50, 200, 500})
    for (double k : {1.0, 8.0}) {
      const FloquetSpec spec{2 * j, k, 3.0, 1.0};
      const CMatrix u = build_floquet(spec).matrix;
      worst_u = std::max(worst_u, unitarity_defect(u));
      const auto schur = detail::complex_schur(u, false);
      worst_mod = std::max(worst_mod, (schur.diagonal.cwiseAbs().array() - 1.0).abs().maxCoeff());
      worst_res = std::max(worst_res, reconstruction_residual(u, eigensystem(u)));
    }
  v.require(worst_u < 1e-10, "max |U^dag U - I| = " + fmt(worst_u));
  v.require(worst_mod < 1e-8, "max ||lambda| - 1| = " + fmt(worst_mod));
  v.require(worst_res < 1e-8, "max reconstruction residual = " + fmt(worst_res));
}

void chaotic_mlsr(Verdict& v) {
  const double r = mean_r_of({2000, 8.0, 3.0, 1.0});
  v.require(std::abs(r - 0.53) <= 0.02, "<r> = " + fmt(r) + " (target 0.53 +- 0.02)");
}

void regular_mlsr(Verdict& v) {
  for (double k : {1.0, 4.0, 8.0}) {
    const double r = mean_r_of({2000, k, 6.0, 1.0});
    v.require(std::abs(r - 0.386) <= 0.02, "k = " + fmt(k) + ": <r> = " + fmt(r));
  }
}

void crossover(Verdict& v) {
  const RVector ks = RVector::LinSpaced(20, 0.5, 10.0);
  RVector mu(1);
  mu << 3.0;
  const SweepResult s = sweep_mean_r(ks, mu, 1000);
  std::vector<double> x, y;
  std::ostringstream curve;
  for (int i = 0; i < ks.size(); ++i) {
    curve << (i ? " " : "") << fmt(s.mean_r(i, 0), 3);
    if (ks(i) >= 1.0 && ks(i) <= 6.0) {
      x.push_back(ks(i));
      y.push_back(s.mean_r(i, 0));
    }
  }
  const double rho = spearman(x, y);
  const double low = s.mean_r(0, 0), high = s.mean_r(ks.size() - 1, 0);
  v.require(s.errors.empty(), "all 20 cells computed");
  v.require(rho > 0.9, "Spearman rho over k in [1, 6] = " + fmt(rho));
  v.require(std::abs(low - kPoissonMeanR) < 0.03, "<r>(0.5) = " + fmt(low) + " near Poisson");
  v.require(std::abs(high - kWignerDysonMeanR) < 0.03, "<r>(10) = " + fmt(high) + " near Wigner-Dyson");
  v.detail << "; curve: " << curve.str();
}

void parity(Verdict& v) {
  const SpinBasis b(200);
  const CMatrix p = parity_operator(b).matrix;
  const double sym = commutator_defect(build_floquet({200, 5.0, kPi, 1.0}).matrix, p);
  const double broken = commutator_defect(build_floquet({200, 5.0, 3.0, 1.0}).matrix, p);
  v.require(sym < 1e-9, "mu = pi: |[U, P]| = " + fmt(sym));
  v.require(broken > 0.1, "mu = 3: |[U, P]| = " + fmt(broken));
}

ClassicalState random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ClassicalState s;
  s.m = Vec3(n(rng), n(rng), n(rng)).normalized();
  return s;
}

void classical_conservation(Verdict& v) {
  std::mt19937_64 rng(2024);
  double de = 0, drift = 0;
  for (int n = 0; n < 1000; ++n) {
    const ClassicalState m0 = random_unit(rng);
    const ClassicalState m1 = free_flow(m0, 8.0, 1.0, 1e-3);
    de = std::max(de, std::abs(classical_energy(m1.m, 8.0) - classical_energy(m0.m, 8.0)));
    drift = std::max(drift, std::abs(m1.m.norm() - 1.0));
  }
  v.require(de < 1e-8, "max |dE| = " + fmt(de));
  v.require(drift < 1e-10, "max norm drift = " + fmt(drift));
  double e1 = 0, e2 = 0;
  for (int n = 0; n < 50; ++n) {
    const ClassicalState m0 = random_unit(rng);
    const Vec3 ref = free_flow(m0, 8.0, 1.0, 1e-4).m;
    e1 += (free_flow(m0, 8.0, 1.0, 0.02).m - ref).norm();
    e2 += (free_flow(m0, 8.0, 1.0, 0.01).m - ref).norm();
  }
  v.require(std::abs(e1 / e2 - 16.0) < 3.0, "RK4 error ratio (dt 0.02 -> 0.01, 50 states) = " + fmt(e1 / e2));
}

void classical_fixed_points(Verdict& v) {
  double worst = 0;
  for (double sx : {1.0, -1.0}) {
    ClassicalState s;
    s.m = Vec3(sx, 0.0, 0.0);
    worst = std::max(worst, (free_flow(s, 8.0, 1.0, 1e-3).m - s.m).norm());
  }
  v.require(worst < 1e-14, "poles of x move by " + fmt(worst));
  const MapParams p{8.0, 3.0, 1.0, 1e-3};
  const InitialState& seed = recipe_state("fig12", "fig12_orbit", "seed_left");
  const double seed_res = (iterate_map(ClassicalState::from_angles(seed.theta, seed.phi), p, 4).m -
                           ClassicalState::from_angles(seed.theta, seed.phi).m).norm();
  const PeriodicPoint pp = refine_periodic_point(seed.theta, seed.phi, 4, p);
  const double res = (iterate_map(pp.state, p, 4).m - pp.state.m).norm();
  const auto period = orbit_period(pp.state, p, 8, 1e-6);
  v.require(res < 1e-6, "seed residual " + fmt(seed_res) + " refined to |T^4 m - m| = " + fmt(res) +
                            " at (" + fmt(pp.theta, 8) + ", " + fmt(pp.phi, 8) + ")");
  v.require(period && *period == 4, "minimal period " + (period ? std::to_string(*period) : "none"));
}

void otoc_oracle(Verdict& v) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> th(0.0, kPi), ph(-kPi, kPi);
  double worst = 0, c0 = 0, lowest = 0;
  for (double k : {1.0, 8.0}) {
    const FloquetSpec spec{20, k, 3.0, 1.0};
    const CMatrix u = build_floquet(spec).matrix;
    const EigenSystem es = eigensystem(u);
    for (int n = 0; n < 3; ++n) {
      const CVector psi = coherent_state(spec.basis(), th(rng), ph(rng)).amplitudes;
      const RVector fast = otoc_series(psi, es, spec.basis(), 30);
      worst = std::max(worst, (fast - kdtest::dense_otoc(psi, u, 20, 30)).cwiseAbs().maxCoeff());
      c0 = std::max(c0, std::abs(fast(0)));
      lowest = std::min(lowest, fast.minCoeff());
    }
  }
  v.require(worst < 1e-10, "max deviation from dense Heisenberg = " + fmt(worst));
  v.require(c0 == 0.0, "C(0) = " + fmt(c0));
  v.require(lowest >= -1e-12, "min C = " + fmt(lowest));
}

void otoc_phenomenology(Verdict& v) {
  const InitialState& bulk = recipe_state("fig08", "fig08_otoc_k8", "diamond");
  const InitialState& short_orbit = recipe_state("fig08", "fig08_otoc_k1", "diamond");
  const FloquetSpec chaotic{400, 8.0, 3.0, 1.0}, regular{400, 1.0, 3.0, 1.0};
  const RVector c8 = otoc_series(coherent_state(chaotic.basis(), bulk.theta, bulk.phi).amplitudes,
                                 eigensystem(build_floquet(chaotic).matrix), chaotic.basis(), 100);
  const RVector c1 = otoc_series(coherent_state(regular.basis(), short_orbit.theta, short_orbit.phi).amplitudes,
                                 eigensystem(build_floquet(regular).matrix), regular.basis(), 100);
  const GrowthFit f = fit_early_growth(c8, 5);
  const GrowthFit g = fit_early_growth(c1, 5);
  v.require(f.found && f.length >= 5 && f.r2 > 0.98,
            "k = 8 bulk window t = " + std::to_string(f.t_start) + ".." + std::to_string(f.t_start + f.length - 1) +
                ", R^2 = " + fmt(f.r2) + ", slope " + fmt(f.slope));
  v.require(g.saturation * 10 <= f.saturation,
            "saturation k = 1 short orbit " + fmt(g.saturation) + " vs k = 8 bulk " + fmt(f.saturation));
}

void entanglement_oracle(Verdict& v) {
  std::mt19937_64 rng(5);
  double worst = 0;
  for (int two_j : {4, 6})
    for (int n = 0; n < 10; ++n) {
      const CVector psi = kdtest::random_state(two_j + 1, rng);
      worst = std::max(worst, (reduced_density(psi, 2).matrix - kdtest::embedded_reduced_density(psi, 2))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  v.require(worst < 1e-12, "combinatorial vs embedded rho_2: " + fmt(worst));
  std::uniform_real_distribution<double> th(0.0, kPi), ph(-kPi, kPi);
  double coh = 0;
  for (int two_j : {4, 6, 100, 800})
    for (int n = 0; n < 5; ++n)
      coh = std::max(coh, entanglement_entropy(
                              reduced_density(coherent_state(SpinBasis(two_j), th(rng), ph(rng)).amplitudes, 2)));
  v.require(coh < 1e-9, "coherent S_E <= " + fmt(coh));
  CVector ghz = CVector::Zero(101);
  ghz(0) = ghz(100) = 1.0 / std::sqrt(2.0);
  const double e = entanglement_entropy(reduced_density(ghz, 2));
  v.require(std::abs(e - std::log(2.0)) < 1e-10, "GHZ S_E - ln 2 = " + fmt(e - std::log(2.0)));
}

void self_trapping(Verdict& v) {
  const FloquetSpec spec{800, 8.0, 3.0, 1.0};
  const CMatrix u = build_floquet(spec).matrix;
  const CVector psi = coherent_state(spec.basis(), 0.15, 0.0).amplitudes;
  const RVector sz = sz_series(psi, u, spec.basis(), 200);
  const double dev = (sz.array() - sz(0)).abs().maxCoeff();
  const double se = entanglement_series(psi, u, 2, 200).maxCoeff();
  v.require(dev < 0.1, "(0.15, 0): max |S_z(t) - S_z(0)| = " + fmt(dev));
  v.require(se < 0.15, "(0.15, 0): max S_E = " + fmt(se));
}

void multifractal(Verdict& v) {
  double lo = 1, hi = 0;
  double polar_min = 1;
  std::vector<double> bulk;
  for (double k : {1.0, 8.0}) {
    const FloquetSpec spec{300, k, 3.0, 1.0};
    const PhaseGrid d2 = dq_map(eigensystem(build_floquet(spec).matrix), CoherentStateFactory(spec.basis()), 100, 100, 2.0);
    lo = std::min(lo, d2.values.minCoeff());
    hi = std::max(hi, d2.values.maxCoeff());
    if (k != 8.0) continue;
    for (int i = 0; i < d2.n_theta(); ++i)
      for (int j = 0; j < d2.n_phi(); ++j) {
        if (d2.theta(i) < 0.5 || d2.theta(i) > kPi - 0.5) polar_min = std::min(polar_min, d2.values(i, j));
        else bulk.push_back(d2.values(i, j));
      }
  }
  v.require(lo >= 0 && hi <= 1, "D2 range [" + fmt(lo) + ", " + fmt(hi) + "]");
  v.require(polar_min < 0.3, "k = 8 polar minimum " + fmt(polar_min));
  const double med = median(bulk);
  v.require(med > 0.6, "k = 8 bulk median " + fmt(med));

  std::mt19937_64 rng(13);
  bool monotone = true;
  double s2_gap = 0;
  for (int n = 0; n < 100; ++n) {
    const CVector c = kdtest::random_state(301, rng);
    double prev = 1e9;
    for (double q : {0.0, 0.5, 2.0, 3.0, 5.0}) {
      const double d = fractal_dimension(c, q);
      if (d > prev + 1e-12) monotone = false;
      prev = d;
    }
    s2_gap = std::max(s2_gap, std::abs(renyi_entropy(c, 2.0) - std::log(participation_number(c))));
  }
  v.require(monotone, "D_q non-increasing in q on 100 vectors");
  v.require(s2_gap < 1e-12, "|S_2 - ln M_2| <= " + fmt(s2_gap));
}

void average_d2_growth(Verdict& v) {
  for (int two_j : {200, 400}) {
    std::map<double, double> avg;
    for (double k : {0.5, 1.0, 1.5, 1.6, 3.0, 5.0}) {
      const FloquetSpec spec{two_j, k, 3.0, 1.0};
      avg[k] = average_d2(dq_map(eigensystem(build_floquet(spec).matrix), CoherentStateFactory(spec.basis()), 100, 100, 2.0));
    }
    const double steep = (avg[3.0] - avg[1.6]) / 1.4, flat = (avg[1.5] - avg[0.5]) / 1.0;
    const std::string j = "J = " + std::to_string(two_j / 2) + ": ";
    v.require(avg[5.0] > avg[3.0] && avg[3.0] > avg[1.0],
              j + "avg D2 at k = 1, 3, 5: " + fmt(avg[1.0]) + ", " + fmt(avg[3.0]) + ", " + fmt(avg[5.0]));
    v.require(steep >= 3 * flat, j + "slope 1.6..3 = " + fmt(steep) + " vs 0.5..1.5 = " + fmt(flat));
  }
}

void participation(Verdict& v) {
  const Recipe* r = find_recipe("fig13");
  const ExperimentConfig c = parse_configs(r->text, false).at(0);
  std::map<int, EigenSystem> cache;
  const EigenSystemProvider provider = [&](const FloquetSpec& s) -> EigenSystem {
    auto it = cache.find(s.two_j);
    if (it == cache.end()) it = cache.emplace(s.two_j, eigensystem(build_floquet(s).matrix)).first;
    return it->second;
  };
  for (const auto& st : c.states) {
    const auto rows = participation_scaling(st.theta, st.phi, c.spec, c.two_j_list, provider);
    std::ostringstream m2s;
    double lo = 1e300, hi = 0, sum = 0;
    bool increasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m2s << (i ? ", " : "") << fmt(rows[i].m2);
      lo = std::min(lo, rows[i].m2);
      hi = std::max(hi, rows[i].m2);
      sum += rows[i].m2;
      if (i && rows[i].m2 <= rows[i - 1].m2) increasing = false;
    }
    const double rel = (hi - lo) / (sum / rows.size());
    if (st.label == "star")
      v.require(increasing, "star M2 = [" + m2s.str() + "] strictly increasing");
    else
      v.require(rel < 0.25, st.label + " M2 = [" + m2s.str() + "], relative variation " + fmt(rel));
  }
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  kdtest::ensure_sane_blas(argv);
  const std::vector<Criterion> all = {
      {1, "unitarity and spectrum", unitarity_and_spectrum},
      {2, "chaotic mean spacing ratio", chaotic_mlsr},
      {3, "regular mean spacing ratio", regular_mlsr},
      {4, "crossover curve", crossover},
      {5, "parity symmetry", parity},
      {6, "classical conservation", classical_conservation},
      {7, "classical fixed points", classical_fixed_points},
      {8, "OTOC oracle equivalence", otoc_oracle},
      {9, "OTOC phenomenology", otoc_phenomenology},
      {10, "entanglement oracle", entanglement_oracle},
      {11, "self-trapping", self_trapping},
      {12, "multifractal structure", multifractal},
      {13, "average D2 growth", average_d2_growth},
      {14, "participation scaling", participation},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("criterion %2d %s  %s (%.1f s): %s\n", c.id, v.pass ? "PASS" : "FAIL", c.title, secs,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
