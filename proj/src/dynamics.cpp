#include "kdimer/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "linalg.hpp"

namespace kdimer {

namespace {

void check_normalized(const CVector& psi, const char* who) {
  if (std::abs(psi.norm() - 1.0) > 1e-8)
    throw PreconditionError(std::string(who) + ": initial state is not normalized");
}

RVector m_values(const SpinBasis& basis) {
  RVector m(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) m(i) = basis.m_at(i);
  return m;
}

}  // namespace

StateVector evolve(const StateVector& state, const CMatrix& u, int n_kicks) {
  if (n_kicks < 0) throw ArgumentError("evolve: negative kick count");
  if (u.cols() != state.amplitudes.size()) throw ArgumentError("evolve: dimension mismatch");
  StateVector out = state;
  CVector next(out.amplitudes.size());
  for (int t = 0; t < n_kicks; ++t) {
    next.noalias() = u * out.amplitudes;
    out.amplitudes.swap(next);
  }
  out.time += n_kicks;
  return out;
}

StateVector product_state(const SpinBasis& basis, int site) {
  if (site != 1 && site != 2) throw ArgumentError("product_state: site must be 1 or 2");
  StateVector s{CVector::Zero(basis.dim()), 0};
  s.amplitudes(site == 1 ? basis.dim() - 1 : 0) = 1.0;
  return s;
}

RVector sz_series(const CVector& psi0, const CMatrix& u, const SpinBasis& basis, int n_kicks) {
  check_normalized(psi0, "sz_series");
  if (psi0.size() != basis.dim() || u.rows() != basis.dim())
    throw ArgumentError("sz_series: dimension mismatch");
  if (basis.j() <= 0) throw ArgumentError("sz_series: J must be positive");
  const RVector m = m_values(basis);
  RVector out(n_kicks + 1);
  CVector psi = psi0, next(psi0.size());
  for (int t = 0; t <= n_kicks; ++t) {
    if (t > 0) {
      next.noalias() = u * psi;
      psi.swap(next);
    }
    out(t) = psi.cwiseAbs2().dot(m) / basis.j();
  }
  return out;
}

RVector otoc_series(const CVector& psi0, const EigenSystem& es, const SpinBasis& basis,
                    int n_kicks) {
  check_normalized(psi0, "otoc_series");
  if (!es.has_vectors() || es.dim() != basis.dim() || psi0.size() != basis.dim())
    throw ArgumentError("otoc_series: dimension mismatch or missing eigenvectors");
  if (n_kicks < 0) throw ArgumentError("otoc_series: negative kick count");
  const RVector m = m_values(basis);
  const CMatrix& v = es.eigenvectors;
  const CMatrix vh = v.adjoint();
  const CVector x0 = vh * psi0;                        // psi0 in the eigenbasis
  const CVector y0 = vh * (m.cast<cplx>().asDiagonal() * psi0);  // Jz psi0
  const double norm = 1.0 / (basis.j() * basis.j());

  RVector out(n_kicks + 1);
  out(0) = 0.0;  // [Jz, Jz] = 0
  CVector phase(es.dim());
  for (int t = 1; t <= n_kicks; ++t) {
    for (int i = 0; i < es.dim(); ++i) phase(i) = std::polar(1.0, t * es.eigenphases(i));
    const CVector fwd_psi = v * phase.cwiseProduct(x0);  // U^t psi0
    const CVector fwd_zpsi = v * phase.cwiseProduct(y0); // U^t Jz psi0
    const CVector back_a = vh * (m.cast<cplx>().cwiseProduct(fwd_zpsi));
    const CVector back_b = vh * (m.cast<cplx>().cwiseProduct(fwd_psi));
    const CVector wv = v * phase.conjugate().cwiseProduct(back_a);  // Jz(t) Jz psi0
    const CVector w = v * phase.conjugate().cwiseProduct(back_b);   // Jz(t) psi0
    const CVector k = wv - m.cast<cplx>().cwiseProduct(w);
    out(t) = k.squaredNorm() * norm;
  }
  return out;
}

RVector otoc_series(const CVector& psi0, const CMatrix& u, const SpinBasis& basis, int n_kicks) {
  return otoc_series(psi0, eigensystem(u), basis, n_kicks);
}

GrowthFit fit_early_growth(const RVector& series, int min_window) {
  GrowthFit fit;
  const int n = static_cast<int>(series.size());
  if (n < 4 || min_window < 2) return fit;
  const int half = n / 2;
  fit.saturation = series.tail(n - half).mean();
  int t_half = n - 1;
  for (int t = 1; t < n; ++t)
    if (series(t) > 0.5 * fit.saturation) {
      t_half = t;
      break;
    }
  fit.t_half_saturation = t_half;
  for (int start = 1; start + min_window - 1 <= t_half; ++start) {
    for (int len = min_window; start + len - 1 <= t_half; ++len) {
      bool positive = true;
      double st = 0, sy = 0, stt = 0, sty = 0;
      for (int t = start; t < start + len; ++t) {
        if (!(series(t) > 0)) {
          positive = false;
          break;
        }
        const double y = std::log(series(t));
        st += t;
        sy += y;
        stt += double(t) * t;
        sty += t * y;
      }
      if (!positive) continue;
      const double slope = (len * sty - st * sy) / (len * stt - st * st);
      const double intercept = (sy - slope * st) / len;
      const double mean_y = sy / len;
      double ss_res = 0, ss_tot = 0;
      for (int t = start; t < start + len; ++t) {
        const double y = std::log(series(t));
        ss_res += std::pow(y - (slope * t + intercept), 2);
        ss_tot += std::pow(y - mean_y, 2);
      }
      const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
      if (!fit.found || r2 > fit.r2) {
        fit.found = true;
        fit.t_start = start;
        fit.length = len;
        fit.slope = slope;
        fit.intercept = intercept;
        fit.r2 = r2;
      }
    }
  }
  return fit;
}

ReducedDensity reduced_density(const CVector& state, int s) {
  const int n_qubits = static_cast<int>(state.size()) - 1;
  if (s < 1 || s > 4) throw ArgumentError("reduced_density: s must be in [1, 4]");
  if (s > n_qubits) throw ArgumentError("reduced_density: s exceeds the qubit count 2J");
  check_normalized(state, "reduced_density");

  // f[n][q] = dicke_split_coeff(N, n, s, q)
  std::vector<std::array<double, 5>> f(n_qubits + 1);
  for (int n = 0; n <= n_qubits; ++n)
    for (int q = 0; q <= s; ++q) f[n][q] = dicke_split_coeff(n_qubits, n, s, q);

  ReducedDensity rho{s, CMatrix::Zero(s + 1, s + 1)};
  for (int q = 0; q <= s; ++q)
    for (int qp = 0; qp <= s; ++qp) {
      cplx acc = 0.0;
      for (int r = 0; r <= n_qubits - s; ++r)
        acc += state(q + r) * std::conj(state(qp + r)) * f[q + r][q] * f[qp + r][qp];
      rho.matrix(q, qp) = acc;
    }

  if (hermiticity_defect(rho.matrix) > 1e-12)
    throw NumericError("reduced_density: result not Hermitian");
  if (std::abs(rho.matrix.trace() - 1.0) > 1e-10)
    throw NumericError("reduced_density: trace deviates from 1");
  return rho;
}

double entanglement_entropy(const ReducedDensity& rho) {
  const auto eig = detail::hermitian_eig(rho.matrix);
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double p = eig.values(i);
    if (p < -1e-12) throw NumericError("entanglement_entropy: density matrix not PSD");
    if (p > 0) s -= p * std::log(p);
  }
  return s;
}

RVector entanglement_series(const CVector& psi0, const CMatrix& u, int s, int n_kicks) {
  check_normalized(psi0, "entanglement_series");
  RVector out(n_kicks + 1);
  CVector psi = psi0, next(psi0.size());
  for (int t = 0; t <= n_kicks; ++t) {
    if (t > 0) {
      next.noalias() = u * psi;
      psi.swap(next);
    }
    out(t) = entanglement_entropy(reduced_density(psi, s));
  }
  return out;
}

std::vector<ParticipationRow> participation_scaling(double theta, double phi,
                                                    const FloquetSpec& base,
                                                    const std::vector<int>& two_j_list,
                                                    const EigenSystemProvider& provider) {
  if (!std::is_sorted(two_j_list.begin(), two_j_list.end()))
    throw ArgumentError("participation_scaling: J list must be ascending");
  std::vector<ParticipationRow> rows;
  for (int two_j : two_j_list) {
    FloquetSpec spec = base;
    spec.two_j = two_j;
    spec.validate();
    const EigenSystem es = provider ? provider(spec) : eigensystem(build_floquet(spec).matrix);
    const CoherentStateFactory factory(spec.basis());
    const OverlapVector ov = overlap_vector(theta, phi, es, factory);
    rows.push_back({two_j, two_j + 1, participation_number(ov.c)});
  }
  return rows;
}

std::vector<PhaseGrid> husimi_snapshots(const CVector& psi0, const CMatrix& u,
                                        const std::vector<int>& times, const PhaseGrid& shape,
                                        const CoherentStateFactory& factory, int workers) {
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0))
    throw ArgumentError("husimi_snapshots: times must be ascending and non-negative");
  check_normalized(psi0, "husimi_snapshots");
  std::vector<PhaseGrid> out;
  StateVector state{psi0, 0};
  for (int t : times) {
    state = evolve(state, u, t - state.time);
    out.push_back(husimi(state.amplitudes, shape, factory, false, workers));
  }
  return out;
}

}  // namespace kdimer
