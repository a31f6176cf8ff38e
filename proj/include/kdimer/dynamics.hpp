#pragma once

#include <functional>
#include <vector>

#include "kdimer/phase_space.hpp"

namespace kdimer {

struct StateVector {
  CVector amplitudes;
  int time = 0;  // kicks applied so far
};

// psi <- U^n psi by n dense matrix-vector products.
StateVector evolve(const StateVector& state, const CMatrix& u, int n_kicks);

// All bosons on site 1 (|J, +J>) or site 2 (|J, -J>).
StateVector product_state(const SpinBasis& basis, int site);

// S_z(t) = <psi(t)| Jz |psi(t)> / J for t = 0..n_kicks.
RVector sz_series(const CVector& psi0, const CMatrix& u, const SpinBasis& basis, int n_kicks);

// C_zz(t) = -(1/J^2) <psi0| [Jz(t), Jz]^2 |psi0> = ||K psi0||^2 / J^2 with
// K = [Jz(t), Jz], for t = 0..n_kicks. Two-vector scheme: U^t psi0 and
// U^t Jz psi0 are propagated forward and pulled back with U^{-t}, all in the
// Floquet eigenbasis, so each step costs O(dim^2).
RVector otoc_series(const CVector& psi0, const EigenSystem& es, const SpinBasis& basis,
                    int n_kicks);
RVector otoc_series(const CVector& psi0, const CMatrix& u, const SpinBasis& basis, int n_kicks);

// Early-time exponential growth window of an OTOC series. The saturation level
// is the mean of the second half of the series; candidate windows start at
// t >= 1, span at least `min_window` kicks and end no later than the first
// kick at which C exceeds half the saturation level. The window with the best
// R^2 of a linear fit of ln C against t is reported.
struct GrowthFit {
  bool found = false;
  int t_start = 0;
  int length = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double saturation = 0.0;
  int t_half_saturation = 0;
};

GrowthFit fit_early_growth(const RVector& series, int min_window = 5);

// Reduced state of s qubits of the 2J-qubit symmetric representation, on the
// (s+1)-dimensional Dicke subspace. Index q counts excitations (m = +1/2 qubits).
struct ReducedDensity {
  int s = 0;
  CMatrix matrix;
};

ReducedDensity reduced_density(const CVector& state, int s);

// -Tr rho ln rho (natural log); eigenvalues in [-1e-12, 0) are clipped to zero.
double entanglement_entropy(const ReducedDensity& rho);

RVector entanglement_series(const CVector& psi0, const CMatrix& u, int s, int n_kicks);

struct ParticipationRow {
  int two_j = 0;
  int dim = 0;
  double m2 = 0.0;
};

using EigenSystemProvider = std::function<EigenSystem(const FloquetSpec&)>;

// M_2 of the coherent state (theta, phi) in the Floquet eigenbasis for each
// two_j in `two_j_list` (ascending). `base` supplies k, mu and tau.
std::vector<ParticipationRow> participation_scaling(double theta, double phi,
                                                    const FloquetSpec& base,
                                                    const std::vector<int>& two_j_list,
                                                    const EigenSystemProvider& provider = {});

// Husimi maps of U^t psi0 for each t in `times` (ascending).
std::vector<PhaseGrid> husimi_snapshots(const CVector& psi0, const CMatrix& u,
                                        const std::vector<int>& times, const PhaseGrid& shape,
                                        const CoherentStateFactory& factory, int workers = 0);

}  // namespace kdimer
