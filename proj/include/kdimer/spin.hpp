#pragma once

#include <array>
#include <memory>

#include "kdimer/common.hpp"

namespace kdimer {

// Dicke basis |J, m> of fixed total spin J = two_j / 2. Index i <-> m = i - J,
// ascending in m.
class SpinBasis {
 public:
  explicit SpinBasis(int two_j);

  int two_j() const { return two_j_; }
  int dim() const { return two_j_ + 1; }
  double j() const { return 0.5 * two_j_; }
  double m_at(int index) const;
  int index_of(double m) const;

  bool operator==(const SpinBasis&) const = default;

 private:
  int two_j_;
};

struct DenseOperator {
  DenseOperator(SpinBasis basis, CMatrix matrix, bool hermitian = false);

  SpinBasis basis;
  CMatrix matrix;
  bool hermitian;
};

DenseOperator build_jx(const SpinBasis& basis);
DenseOperator build_jy(const SpinBasis& basis);
DenseOperator build_jz(const SpinBasis& basis);

// Largest entry of |A - A^dagger|.
double hermiticity_defect(const CMatrix& a);

struct CoherentState {
  double theta;
  double phi;
  CVector amplitudes;
};

// |theta, phi> = exp[i theta (Jx sin phi - Jy cos phi)] |J, J>, obtained by
// exponentiating the Hermitian generator through its eigendecomposition.
// phi is reduced into [-pi, pi).
CoherentState coherent_state(const SpinBasis& basis, double theta, double phi);

// Batch builder for many coherent states of one basis. Uses the identity
//   exp[i theta (Jx sin phi - Jy cos phi)] = e^{-i phi Jz} e^{-i theta Jy} e^{i phi Jz},
// so only Jy is diagonalized (once); each state then costs O(dim^2).
// Immutable after construction and safe to share across threads.
class CoherentStateFactory {
 public:
  explicit CoherentStateFactory(const SpinBasis& basis);

  const SpinBasis& basis() const { return basis_; }
  CoherentState operator()(double theta, double phi) const;
  // Real rotated column e^{-i theta Jy}|J, J>; phi only contributes diagonal phases.
  RVector polar_profile(double theta) const;
  // Amplitudes for a fixed theta and each phi in `phis` as the columns of `out`.
  void fill_row(double theta, const RVector& phis, CMatrix& out) const;

 private:
  SpinBasis basis_;
  RVector jy_values_;
  CMatrix jy_vectors_;
  CVector top_in_eigenbasis_;
};

// (<Jx>, <Jy>, <Jz>) / J. Throws PreconditionError when |norm - 1| > 1e-8.
std::array<double, 3> bloch_expectation(const CVector& state, const DenseOperator& jx,
                                        const DenseOperator& jy, const DenseOperator& jz);

// Amplitude of |s; q> (x) |N - s; n - q> in the N-qubit Dicke state |N; n>:
// sqrt(C(s,q) C(N-s, n-q) / C(N,n)); zero when n - q lies outside [0, N - s].
double dicke_split_coeff(int n_qubits, int n_excitations, int s, int q);

// Binomial coefficient C(n, k) as a double; log-space above n = 60.
double binomial(int n, int k);
double log_binomial(int n, int k);

}  // namespace kdimer
