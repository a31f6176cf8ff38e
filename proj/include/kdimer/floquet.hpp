#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "kdimer/spin.hpp"

namespace kdimer {

// Kicked dimer in its spin-J form: H0 = 2 Jx + (k / 2J) Jz^2, kicked by mu Jz
// once per period tau (hbar = 1, hopping = 1).
struct FloquetSpec {
  int two_j = 2;
  double k = 0.0;
  double mu = 0.0;
  double tau = 1.0;

  // two_j >= 1, tau >= 0 and all fields finite. tau = 0 is accepted as the
  // degenerate zero-length period (U reduces to the kick).
  void validate() const;
  SpinBasis basis() const { return SpinBasis(two_j); }
};

DenseOperator build_static_hamiltonian(const FloquetSpec& spec);

// U = exp(-i mu Jz) exp(-i H0 tau). The free factor is built from the
// eigendecomposition of the real symmetric H0.
DenseOperator build_floquet(const FloquetSpec& spec);

// P = e^{i pi J} e^{i pi Jx}.
DenseOperator parity_operator(const SpinBasis& basis);

// Eigenphases in [-pi, pi) sorted ascending; column i of `eigenvectors` pairs
// with eigenphases(i). Columns are orthonormal.
struct EigenSystem {
  RVector eigenphases;
  CMatrix eigenvectors;

  int dim() const { return static_cast<int>(eigenphases.size()); }
  bool has_vectors() const { return eigenvectors.size() > 0; }
};

// Full eigendecomposition of a unitary matrix via its complex Schur form.
// Throws PreconditionError if max|U^dagger U - I| > 1e-8 and NumericError when
// the eigen-residual or eigenvalue-modulus checks fail.
EigenSystem eigensystem(const CMatrix& u);

// Eigenphases only (no vectors, no residual check); cheaper, used by sweeps.
RVector eigenphases(const CMatrix& u);

double unitarity_defect(const CMatrix& u);
double commutator_defect(const CMatrix& a, const CMatrix& b);
// max |U - V diag(e^{i w}) V^dagger|
double reconstruction_residual(const CMatrix& u, const EigenSystem& es);

// Binary cache record: header (magic, format version, code version, spec),
// eigenphases, then eigenvectors as row-major little-endian float64 (re, im)
// pairs.
void write_eigensystem_record(std::ostream& out, const FloquetSpec& spec, const EigenSystem& es);
// Returns nullopt if the stream does not hold a record for `expected`
// (wrong magic, version, code version, or spec).
std::optional<EigenSystem> read_eigensystem_record(std::istream& in, const FloquetSpec& expected);

// Content hash of (two_j, k, mu, tau, code version, record kind).
std::string spec_cache_key(const FloquetSpec& spec, const std::string& kind);

}  // namespace kdimer
