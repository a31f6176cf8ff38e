#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "kdimer/common.hpp"

namespace kdtest {

using kdimer::CMatrix;
using kdimer::CVector;
using kdimer::cplx;
using kdimer::RVector;

// Restarts the process with OPENBLAS_CORETYPE=Haswell when the BLAS probe
// fails and the variable is unset.
void ensure_sane_blas(char** argv);

// Scaling-and-squaring Taylor series, no eigendecomposition involved.
CMatrix taylor_expm(const CMatrix& a);

// Spin matrices written out element by element (ascending m).
CMatrix jz_matrix(int two_j);
CMatrix jplus_matrix(int two_j);

// sqrt(C(2J, J+m)) cos(theta/2)^{J+m} sin(theta/2)^{J-m} e^{i (J-m) phi}
CVector closed_form_coherent(int two_j, double theta, double phi, double phase_sign = +1.0);

// max_i |a_i - e^{i g} b_i| with the global phase g fitted on the largest entry.
double phase_insensitive_distance(const CVector& a, const CVector& b);

CVector random_state(int dim, std::mt19937_64& rng);

// C_zz(t) from full Heisenberg matrices Jz(t) = U^{-t} Jz U^t.
RVector dense_otoc(const CVector& psi0, const CMatrix& u, int two_j, int n_kicks);

// Embeds a symmetric state into the 2^N qubit space, traces out all but the
// first s qubits, and projects onto the (s+1)-dim symmetric subspace.
CMatrix embedded_reduced_density(const CVector& state, int s);

// Random unitary whose first column is `v` (normalized).
CMatrix unitary_with_first_column(const CVector& v, std::mt19937_64& rng);

std::string temp_dir(const std::string& tag);

}  // namespace kdtest
