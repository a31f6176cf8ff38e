#pragma once

#include "kdimer/common.hpp"

namespace kdimer::detail {

struct HermitianEig {
  RVector values;  // ascending
  CMatrix vectors;
};

struct SymmetricEig {
  RVector values;  // ascending
  RMatrix vectors;
};

struct ComplexSchur {
  CVector diagonal;     // eigenvalues (Schur form diagonal)
  CMatrix vectors;      // unitary Schur vectors; empty when not requested
  double off_diagonal;  // largest |T_ij|, i < j
};

HermitianEig hermitian_eig(const CMatrix& a);
SymmetricEig symmetric_eig(const RMatrix& a);
ComplexSchur complex_schur(CMatrix a, bool want_vectors);

// max_ij |A_ij|
double max_abs(const CMatrix& a);

}  // namespace kdimer::detail
