#pragma once

namespace kdimer {

// Largest deviation seen when the BLAS/LAPACK backend recomputes a few small
// products and a symmetric eigendecomposition that are also evaluated without
// it. Healthy backends give ~1e-13. The probe runs once per process.
double blas_selfcheck();

// Throws NumericError when blas_selfcheck() exceeds 1e-9. Called before every
// dense factorization.
void require_sane_blas();

}  // namespace kdimer
