#include "linalg.hpp"

#include <algorithm>

#include "kdimer/backend.hpp"

#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace kdimer::detail {

HermitianEig hermitian_eig(const CMatrix& a) {
  require_sane_blas();
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw ArgumentError("hermitian_eig: matrix not square");
  HermitianEig out{RVector(n), a};
  if (n == 0) return out;
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, out.vectors.data(), n,
                                   out.values.data());
  if (info != 0) throw NumericError("zheevd failed, info = " + std::to_string(info));
  return out;
}

namespace {

SymmetricEig symmetric_eig_unchecked(const RMatrix& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw ArgumentError("symmetric_eig: matrix not square");
  SymmetricEig out{RVector(n), a};
  if (n == 0) return out;
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, out.vectors.data(), n,
                                   out.values.data());
  if (info != 0) throw NumericError("dsyevd failed, info = " + std::to_string(info));
  return out;
}

}  // namespace

SymmetricEig symmetric_eig(const RMatrix& a) {
  require_sane_blas();
  return symmetric_eig_unchecked(a);
}

ComplexSchur complex_schur(CMatrix a, bool want_vectors) {
  require_sane_blas();
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw ArgumentError("complex_schur: matrix not square");
  ComplexSchur out;
  out.diagonal.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  lapack_int sdim = 0;
  lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'N', nullptr, n,
                                  a.data(), n, &sdim, out.diagonal.data(),
                                  want_vectors ? out.vectors.data() : nullptr, n > 0 ? n : 1);
  if (info != 0) throw NumericError("zgees failed to converge, info = " + std::to_string(info));
  double off = 0.0;
  for (lapack_int j = 1; j < n; ++j)
    for (lapack_int i = 0; i < j; ++i) off = std::max(off, std::abs(a(i, j)));
  out.off_diagonal = off;
  return out;
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace kdimer::detail

namespace kdimer {

namespace {

double run_probe() {
  const int n = 256;
  // deterministic, well-conditioned inputs; no RNG state touched
  RMatrix a(n, n), b(n, n);
  CMatrix ca(n, n), cb(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      a(i, j) = std::sin(0.37 * i + 1.13 * j);
      b(i, j) = std::cos(0.71 * i - 0.29 * j);
      ca(i, j) = cplx(a(i, j), b(i, j));
      cb(i, j) = cplx(b(i, j), -a(i, j));
    }
  double err = 0.0;
  const RMatrix p = a * b;
  err = std::max(err, (p - a.lazyProduct(b)).cwiseAbs().maxCoeff() / n);
  const CMatrix cp = ca * cb;
  err = std::max(err, (cp - ca.lazyProduct(cb)).cwiseAbs().maxCoeff() / n);

  const int m = 160;
  RMatrix s = (a.topLeftCorner(m, m) + a.topLeftCorner(m, m).transpose()).eval();
  const auto eig = detail::symmetric_eig_unchecked(s);
  RMatrix vl = eig.vectors * eig.values.asDiagonal();
  const RMatrix sv = s.lazyProduct(eig.vectors);
  err = std::max(err, (sv - vl).cwiseAbs().maxCoeff() / m);
  const RMatrix gram = eig.vectors.transpose().lazyProduct(eig.vectors);
  err = std::max(err, (gram - RMatrix::Identity(m, m)).cwiseAbs().maxCoeff());
  return err;
}

}  // namespace

double blas_selfcheck() {
  static const double err = run_probe();
  return err;
}

void require_sane_blas() {
  const double err = blas_selfcheck();
  if (!(err < 1e-9))
    throw NumericError("BLAS/LAPACK self-check failed (deviation " + std::to_string(err) +
                       "); with OpenBLAS, set OPENBLAS_CORETYPE=Haswell");
}

}  // namespace kdimer
