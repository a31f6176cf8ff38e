#include "support.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "kdimer/backend.hpp"

namespace kdtest {

void ensure_sane_blas(char** argv) {
  if (kdimer::blas_selfcheck() < 1e-9) return;
  if (std::getenv("OPENBLAS_CORETYPE")) return;
  ::setenv("OPENBLAS_CORETYPE", "Haswell", 1);
  ::execv("/proc/self/exe", argv);
}

CMatrix taylor_expm(const CMatrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
  const CMatrix x = a / std::ldexp(1.0, squarings);
  CMatrix term = CMatrix::Identity(a.rows(), a.cols());
  CMatrix sum = term;
  for (int n = 1; n <= 30; ++n) {
    term = (term * x) / static_cast<double>(n);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return sum;
}

CMatrix jz_matrix(int two_j) {
  CMatrix z = CMatrix::Zero(two_j + 1, two_j + 1);
  for (int i = 0; i <= two_j; ++i) z(i, i) = i - 0.5 * two_j;
  return z;
}

CMatrix jplus_matrix(int two_j) {
  const double j = 0.5 * two_j;
  CMatrix p = CMatrix::Zero(two_j + 1, two_j + 1);
  for (int i = 0; i < two_j; ++i) {
    const double m = i - j;
    p(i + 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  return p;
}

CVector closed_form_coherent(int two_j, double theta, double phi, double phase_sign) {
  const double j = 0.5 * two_j;
  CVector c(two_j + 1);
  for (int i = 0; i <= two_j; ++i) {
    const double m = i - j;
    const double log_binom = std::lgamma(two_j + 1.0) - std::lgamma(j + m + 1) - std::lgamma(j - m + 1);
    const double mag = std::exp(0.5 * log_binom) * std::pow(std::cos(theta / 2), j + m) *
                       std::pow(std::sin(theta / 2), j - m);
    c(i) = std::polar(mag, phase_sign * (j - m) * phi);
  }
  return c;
}

double phase_insensitive_distance(const CVector& a, const CVector& b) {
  Eigen::Index k = 0;
  a.cwiseAbs().maxCoeff(&k);
  const cplx g = a(k) / b(k);
  const cplx phase = g / std::abs(g);
  return (a - phase * b).cwiseAbs().maxCoeff();
}

CVector random_state(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cplx(n(rng), n(rng));
  return v / v.norm();
}

RVector dense_otoc(const CVector& psi0, const CMatrix& u, int two_j, int n_kicks) {
  const CMatrix jz = jz_matrix(two_j);
  const double j = 0.5 * two_j;
  RVector out(n_kicks + 1);
  CMatrix ut = CMatrix::Identity(u.rows(), u.cols());
  for (int t = 0; t <= n_kicks; ++t) {
    if (t > 0) ut = (u * ut).eval();
    const CMatrix jzt = ut.adjoint() * jz * ut;
    const CMatrix k = jzt * jz - jz * jzt;
    const cplx c = -(psi0.adjoint() * (k * k) * psi0)(0, 0) / (j * j);
    out(t) = c.real();
  }
  return out;
}

CMatrix embedded_reduced_density(const CVector& state, int s) {
  const int n = static_cast<int>(state.size()) - 1;
  const int full = 1 << n;
  // Dicke state |N; e> is the normalized sum of all bit strings with e ones;
  // basis index i <-> m = i - J <-> e = i excitations.
  CVector psi = CVector::Zero(full);
  std::vector<int> count(n + 1, 0);
  for (int b = 0; b < full; ++b) ++count[__builtin_popcount(b)];
  for (int b = 0; b < full; ++b) {
    const int e = __builtin_popcount(b);
    psi(b) = state(e) / std::sqrt(static_cast<double>(count[e]));
  }
  // first s qubits are the high bits
  const int keep = 1 << s, rest = 1 << (n - s);
  CMatrix rho = CMatrix::Zero(keep, keep);
  for (int a = 0; a < keep; ++a)
    for (int b = 0; b < keep; ++b)
      for (int r = 0; r < rest; ++r) rho(a, b) += psi(a * rest + r) * std::conj(psi(b * rest + r));
  // symmetric subspace projector columns |s; q>
  CMatrix dicke = CMatrix::Zero(keep, s + 1);
  for (int a = 0; a < keep; ++a) dicke(a, __builtin_popcount(a)) = 1.0;
  for (int q = 0; q <= s; ++q) dicke.col(q) /= dicke.col(q).norm();
  return dicke.adjoint() * rho * dicke;
}

CMatrix unitary_with_first_column(const CVector& v, std::mt19937_64& rng) {
  const int dim = static_cast<int>(v.size());
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix a(dim, dim);
  a.col(0) = v;
  for (int c = 1; c < dim; ++c)
    for (int r = 0; r < dim; ++r) a(r, c) = cplx(n(rng), n(rng));
  // modified Gram-Schmidt keeps column 0 fixed up to normalization
  for (int c = 0; c < dim; ++c) {
    for (int p = 0; p < c; ++p) a.col(c) -= a.col(p).dot(a.col(c)) * a.col(p);
    a.col(c) /= a.col(c).norm();
  }
  return a;
}

std::string temp_dir(const std::string& tag) {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() /
                     ("kdimer-test-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

}  // namespace kdtest
