#include "kdimer/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "binio.hpp"
#include "hash.hpp"
#include "linalg.hpp"

namespace kdimer {

void FloquetSpec::validate() const {
  if (two_j < 1) throw ArgumentError("FloquetSpec: two_j must be >= 1");
  if (!std::isfinite(k) || !std::isfinite(mu) || !std::isfinite(tau))
    throw ArgumentError("FloquetSpec: non-finite parameter");
  if (tau < 0) throw ArgumentError("FloquetSpec: tau must be non-negative");
}

namespace {

RMatrix static_hamiltonian_real(const FloquetSpec& spec) {
  const SpinBasis basis = spec.basis();
  const RMatrix jx = build_jx(basis).matrix.real();
  RMatrix h = 2.0 * jx;
  const double scale = spec.k / (2.0 * basis.j());
  for (int i = 0; i < basis.dim(); ++i) {
    const double m = basis.m_at(i);
    h(i, i) += scale * m * m;
  }
  return h;
}

// Kick phase -mu m. For integer J the kick is 2 pi periodic in mu, so mu is
// reduced first to keep U(mu) and U(mu + 2 pi) identical.
double kick_phase(const SpinBasis& basis, double mu, int index) {
  const double m = basis.m_at(index);
  if (basis.two_j() % 2 == 0) {
    double reduced = std::fmod(mu, kTwoPi);
    if (reduced < 0) reduced += kTwoPi;
    return -reduced * m;
  }
  return -mu * m;
}

}  // namespace

DenseOperator build_static_hamiltonian(const FloquetSpec& spec) {
  spec.validate();
  return {spec.basis(), static_hamiltonian_real(spec).cast<cplx>(), true};
}

DenseOperator build_floquet(const FloquetSpec& spec) {
  spec.validate();
  const SpinBasis basis = spec.basis();
  const int n = basis.dim();
  const auto eig = detail::symmetric_eig(static_hamiltonian_real(spec));
  // exp(-i H0 tau) = V cos(L tau) V^T - i V sin(L tau) V^T
  RMatrix vc = eig.vectors;
  RMatrix vs = eig.vectors;
  for (int c = 0; c < n; ++c) {
    const double a = eig.values(c) * spec.tau;
    vc.col(c) *= std::cos(a);
    vs.col(c) *= -std::sin(a);
  }
  const RMatrix re = vc * eig.vectors.transpose();
  const RMatrix im = vs * eig.vectors.transpose();
  CMatrix u(n, n);
  for (int r = 0; r < n; ++r) {
    const cplx kick = std::polar(1.0, kick_phase(basis, spec.mu, r));
    for (int c = 0; c < n; ++c) u(r, c) = kick * cplx(re(r, c), im(r, c));
  }
  return {basis, std::move(u), false};
}

DenseOperator parity_operator(const SpinBasis& basis) {
  const int n = basis.dim();
  const auto eig = detail::symmetric_eig(build_jx(basis).matrix.real());
  CMatrix v = eig.vectors.cast<cplx>();
  CMatrix vp = v;
  for (int c = 0; c < n; ++c) vp.col(c) *= std::polar(1.0, kPi * eig.values(c));
  CMatrix p = std::polar(1.0, kPi * basis.j()) * (vp * v.adjoint());
  return {basis, std::move(p), false};
}

double unitarity_defect(const CMatrix& u) {
  return detail::max_abs(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols()));
}

double commutator_defect(const CMatrix& a, const CMatrix& b) {
  return detail::max_abs(a * b - b * a);
}

double reconstruction_residual(const CMatrix& u, const EigenSystem& es) {
  CMatrix vd = es.eigenvectors;
  for (int c = 0; c < es.dim(); ++c) vd.col(c) *= std::polar(1.0, es.eigenphases(c));
  return detail::max_abs(u - vd * es.eigenvectors.adjoint());
}

namespace {

constexpr double kClusterTolerance = 1e-10;

std::vector<int> sorted_order(const RVector& phases) {
  std::vector<int> order(phases.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return phases(a) < phases(b); });
  return order;
}

void orthonormalize_block(CMatrix& v, int first, int count) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = first; i < first + count; ++i) {
      for (int j = first; j < i; ++j) v.col(i) -= v.col(j).dot(v.col(i)) * v.col(j);
      const double norm = v.col(i).norm();
      if (norm < 1e-300) throw NumericError("eigensystem: degenerate cluster lost rank");
      v.col(i) /= norm;
    }
  }
}

}  // namespace

RVector eigenphases(const CMatrix& u) {
  const auto schur = detail::complex_schur(u, false);
  RVector phases(schur.diagonal.size());
  for (int i = 0; i < phases.size(); ++i) phases(i) = wrap_phase(std::arg(schur.diagonal(i)));
  std::sort(phases.data(), phases.data() + phases.size());
  return phases;
}

EigenSystem eigensystem(const CMatrix& u) {
  if (u.rows() != u.cols()) throw ArgumentError("eigensystem: matrix not square");
  const double defect = unitarity_defect(u);
  if (defect > 1e-8)
    throw PreconditionError("eigensystem: input not unitary (max|U^dag U - I| = " +
                            std::to_string(defect) + ")");
  const auto schur = detail::complex_schur(u, true);
  const int n = static_cast<int>(u.rows());

  RVector raw(n);
  for (int i = 0; i < n; ++i) {
    const double modulus = std::abs(schur.diagonal(i));
    if (!std::isfinite(modulus) || std::abs(modulus - 1.0) > 1e-8)
      throw NumericError("eigensystem: eigenvalue modulus " + std::to_string(modulus) +
                         " off the unit circle");
    raw(i) = wrap_phase(std::arg(schur.diagonal(i)));
  }
  const auto order = sorted_order(raw);
  EigenSystem es;
  es.eigenphases.resize(n);
  es.eigenvectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    es.eigenphases(i) = raw(order[i]);
    es.eigenvectors.col(i) = schur.vectors.col(order[i]);
  }

  // Degenerate clusters (consecutive phases closer than the tolerance).
  for (int start = 0; start < n;) {
    int end = start + 1;
    while (end < n && es.eigenphases(end) - es.eigenphases(end - 1) < kClusterTolerance) ++end;
    if (end - start > 1) orthonormalize_block(es.eigenvectors, start, end - start);
    start = end;
  }

  const CMatrix residual = u * es.eigenvectors -
                           es.eigenvectors * es.eigenphases.unaryExpr([](double w) {
                                                 return std::polar(1.0, w);
                                               }).asDiagonal();
  for (int c = 0; c < n; ++c) {
    const double r = residual.col(c).cwiseAbs().maxCoeff();
    if (r > 1e-9)
      throw NumericError("eigensystem: residual " + std::to_string(r) + " in column " +
                         std::to_string(c) + " (Schur off-diagonal " +
                         std::to_string(schur.off_diagonal) + ")");
  }
  return es;
}

namespace {

constexpr char kMagic[8] = {'K', 'D', 'E', 'I', 'G', 'S', 'Y', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

void write_eigensystem_record(std::ostream& out, const FloquetSpec& spec, const EigenSystem& es) {
  using detail::put_le;
  out.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kFormatVersion);
  const std::string version = kCodeVersion;
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(version.size()));
  out.write(version.data(), static_cast<std::streamsize>(version.size()));
  put_le<std::int32_t>(out, spec.two_j);
  put_le<double>(out, spec.k);
  put_le<double>(out, spec.mu);
  put_le<double>(out, spec.tau);
  put_le<std::uint32_t>(out, es.has_vectors() ? 1u : 0u);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(es.dim()));
  for (int i = 0; i < es.dim(); ++i) put_le<double>(out, es.eigenphases(i));
  if (es.has_vectors()) {
    for (int r = 0; r < es.dim(); ++r)
      for (int c = 0; c < es.dim(); ++c) {
        put_le<double>(out, es.eigenvectors(r, c).real());
        put_le<double>(out, es.eigenvectors(r, c).imag());
      }
  }
  if (!out) throw IoError("failed writing eigensystem record");
}

std::optional<EigenSystem> read_eigensystem_record(std::istream& in, const FloquetSpec& expected) {
  using detail::get_le;
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    return std::nullopt;
  std::uint32_t format = 0, vlen = 0;
  if (!get_le(in, format) || format != kFormatVersion || !get_le(in, vlen) || vlen > 256)
    return std::nullopt;
  std::string version(vlen, '\0');
  if (!in.read(version.data(), vlen) || version != kCodeVersion) return std::nullopt;
  FloquetSpec spec;
  std::uint32_t has_vectors = 0;
  std::uint64_t dim = 0;
  if (!get_le(in, spec.two_j) || !get_le(in, spec.k) || !get_le(in, spec.mu) ||
      !get_le(in, spec.tau) || !get_le(in, has_vectors) || !get_le(in, dim))
    return std::nullopt;
  if (spec.two_j != expected.two_j || spec.k != expected.k || spec.mu != expected.mu ||
      spec.tau != expected.tau || dim != static_cast<std::uint64_t>(expected.two_j + 1))
    return std::nullopt;
  EigenSystem es;
  const auto n = static_cast<Eigen::Index>(dim);
  es.eigenphases.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!get_le(in, es.eigenphases(i))) return std::nullopt;
  if (has_vectors) {
    es.eigenvectors.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) {
        double re = 0, im = 0;
        if (!get_le(in, re) || !get_le(in, im)) return std::nullopt;
        es.eigenvectors(r, c) = cplx(re, im);
      }
  }
  return es;
}

std::string spec_cache_key(const FloquetSpec& spec, const std::string& kind) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s|%d|%a|%a|%a|%s", kind.c_str(), spec.two_j, spec.k, spec.mu,
                spec.tau, kCodeVersion);
  return detail::sha256_hex(buf);
}

}  // namespace kdimer
