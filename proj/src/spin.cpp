#include "kdimer/spin.hpp"

#include <cmath>
#include <string>

#include "linalg.hpp"

namespace kdimer {

SpinBasis::SpinBasis(int two_j) : two_j_(two_j) {
  if (two_j < 0) throw ArgumentError("SpinBasis: two_j must be non-negative");
}

double SpinBasis::m_at(int index) const {
  if (index < 0 || index >= dim()) throw ArgumentError("SpinBasis: index out of range");
  return index - j();
}

int SpinBasis::index_of(double m) const {
  const double shifted = m + j();
  const double rounded = std::round(shifted);
  if (std::abs(shifted - rounded) > 1e-9 || rounded < 0 || rounded > two_j_)
    throw ArgumentError("SpinBasis: m = " + std::to_string(m) + " not in basis");
  return static_cast<int>(rounded);
}

DenseOperator::DenseOperator(SpinBasis b, CMatrix m, bool herm)
    : basis(b), matrix(std::move(m)), hermitian(herm) {
  if (matrix.rows() != basis.dim() || matrix.cols() != basis.dim())
    throw ArgumentError("DenseOperator: matrix shape does not match basis");
  if (hermitian && hermiticity_defect(matrix) >= 1e-12)
    throw PreconditionError("DenseOperator: hermitian flag set on non-Hermitian matrix");
}

double hermiticity_defect(const CMatrix& a) { return detail::max_abs(a - a.adjoint()); }

namespace {

// J+ with <J, m+1| J+ |J, m> = sqrt(J(J+1) - m(m+1)).
RMatrix raising(const SpinBasis& basis) {
  const int n = basis.dim();
  const double j = basis.j();
  RMatrix jp = RMatrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double m = basis.m_at(i);
    jp(i + 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  return jp;
}

void check_polar_angle(double theta) {
  if (!(theta >= 0.0 && theta <= kPi)) throw ArgumentError("theta must lie in [0, pi]");
}

}  // namespace

DenseOperator build_jx(const SpinBasis& basis) {
  const RMatrix jp = raising(basis);
  return {basis, (0.5 * (jp + jp.transpose())).cast<cplx>(), true};
}

DenseOperator build_jy(const SpinBasis& basis) {
  const RMatrix jp = raising(basis);
  // (J+ - J-) / (2i) = -i/2 (J+ - J-)
  CMatrix jy = cplx(0.0, -0.5) * (jp - jp.transpose()).cast<cplx>();
  return {basis, std::move(jy), true};
}

DenseOperator build_jz(const SpinBasis& basis) {
  CMatrix jz = CMatrix::Zero(basis.dim(), basis.dim());
  for (int i = 0; i < basis.dim(); ++i) jz(i, i) = basis.m_at(i);
  return {basis, std::move(jz), true};
}

CoherentState coherent_state(const SpinBasis& basis, double theta, double phi) {
  check_polar_angle(theta);
  phi = wrap_phase(phi);
  const CMatrix jx = build_jx(basis).matrix;
  const CMatrix jy = build_jy(basis).matrix;
  // exp(i A) with A = theta (Jx sin phi - Jy cos phi) Hermitian.
  const CMatrix a = theta * (std::sin(phi) * jx - std::cos(phi) * jy);
  const auto eig = detail::hermitian_eig(a);
  const int top = basis.dim() - 1;
  CVector coeff = eig.vectors.row(top).adjoint();  // V^dagger |J, J>
  for (int i = 0; i < coeff.size(); ++i) coeff(i) *= std::polar(1.0, eig.values(i));
  return {theta, phi, eig.vectors * coeff};
}

CoherentStateFactory::CoherentStateFactory(const SpinBasis& basis) : basis_(basis) {
  auto eig = detail::hermitian_eig(build_jy(basis).matrix);
  jy_values_ = std::move(eig.values);
  jy_vectors_ = std::move(eig.vectors);
  top_in_eigenbasis_ = jy_vectors_.row(basis.dim() - 1).adjoint();
}

RVector CoherentStateFactory::polar_profile(double theta) const {
  check_polar_angle(theta);
  CVector c = top_in_eigenbasis_;
  for (int i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -theta * jy_values_(i));
  // e^{-i theta Jy} is real orthogonal in this basis; drop the rounding residue.
  return (jy_vectors_ * c).real();
}

CoherentState CoherentStateFactory::operator()(double theta, double phi) const {
  phi = wrap_phase(phi);
  const RVector d = polar_profile(theta);
  CVector amp(d.size());
  const double j = basis_.j();
  for (int i = 0; i < d.size(); ++i) amp(i) = d(i) * std::polar(1.0, phi * (j - basis_.m_at(i)));
  return {theta, phi, std::move(amp)};
}

void CoherentStateFactory::fill_row(double theta, const RVector& phis, CMatrix& out) const {
  const RVector d = polar_profile(theta);
  const int n = basis_.dim();
  out.resize(n, phis.size());
  const double j = basis_.j();
  for (int c = 0; c < phis.size(); ++c) {
    const double phi = wrap_phase(phis(c));
    for (int i = 0; i < n; ++i) out(i, c) = d(i) * std::polar(1.0, phi * (j - basis_.m_at(i)));
  }
}

std::array<double, 3> bloch_expectation(const CVector& state, const DenseOperator& jx,
                                        const DenseOperator& jy, const DenseOperator& jz) {
  const double j = jz.basis.j();
  if (j <= 0) throw ArgumentError("bloch_expectation: J must be positive");
  if (state.size() != jz.basis.dim()) throw ArgumentError("bloch_expectation: dimension mismatch");
  if (std::abs(state.norm() - 1.0) > 1e-8)
    throw PreconditionError("bloch_expectation: state is not normalized");
  std::array<double, 3> out{};
  const DenseOperator* ops[3] = {&jx, &jy, &jz};
  for (int a = 0; a < 3; ++a) out[a] = state.dot(ops[a]->matrix * state).real() / j;
  return out;
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -INFINITY;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n > 60) return std::exp(log_binomial(n, k));
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double dicke_split_coeff(int n_qubits, int n_excitations, int s, int q) {
  if (n_qubits < 0 || s < 0 || s > n_qubits)
    throw ArgumentError("dicke_split_coeff: s out of range");
  if (n_excitations < 0 || n_excitations > n_qubits)
    throw ArgumentError("dicke_split_coeff: excitation number out of range");
  if (q < 0 || q > s) throw ArgumentError("dicke_split_coeff: q out of range");
  const int rest = n_excitations - q;
  if (rest < 0 || rest > n_qubits - s) return 0.0;
  if (n_qubits > 60) {
    return std::exp(0.5 * (log_binomial(s, q) + log_binomial(n_qubits - s, rest) -
                           log_binomial(n_qubits, n_excitations)));
  }
  return std::sqrt(binomial(s, q) * binomial(n_qubits - s, rest) /
                   binomial(n_qubits, n_excitations));
}

}  // namespace kdimer
