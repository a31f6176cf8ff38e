#include <doctest.h>

#include <cmath>

#include "kdimer/spin.hpp"
#include "support.hpp"

using namespace kdimer;

namespace {

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

}  // namespace

TEST_SUITE("spin") {

TEST_CASE("spin one half matrices") {
  const SpinBasis b(1);
  CHECK(b.dim() == 2);
  const CMatrix jz = build_jz(b).matrix;
  CHECK(jz(0, 0).real() == doctest::Approx(-0.5));
  CHECK(jz(1, 1).real() == doctest::Approx(0.5));
  CHECK(std::abs(jz(0, 1)) == 0.0);
  CHECK(b.index_of(-0.5) == 0);
  CHECK(b.m_at(1) == 0.5);
}

TEST_CASE("index and m are a bijection") {
  for (int two_j : {1, 2, 7, 40}) {
    const SpinBasis b(two_j);
    for (int i = 0; i < b.dim(); ++i) CHECK(b.index_of(b.m_at(i)) == i);
  }
}

TEST_CASE("matrix elements match the ladder formula") {
  for (int two_j : {1, 4, 9, 30}) {
    const SpinBasis b(two_j);
    const CMatrix jp = kdtest::jplus_matrix(two_j);
    const CMatrix jx = (jp + jp.adjoint()) / 2.0;
    const CMatrix jy = (jp - jp.adjoint()) / cplx(0.0, 2.0);
    CHECK((build_jx(b).matrix - jx).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((build_jy(b).matrix - jy).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((build_jz(b).matrix - kdtest::jz_matrix(two_j)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("Casimir identity") {
  for (int two_j : {1, 2, 3, 20, 101, 400, 1000}) {
    const SpinBasis b(two_j);
    const CMatrix jx = build_jx(b).matrix, jy = build_jy(b).matrix, jz = build_jz(b).matrix;
    const CMatrix c = jx * jx + jy * jy + jz * jz;
    const double j = b.j();
    const CMatrix expect = CMatrix::Identity(b.dim(), b.dim()) * (j * (j + 1));
    CHECK((c - expect).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("commutation relations") {
  for (int two_j : {1, 2, 5, 20, 100}) {
    const SpinBasis b(two_j);
    const CMatrix jx = build_jx(b).matrix, jy = build_jy(b).matrix, jz = build_jz(b).matrix;
    const cplx i(0.0, 1.0);
    CHECK((commutator(jx, jy) - i * jz).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((commutator(jy, jz) - i * jx).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((commutator(jz, jx) - i * jy).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("hermiticity flags") {
  const SpinBasis b(11);
  CHECK(build_jx(b).hermitian);
  CHECK(hermiticity_defect(build_jy(b).matrix) < 1e-12);
  CHECK_THROWS_AS(DenseOperator(b, CMatrix::Zero(3, 3)), ArgumentError);
}

TEST_CASE("coherent state at the north pole") {
  for (int two_j : {1, 10, 301}) {
    const SpinBasis b(two_j);
    for (double phi : {0.0, 1.3, -2.9}) {
      const CoherentState cs = coherent_state(b, 0.0, phi);
      CVector top = CVector::Zero(b.dim());
      top(b.dim() - 1) = 1.0;
      CHECK((cs.amplitudes - top).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("coherent state on the equator points along x") {
  const SpinBasis b(100);
  const CoherentState cs = coherent_state(b, kPi / 2, 0.0);
  const auto m = bloch_expectation(cs.amplitudes, build_jx(b), build_jy(b), build_jz(b));
  CHECK(std::abs(m[0] - 1.0) < 1e-10);
  CHECK(std::abs(m[1]) < 1e-10);
  CHECK(std::abs(m[2]) < 1e-10);
}

TEST_CASE("coherent state agrees with the binomial closed form") {
  // e^{i theta (Jx sin phi - Jy cos phi)} = e^{-i phi Jz} e^{-i theta Jy} e^{i phi Jz}, so the
  // amplitude of |m> carries e^{+i (J - m) phi}.
  const SpinBasis b(10);
  const CoherentState cs = coherent_state(b, kPi / 3, 1.0);
  CHECK(std::abs(cs.amplitudes.norm() - 1.0) < 1e-12);
  CHECK(kdtest::phase_insensitive_distance(cs.amplitudes,
                                           kdtest::closed_form_coherent(10, kPi / 3, 1.0)) < 1e-10);
  // the opposite phase sign describes the state at -phi, a different point
  CHECK(kdtest::phase_insensitive_distance(
            cs.amplitudes, kdtest::closed_form_coherent(10, kPi / 3, 1.0, -1.0)) > 0.1);

  for (int two_j : {3, 40, 200})
    for (double theta : {0.3, 1.7, 3.0})
      for (double phi : {-3.0, 0.4, 2.2}) {
        const CoherentState c = coherent_state(SpinBasis(two_j), theta, phi);
        CHECK(kdtest::phase_insensitive_distance(
                  c.amplitudes, kdtest::closed_form_coherent(two_j, theta, phi)) < 1e-10);
      }
}

TEST_CASE("coherent state matches the exponential of its generator") {
  const int two_j = 12;
  const SpinBasis b(two_j);
  const double theta = 2.1, phi = -0.7;
  const CMatrix jp = kdtest::jplus_matrix(two_j);
  const CMatrix jx = (jp + jp.adjoint()) / 2.0;
  const CMatrix jy = (jp - jp.adjoint()) / cplx(0.0, 2.0);
  const CMatrix gen = cplx(0.0, theta) * (jx * std::sin(phi) - jy * std::cos(phi));
  const CVector expect = kdtest::taylor_expm(gen).col(two_j);
  CHECK((coherent_state(b, theta, phi).amplitudes - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("phi is reduced into the principal range") {
  const SpinBasis b(8);
  const CoherentState a = coherent_state(b, 1.0, 0.5 + 2 * kPi);
  CHECK(a.phi == doctest::Approx(0.5));
  CHECK((a.amplitudes - coherent_state(b, 1.0, 0.5).amplitudes).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(coherent_state(b, 1.0, kPi).phi == doctest::Approx(-kPi));
  CHECK_THROWS_AS(coherent_state(b, -0.1, 0.0), ArgumentError);
}

TEST_CASE("batch factory agrees with the direct construction") {
  const SpinBasis b(61);
  const CoherentStateFactory f(b);
  for (double theta : {0.0, 0.2, 1.5, kPi})
    for (double phi : {-kPi, -1.0, 2.5}) {
      CHECK((f(theta, phi).amplitudes - coherent_state(b, theta, phi).amplitudes)
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    }
}

TEST_CASE("Bloch expectation identity") {
  const SpinBasis b(60);
  const double theta = 2.0, phi = -2.5;
  const auto m = bloch_expectation(coherent_state(b, theta, phi).amplitudes, build_jx(b),
                                   build_jy(b), build_jz(b));
  CHECK(std::abs(m[0] - std::cos(phi) * std::sin(theta)) < 1e-10);
  CHECK(std::abs(m[1] - std::sin(phi) * std::sin(theta)) < 1e-10);
  CHECK(std::abs(m[2] - std::cos(theta)) < 1e-10);

  const SpinBasis b8(8);
  CVector top = CVector::Zero(9);
  top(8) = 1.0;
  const auto up = bloch_expectation(top, build_jx(b8), build_jy(b8), build_jz(b8));
  CHECK(up[0] == doctest::Approx(0.0));
  CHECK(up[2] == doctest::Approx(1.0));

  CVector cat = CVector::Zero(9);
  cat(0) = cat(8) = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(bloch_expectation(cat, build_jx(b8), build_jy(b8), build_jz(b8))[2]) < 1e-14);

  CHECK_THROWS_AS(bloch_expectation(2.0 * top, build_jx(b8), build_jy(b8), build_jz(b8)),
                  PreconditionError);
}

TEST_CASE("coherent states resolve the identity") {
  for (int two_j : {2, 15, 40}) {
    const SpinBasis b(two_j);
    const CoherentStateFactory f(b);
    const int nt = 200, np = 400;
    const double dt = kPi / nt, dp = 2 * kPi / np;
    CMatrix acc = CMatrix::Zero(b.dim(), b.dim());
    for (int i = 0; i < nt; ++i) {
      const double theta = (i + 0.5) * dt;
      CMatrix row = CMatrix::Zero(b.dim(), b.dim());
      for (int j = 0; j < np; ++j) {
        const CVector v = f(theta, -kPi + (j + 0.5) * dp).amplitudes;
        row += v * v.adjoint();
      }
      acc += row * (std::sin(theta) * dt * dp);
    }
    acc *= b.dim() / (4 * kPi);
    CHECK((acc - CMatrix::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("Dicke splitting coefficients") {
  CHECK(dicke_split_coeff(2, 1, 1, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(dicke_split_coeff(2, 1, 1, 1) == doctest::Approx(std::sqrt(0.5)));
  CHECK(dicke_split_coeff(4, 0, 2, 0) == doctest::Approx(1.0));
  CHECK(dicke_split_coeff(4, 0, 2, 1) == 0.0);
  CHECK(dicke_split_coeff(4, 0, 2, 2) == 0.0);

  double sum = 0.0;
  for (int q = 0; q <= 2; ++q) sum += std::pow(dicke_split_coeff(6, 3, 2, q), 2);
  CHECK(std::abs(sum - 1.0) < 1e-14);

  double worst = 0.0;
  for (int n_qubits = 1; n_qubits <= 64; ++n_qubits)
    for (int s = 1; s <= std::min(4, n_qubits); ++s)
      for (int n = 0; n <= n_qubits; ++n) {
        double t = 0.0;
        for (int q = 0; q <= s; ++q) t += std::pow(dicke_split_coeff(n_qubits, n, s, q), 2);
        worst = std::max(worst, std::abs(t - 1.0));
      }
  CHECK(worst < 1e-12);

  CHECK_THROWS_AS(dicke_split_coeff(4, 5, 2, 0), ArgumentError);
  CHECK_THROWS_AS(dicke_split_coeff(4, 2, 5, 0), ArgumentError);
  CHECK_THROWS_AS(dicke_split_coeff(4, 2, 2, 3), ArgumentError);
}

TEST_CASE("binomials stay finite at large arguments") {
  CHECK(binomial(10, 3) == 120.0);
  CHECK(binomial(64, 32) == doctest::Approx(1.8326241404472293e18));
  CHECK(std::isfinite(log_binomial(2000, 1000)));
  CHECK(std::exp(log_binomial(70, 35)) == doctest::Approx(binomial(70, 35)));
}

}  // TEST_SUITE
