#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kdimer/classical.hpp"
#include "kdimer/phase_space.hpp"
#include "support.hpp"

using namespace kdimer;

namespace {

// Participation ratio of the sin(theta)-weighted, normalized Husimi weights.
double husimi_spread(const PhaseGrid& q) {
  RMatrix w = q.values;
  for (int i = 0; i < q.n_theta(); ++i) w.row(i) *= std::sin(q.theta(i));
  w /= w.sum();
  return 1.0 / w.cwiseAbs2().sum();
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

double sphere_distance(double t1, double p1, double t2, double p2) {
  const auto a = ClassicalState::from_angles(t1, p1).m, b = ClassicalState::from_angles(t2, p2).m;
  return (a - b).norm();
}

}  // namespace

TEST_SUITE("phase_space") {

TEST_CASE("midpoint grid avoids the poles") {
  const PhaseGrid g = PhaseGrid::midpoint(4, 8);
  CHECK(g.theta(0) == doctest::Approx(kPi / 8));
  CHECK(g.theta(3) == doctest::Approx(7 * kPi / 8));
  CHECK(g.phi(0) == doctest::Approx(-kPi + kPi / 8));
  CHECK(g.covers_sphere());
  CHECK_NOTHROW(g.validate());
  PhaseGrid bad = g;
  bad.theta(1) = bad.theta(0);
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("Husimi function of the top state") {
  const SpinBasis b(20);
  const CoherentStateFactory f(b);
  PhaseGrid g;
  g.theta = RVector::LinSpaced(3, 0.0, kPi);
  g.phi = RVector::Constant(1, 0.3);
  g.values = RMatrix::Zero(3, 1);
  CVector top = CVector::Zero(b.dim());
  top(b.dim() - 1) = 1.0;
  const PhaseGrid q = husimi(top, g, f);
  CHECK(q.values(0, 0) == doctest::Approx(1.0));
  CHECK(q.values(2, 0) < 1e-12);
  CHECK(q.values.maxCoeff() == q.values(0, 0));
}

TEST_CASE("Husimi quadrature integrates to one") {
  const FloquetSpec spec{40, 8.0, 3.0, 1.0};
  const EigenSystem es = eigensystem(build_floquet(spec).matrix);
  const CoherentStateFactory f(spec.basis());
  const PhaseGrid shape = PhaseGrid::midpoint(200, 400);
  for (int idx : {0, 13, 40}) {
    const PhaseGrid q = husimi(es.eigenvectors.col(idx), shape, f);
    CHECK(q.values.minCoeff() >= 0.0);
    CHECK(std::abs(husimi_norm(q, spec.basis().dim()) - 1.0) < 1e-3);
  }
  const PhaseGrid r = husimi(es.eigenvectors.col(5), PhaseGrid::midpoint(30, 60), f, true);
  CHECK(r.rescaled);
  CHECK(r.values.maxCoeff() == 1.0);
}

TEST_CASE("chaotic eigenstates spread wider than regular ones") {
  const PhaseGrid shape = PhaseGrid::midpoint(60, 120);
  std::vector<double> spread[2];
  int slot = 0;
  for (double k : {1.0, 8.0}) {
    const FloquetSpec spec{300, k, 3.0, 1.0};
    const EigenSystem es = eigensystem(build_floquet(spec).matrix);
    const CoherentStateFactory f(spec.basis());
    for (int idx = 0; idx < es.dim(); idx += 10)
      spread[slot].push_back(husimi_spread(husimi(es.eigenvectors.col(idx), shape, f)));
    ++slot;
  }
  const double regular = median(spread[0]), chaotic = median(spread[1]);
  MESSAGE("median Husimi spread: k = 1 -> " << regular << ", k = 8 -> " << chaotic);
  CHECK(chaotic > 2.0 * regular);
}

TEST_CASE("overlap vectors are complete") {
  std::mt19937_64 rng(3);
  const SpinBasis b(24);
  const CoherentStateFactory f(b);
  const EigenSystem id = eigensystem(CMatrix::Identity(b.dim(), b.dim()));
  CHECK(std::abs(overlap_vector(1.2, 0.4, id, f).c.squaredNorm() - 1.0) < 1e-10);

  const CVector cs = f(0.9, -2.0).amplitudes;
  const EigenSystem synthetic{RVector::LinSpaced(b.dim(), -3.0, 3.0),
                              kdtest::unitary_with_first_column(cs, rng)};
  const OverlapVector ov = overlap_vector(0.9, -2.0, synthetic, f);
  CHECK(std::abs(std::abs(ov.c(0)) - 1.0) < 1e-12);
  CHECK(ov.c.tail(b.dim() - 1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(participation_number(ov.c) == doctest::Approx(1.0));

  const FloquetSpec spec{300, 8.0, 3.0, 1.0};
  const EigenSystem es = eigensystem(build_floquet(spec).matrix);
  const CoherentStateFactory fs(spec.basis());
  std::uniform_real_distribution<double> th(0.0, kPi), ph(-kPi, kPi);
  for (int n = 0; n < 10; ++n)
    CHECK(std::abs(overlap_vector(th(rng), ph(rng), es, fs).c.squaredNorm() - 1.0) < 1e-10);
}

TEST_CASE("Renyi entropy limits") {
  const int dim = 50;
  CVector unit = CVector::Zero(dim);
  unit(7) = 1.0;
  const CVector flat = CVector::Constant(dim, 1.0 / std::sqrt(double(dim)));
  for (double q : {0.5, 2.0, 3.0}) {
    CHECK(std::abs(renyi_entropy(unit, q)) < 1e-15);
    CHECK(std::abs(fractal_dimension(unit, q)) < 1e-15);
    CHECK(std::abs(fractal_dimension(flat, q) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(renyi_entropy(flat, 1.0), ArgumentError);
  CHECK_THROWS_AS(renyi_entropy(flat, -0.5), ArgumentError);
  CHECK_THROWS_AS(renyi_entropy(2.0 * flat, 2.0), PreconditionError);
}

TEST_CASE("S_2 = ln M_2 and D_q decreases with q") {
  std::mt19937_64 rng(11);
  const std::vector<double> qs = {0.0, 0.5, 0.9, 1.1, 2.0, 3.0, 5.0, 8.0};
  for (int n = 0; n < 100; ++n) {
    const int dim = 20 + n * 3;
    CVector c = kdtest::random_state(dim, rng);
    // make some vectors strongly non-uniform
    if (n % 2) c = (c.array() * RVector::LinSpaced(dim, 0.01, 3.0).array().pow(3).cast<cplx>()).matrix().normalized();
    CHECK(std::abs(renyi_entropy(c, 2.0) - std::log(participation_number(c))) < 1e-12);
    for (std::size_t i = 1; i < qs.size(); ++i)
      CHECK(fractal_dimension(c, qs[i]) <= fractal_dimension(c, qs[i - 1]) + 1e-12);
  }
}

TEST_CASE("average over a constant grid") {
  PhaseGrid g = PhaseGrid::midpoint(100, 100);
  g.values.setConstant(0.7);
  CHECK(std::abs(average_d2(g) - 0.7) < 1e-3);
  PhaseGrid half = g;
  half.theta = g.theta.head(50);
  half.values = g.values.topRows(50);
  CHECK_THROWS_AS(average_d2(half), ArgumentError);
}

TEST_CASE("D2 minimum at k = 1 sits on a stable classical fixed point") {
  const FloquetSpec spec{300, 1.0, 3.0, 1.0};
  const EigenSystem es = eigensystem(build_floquet(spec).matrix);
  const PhaseGrid d2 = dq_map(es, CoherentStateFactory(spec.basis()), 100, 100, 2.0);
  CHECK(d2.values.minCoeff() >= 0.0);
  CHECK(d2.values.maxCoeff() <= 1.0);
  Eigen::Index i = 0, j = 0;
  d2.values.minCoeff(&i, &j);
  CHECK(d2.values(i, j) < 0.1);
  const MapParams p{1.0, 3.0, 1.0, 1e-3};
  const PeriodicPoint fp = refine_periodic_point(d2.theta(i), d2.phi(j), 1, p);
  MESSAGE("D2 min (" << d2.theta(i) << ", " << d2.phi(j) << "), fixed point (" << fp.theta << ", "
                     << fp.phi << "), residual " << fp.residual);
  CHECK(fp.residual < 1e-9);
  // within two grid cells
  CHECK(sphere_distance(d2.theta(i), d2.phi(j), fp.theta, fp.phi) < 2 * 2 * kPi / 100);
}

TEST_CASE("k = 8 map: polar islands low, bulk high, average below one") {
  const FloquetSpec spec{300, 8.0, 3.0, 1.0};
  const EigenSystem es = eigensystem(build_floquet(spec).matrix);
  const PhaseGrid d2 = dq_map(es, CoherentStateFactory(spec.basis()), 100, 100, 2.0);
  double polar_min = 1.0;
  std::vector<double> bulk;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const double t = d2.theta(i);
      if (t < 0.5 || t > kPi - 0.5)
        polar_min = std::min(polar_min, d2.values(i, j));
      else
        bulk.push_back(d2.values(i, j));
    }
  CHECK(polar_min < 0.3);
  CHECK(median(bulk) > 0.6);
  CHECK(average_d2(d2) < 0.98);

  // determinism: rows are independent, so the worker count cannot matter
  const PhaseGrid again = dq_map(es, CoherentStateFactory(spec.basis()), 100, 100, 2.0, 1);
  CHECK(again.values == d2.values);
}

TEST_CASE("grid CSV layout") {
  PhaseGrid g = PhaseGrid::midpoint(2, 3);
  g.values << 1, 2, 3, 4, 5, 6;
  std::ostringstream os;
  write_phase_grid_csv(os, g);
  const std::string s = os.str();
  CHECK(s.rfind("theta,phi,value\r\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 7);
  CHECK(s.find(",6\r\n") == s.size() - 4);
}

}  // TEST_SUITE
