#include "kdimer/phase_space.hpp"

#include <cmath>
#include <ostream>

#include "kdimer/csv.hpp"
#include "kdimer/parallel.hpp"

namespace kdimer {

PhaseGrid PhaseGrid::midpoint(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw ArgumentError("PhaseGrid: grid sizes must be positive");
  PhaseGrid g;
  g.theta.resize(n_theta);
  g.phi.resize(n_phi);
  for (int i = 0; i < n_theta; ++i) g.theta(i) = (i + 0.5) * kPi / n_theta;
  for (int j = 0; j < n_phi; ++j) g.phi(j) = -kPi + (j + 0.5) * kTwoPi / n_phi;
  g.values = RMatrix::Zero(n_theta, n_phi);
  return g;
}

void PhaseGrid::validate() const {
  if (theta.size() == 0 || phi.size() == 0) throw ArgumentError("PhaseGrid: empty axis");
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (theta(i) < 0 || theta(i) > kPi) throw ArgumentError("PhaseGrid: theta outside [0, pi]");
    if (i > 0 && !(theta(i) > theta(i - 1))) throw ArgumentError("PhaseGrid: theta not increasing");
  }
  for (Eigen::Index j = 0; j < phi.size(); ++j) {
    if (phi(j) < -kPi || phi(j) >= kPi) throw ArgumentError("PhaseGrid: phi outside [-pi, pi)");
    if (j > 0 && !(phi(j) > phi(j - 1))) throw ArgumentError("PhaseGrid: phi not increasing");
  }
  if (values.rows() != theta.size() || values.cols() != phi.size())
    throw ArgumentError("PhaseGrid: value shape does not match axes");
  if (!values.allFinite()) throw ArgumentError("PhaseGrid: non-finite value");
}

bool PhaseGrid::covers_sphere() const {
  if (theta.size() == 0 || phi.size() == 0) return false;
  const PhaseGrid ref = midpoint(n_theta(), n_phi());
  return (ref.theta - theta).cwiseAbs().maxCoeff() < 1e-9 &&
         (ref.phi - phi).cwiseAbs().maxCoeff() < 1e-9;
}

PhaseGrid husimi(const CVector& state, const PhaseGrid& shape, const CoherentStateFactory& factory,
                 bool rescale, int workers) {
  if (state.size() != factory.basis().dim()) throw ArgumentError("husimi: dimension mismatch");
  PhaseGrid out = shape;
  out.values = RMatrix::Zero(shape.n_theta(), shape.n_phi());
  out.rescaled = false;
  parallel_for(shape.n_theta(), workers, [&](int i) {
    CMatrix coherent;
    factory.fill_row(shape.theta(i), shape.phi, coherent);
    const CVector overlaps = coherent.adjoint() * state;
    out.values.row(i) = overlaps.cwiseAbs2().transpose();
  });
  if (rescale) {
    const double peak = out.values.maxCoeff();
    if (peak > 0) out.values /= peak;
    out.rescaled = true;
  }
  return out;
}

double husimi_norm(const PhaseGrid& q, int dim) {
  const double dtheta = kPi / q.n_theta();
  const double dphi = kTwoPi / q.n_phi();
  double sum = 0.0;
  for (int i = 0; i < q.n_theta(); ++i) sum += std::sin(q.theta(i)) * q.values.row(i).sum();
  return sum * dtheta * dphi * dim / (4.0 * kPi);
}

OverlapVector overlap_vector(double theta, double phi, const EigenSystem& es,
                             const CoherentStateFactory& factory) {
  if (!es.has_vectors()) throw ArgumentError("overlap_vector: eigensystem has no eigenvectors");
  const CoherentState cs = factory(theta, phi);
  return {es.eigenvectors.adjoint() * cs.amplitudes, cs.theta, cs.phi};
}

namespace {

void check_order(double q) {
  if (!(q >= 0)) throw ArgumentError("renyi_entropy: q must be non-negative");
  if (q == 1.0) throw ArgumentError("renyi_entropy: q = 1 (Shannon limit) is not supported");
}

void check_normalized(const CVector& c) {
  if (std::abs(c.squaredNorm() - 1.0) > 1e-8)
    throw PreconditionError("renyi_entropy: overlaps are not normalized");
}

double power_sum(const CVector& c, double q) {
  double s = 0.0;
  if (q == 2.0) {
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const double p = std::norm(c(i));
      s += p * p;
    }
  } else {
    for (Eigen::Index i = 0; i < c.size(); ++i) s += std::pow(std::norm(c(i)), q);
  }
  return s;
}

}  // namespace

double renyi_entropy(const CVector& overlaps, double q) {
  check_order(q);
  check_normalized(overlaps);
  return std::log(power_sum(overlaps, q)) / (1.0 - q);
}

double fractal_dimension(const CVector& overlaps, double q) {
  if (overlaps.size() < 2) throw ArgumentError("fractal_dimension: need dimension >= 2");
  return renyi_entropy(overlaps, q) / std::log(static_cast<double>(overlaps.size()));
}

double participation_number(const CVector& overlaps) {
  check_normalized(overlaps);
  return 1.0 / power_sum(overlaps, 2.0);
}

PhaseGrid dq_map(const EigenSystem& es, const CoherentStateFactory& factory, int n_theta,
                 int n_phi, double q, int workers) {
  check_order(q);
  if (!es.has_vectors()) throw ArgumentError("dq_map: eigensystem has no eigenvectors");
  if (es.dim() != factory.basis().dim()) throw ArgumentError("dq_map: dimension mismatch");
  PhaseGrid grid = PhaseGrid::midpoint(n_theta, n_phi);
  const double log_dim = std::log(static_cast<double>(es.dim()));
  const CMatrix vh = es.eigenvectors.adjoint();
  parallel_for(n_theta, workers, [&](int i) {
    CMatrix coherent;
    factory.fill_row(grid.theta(i), grid.phi, coherent);
    const CMatrix overlaps = vh * coherent;
    for (int j = 0; j < n_phi; ++j) {
      const double s = std::log(power_sum(overlaps.col(j), q)) / (1.0 - q);
      grid.values(i, j) = s / log_dim;
    }
  });
  return grid;
}

double average_d2(const PhaseGrid& d2) {
  d2.validate();
  if (!d2.covers_sphere()) throw ArgumentError("average_d2: grid does not cover the full sphere");
  const double dtheta = kPi / d2.n_theta();
  const double dphi = kTwoPi / d2.n_phi();
  double sum = 0.0;
  for (int i = 0; i < d2.n_theta(); ++i) sum += std::sin(d2.theta(i)) * d2.values.row(i).sum();
  return sum * dtheta * dphi / (4.0 * kPi);
}

void write_phase_grid_csv(std::ostream& out, const PhaseGrid& grid) {
  CsvWriter csv(out);
  csv.header({"theta", "phi", "value"});
  for (int i = 0; i < grid.n_theta(); ++i)
    for (int j = 0; j < grid.n_phi(); ++j) {
      csv.field(grid.theta(i)).field(grid.phi(j)).field(grid.values(i, j));
      csv.end_row();
    }
}

}  // namespace kdimer
