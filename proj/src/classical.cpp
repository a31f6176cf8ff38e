#include "kdimer/classical.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "kdimer/csv.hpp"
#include "kdimer/parallel.hpp"

namespace kdimer {

ClassicalState ClassicalState::from_angles(double theta, double phi) {
  return {Vec3(std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta), std::cos(theta))};
}

double ClassicalState::theta() const { return std::acos(std::clamp(m.z() / m.norm(), -1.0, 1.0)); }

double ClassicalState::phi() const { return wrap_phase(std::atan2(m.y(), m.x())); }

double classical_energy(const Vec3& m, double k) { return 2.0 * m.x() + 0.5 * k * m.z() * m.z(); }

Vec3 flow_rhs(const Vec3& m, double k) {
  return {-k * m.y() * m.z(), -2.0 * m.z() + k * m.x() * m.z(), 2.0 * m.y()};
}

ClassicalState free_flow(const ClassicalState& s, double k, double tau, double dt) {
  if (std::abs(s.m.norm() - 1.0) > 1e-8) throw PreconditionError("free_flow: |m| != 1");
  if (tau < 0) throw ArgumentError("free_flow: tau must be non-negative");
  if (tau == 0.0) return s;
  if (!(dt > 0) || dt > tau) throw ArgumentError("free_flow: dt must lie in (0, tau]");
  const double steps_real = tau / dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-6)
    throw ArgumentError("free_flow: dt does not divide tau");
  const double h = tau / static_cast<double>(steps);
  Vec3 m = s.m;
  for (long i = 0; i < steps; ++i) {
    const Vec3 k1 = flow_rhs(m, k);
    const Vec3 k2 = flow_rhs(m + 0.5 * h * k1, k);
    const Vec3 k3 = flow_rhs(m + 0.5 * h * k2, k);
    const Vec3 k4 = flow_rhs(m + h * k3, k);
    m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    m.normalize();
  }
  return {m};
}

ClassicalState kick_rotation(const ClassicalState& s, double mu) {
  const double c = std::cos(mu);
  const double sn = std::sin(mu);
  return {Vec3(c * s.m.x() - sn * s.m.y(), sn * s.m.x() + c * s.m.y(), s.m.z())};
}

ClassicalState stroboscopic_step(const ClassicalState& s, const MapParams& p) {
  return kick_rotation(free_flow(s, p.k, p.tau, p.dt), p.mu);
}

ClassicalState iterate_map(const ClassicalState& s, const MapParams& p, int times) {
  ClassicalState out = s;
  for (int i = 0; i < times; ++i) out = stroboscopic_step(out, p);
  return out;
}

std::vector<Trajectory> poincare_section(const MapParams& p, int n_theta, int n_phi, int kicks,
                                         int workers) {
  if (n_theta < 1 || n_phi < 1 || kicks < 0)
    throw ArgumentError("poincare_section: invalid grid or kick count");
  std::vector<Trajectory> out(static_cast<size_t>(n_theta) * n_phi);
  parallel_for(n_theta * n_phi, workers, [&](int id) {
    Trajectory& t = out[id];
    t.id = id;
    t.theta0 = (id / n_phi + 0.5) * kPi / n_theta;
    t.phi0 = -kPi + (id % n_phi + 0.5) * kTwoPi / n_phi;
    ClassicalState s = ClassicalState::from_angles(t.theta0, t.phi0);
    t.states.reserve(kicks);
    try {
      for (int step = 0; step < kicks; ++step) {
        s = stroboscopic_step(s, p);
        t.max_norm_drift = std::max(t.max_norm_drift, std::abs(s.m.norm() - 1.0));
        t.states.push_back(s.m);
      }
    } catch (const std::exception& e) {
      t.error = e.what();
    }
  });
  return out;
}

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories) {
  CsvWriter csv(out);
  csv.header({"traj_id", "step", "theta", "phi", "mx", "my", "mz"});
  for (const auto& t : trajectories)
    for (size_t i = 0; i < t.states.size(); ++i) {
      const ClassicalState s{t.states[i]};
      csv.field(t.id).field(static_cast<long long>(i + 1)).field(s.theta()).field(s.phi());
      csv.field(s.m.x()).field(s.m.y()).field(s.m.z());
      csv.end_row();
    }
}

std::optional<int> orbit_period(const ClassicalState& m0, const MapParams& p, int max_period,
                                double tol) {
  if (!(tol > 0)) throw ArgumentError("orbit_period: tol must be positive");
  ClassicalState s = m0;
  for (int period = 1; period <= max_period; ++period) {
    s = stroboscopic_step(s, p);
    if ((s.m - m0.m).norm() < tol) return period;
  }
  return std::nullopt;
}

namespace {

struct RefineContext {
  int period;
  MapParams params;
};

double periodic_residual(const gsl_vector* x, void* ctx) {
  const auto* c = static_cast<const RefineContext*>(ctx);
  const ClassicalState s = ClassicalState::from_angles(gsl_vector_get(x, 0), gsl_vector_get(x, 1));
  return (iterate_map(s, c->params, c->period).m - s.m).norm();
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

PeriodicPoint refine_periodic_point(double theta, double phi, int period, const MapParams& p,
                                    double tol, int max_iterations, double initial_step) {
  if (period < 1) throw ArgumentError("refine_periodic_point: period must be >= 1");
  RefineContext ctx{period, p};
  gsl_multimin_function fn{&periodic_residual, 2, &ctx};

  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(2));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(2));
  gsl_vector_set(x.get(), 0, theta);
  gsl_vector_set(x.get(), 1, phi);
  gsl_vector_set_all(step.get(), initial_step);

  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2));
  gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());

  int iter = 0;
  while (iter < max_iterations) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
    if (minimizer->fval < tol) break;
    if (gsl_multimin_fminimizer_size(minimizer.get()) < 1e-15) break;
  }
  PeriodicPoint out;
  out.state = ClassicalState::from_angles(gsl_vector_get(minimizer->x, 0),
                                          gsl_vector_get(minimizer->x, 1));
  out.theta = out.state.theta();
  out.phi = out.state.phi();
  out.residual = minimizer->fval;
  out.iterations = iter;
  return out;
}

}  // namespace kdimer
