#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kdimer/common.hpp"

namespace kdimer {

using Vec3 = Eigen::Vector3d;

// Unit Bloch vector m = J / J of the semiclassical spin.
struct ClassicalState {
  Vec3 m = Vec3::UnitZ();

  static ClassicalState from_angles(double theta, double phi);
  double theta() const;  // arccos(m_z), in [0, pi]
  double phi() const;    // atan2(m_y, m_x), in [-pi, pi)
};

// Stroboscopic map parameters: free flow of H0 for tau, then a kick of mu
// about z. dt is the RK4 step; tau must be an integer multiple of it.
struct MapParams {
  double k = 0.0;
  double mu = 0.0;
  double tau = 1.0;
  double dt = 1e-3;
};

// Conserved quantity of the free flow, E = 2 m_x + (k / 2) m_z^2.
double classical_energy(const Vec3& m, double k);

// dm/dt = (-k m_y m_z, -2 m_z + k m_x m_z, 2 m_y)
Vec3 flow_rhs(const Vec3& m, double k);

// RK4 over duration tau with step dt, renormalizing |m| after every step.
// tau = 0 returns the input unchanged.
ClassicalState free_flow(const ClassicalState& s, double k, double tau, double dt);

// Rotation about z by mu.
ClassicalState kick_rotation(const ClassicalState& s, double mu);

// kick_rotation(free_flow(s)): flow first, then kick, mirroring the Floquet
// operator read right to left.
ClassicalState stroboscopic_step(const ClassicalState& s, const MapParams& p);

// p-fold application of the stroboscopic map.
ClassicalState iterate_map(const ClassicalState& s, const MapParams& p, int times);

struct Trajectory {
  int id = 0;
  double theta0 = 0.0;
  double phi0 = 0.0;
  std::vector<Vec3> states;  // after kicks 1..n
  double max_norm_drift = 0.0;
  std::string error;  // set when the integration threw; states stop there
};

// Orbits from an n_theta x n_phi midpoint grid of initial conditions, ordered
// theta-major by grid index.
std::vector<Trajectory> poincare_section(const MapParams& p, int n_theta = 20, int n_phi = 20,
                                         int kicks = 400, int workers = 0);

// traj_id,step,theta,phi,mx,my,mz
void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajectories);

// Smallest p <= max_period with |T^p(m0) - m0| < tol.
std::optional<int> orbit_period(const ClassicalState& m0, const MapParams& p, int max_period,
                                double tol);

struct PeriodicPoint {
  double theta = 0.0;
  double phi = 0.0;
  ClassicalState state;
  double residual = 0.0;  // |T^period(m) - m|
  int iterations = 0;
};

// Derivative-free (Nelder-Mead simplex) minimization of |T^period(m) - m|
// over (theta, phi), started at the seed. Stops when the residual drops
// below `tol` or the simplex collapses.
PeriodicPoint refine_periodic_point(double theta, double phi, int period, const MapParams& p,
                                    double tol = 1e-11, int max_iterations = 2000,
                                    double initial_step = 0.02);

}  // namespace kdimer
