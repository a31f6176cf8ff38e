#pragma once

#include <iosfwd>

#include "kdimer/floquet.hpp"

namespace kdimer {

// Values on a (theta, phi) grid; rows follow theta, columns follow phi.
struct PhaseGrid {
  RVector theta;
  RVector phi;
  RMatrix values;
  bool rescaled = false;

  // Midpoint grid over the full sphere: theta_i = (i + 1/2) pi / n_theta,
  // phi_j = -pi + (j + 1/2) 2 pi / n_phi. Poles are never sampled.
  static PhaseGrid midpoint(int n_theta, int n_phi);

  int n_theta() const { return static_cast<int>(theta.size()); }
  int n_phi() const { return static_cast<int>(phi.size()); }
  // Throws ArgumentError unless both axes are strictly increasing inside
  // [0, pi] x [-pi, pi) and the values are finite with matching shape.
  void validate() const;
  // True when the axes are the midpoint grid of the whole sphere.
  bool covers_sphere() const;
};

// Q(theta, phi) = |<theta, phi | state>|^2 on the grid of `shape` (its values
// are ignored). With `rescale`, divided by the grid maximum.
PhaseGrid husimi(const CVector& state, const PhaseGrid& shape, const CoherentStateFactory& factory,
                 bool rescale = false, int workers = 0);

// Midpoint quadrature of (dim / 4 pi) * integral Q dOmega; equals 1 for a
// normalized state up to discretization error.
double husimi_norm(const PhaseGrid& q, int dim);

// c_i = <Phi_i | theta, phi> in the Floquet eigenbasis.
struct OverlapVector {
  CVector c;
  double theta = 0.0;
  double phi = 0.0;
};

OverlapVector overlap_vector(double theta, double phi, const EigenSystem& es,
                             const CoherentStateFactory& factory);

// S_q = ln(sum |c_i|^{2q}) / (1 - q), D_q = S_q / ln(dim). q >= 0, q != 1.
double renyi_entropy(const CVector& overlaps, double q);
double fractal_dimension(const CVector& overlaps, double q);
// M_2 = 1 / sum |c_i|^4 = exp(S_2)
double participation_number(const CVector& overlaps);

// D_q of the coherent state at every point of a midpoint grid; rows run in parallel.
PhaseGrid dq_map(const EigenSystem& es, const CoherentStateFactory& factory, int n_theta = 100,
                 int n_phi = 100, double q = 2.0, int workers = 0);

// (1 / 4 pi) sum D sin(theta) dtheta dphi over a full-sphere midpoint grid.
double average_d2(const PhaseGrid& d2);

// Columns `theta,phi,value`, theta-major.
void write_phase_grid_csv(std::ostream& out, const PhaseGrid& grid);

}  // namespace kdimer
