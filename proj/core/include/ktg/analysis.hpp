#pragma once

#include "ktg/matrix.hpp"
#include "ktg/state_space.hpp"

#include <utility>
#include <vector>

namespace ktg {

// H-infinity norm with the frequency attaining it (omega may come back as
// +infinity when the peak sits in the feedthrough term).
struct HinfResult {
  double value = 0.0;
  double omega = 0.0;
};

// Certified Kreiss constant with the maximizing (delta*, omega*) pair and
// the sampled delta -> H-infinity profile.
struct KreissReport {
  double value = 1.0;
  double delta_star = 1.0;
  double omega_star = 0.0;
  std::vector<std::pair<double, double>> profile;  // (delta, H-inf value)
  double tolerance = 0.0;                          // relative, achieved
};

// Sampled transient envelope ||J^T e^{At} J|| with its certified peak.
struct TransientProfile {
  std::vector<double> times;
  std::vector<double> gains;
  double peak = 1.0;
  double peak_time = 0.0;
  double horizon = 0.0;
};

// Pseudospectral abscissa profile over an epsilon grid.
struct EpsProfile {
  std::vector<double> epsilons;
  std::vector<double> alphas;
  double ratio_peak = 0.0;  // max alphas[i] / epsilons[i]
};

// Worst initial-condition energy over the unit cube, with a maximizing
// vertex.
struct WorstCaseEnergy {
  double value = 0.0;
  RealVector vertex;
};

// Max real part of the spectrum.
double spectral_abscissa(const RealMatrix& A);

// Largest eigenvalue of the symmetric part (A + A^T)/2; the initial slope
// of ||e^{At}|| and an upper envelope exponent.
double numerical_abscissa(const RealMatrix& A);

// Peak of ||J^T e^{At} J|| over t >= 0 for Hurwitz A, by dense sampling with
// local refinement of every competitive local maximum; the horizon is
// extended until a decay bound certifies that no later peak can exceed the
// one found.  tol is a relative sampling/refinement tolerance.
TransientProfile transient_growth(const RealMatrix& A, const ProjectionJ& J,
                                  double tol = 1e-3);

// Full-state transient growth M0(A).
TransientProfile transient_growth(const RealMatrix& A, double tol = 1e-3);

// H-infinity norm by gamma bisection on the Hamiltonian imaginary-axis test,
// geometric midpoints, and candidate-frequency gain acceleration;
// terminates when the bracket's relative width is <= tol.
HinfResult hinf_norm(const StateSpace& sys, double tol = 1e-6);

// Kreiss constant K(A) (J = I) or its plant-restricted version (J = [I; 0])
// via the worst-case H-infinity reformulation: the max over delta in [-1, 1]
// of the H-infinity norm of J^T (sI - ((1-delta)/(1+delta) A - I))^{-1} J,
// computed on a 101-point Chebyshev delta grid (including both endpoints)
// with golden-section refinement around every competitive grid-local
// maximum.  delta = -1 contributes 0 by convention; requires Hurwitz A.
KreissReport kreiss_constant(const RealMatrix& A, const ProjectionJ& J,
                             double tol = 1e-4);
KreissReport kreiss_constant(const RealMatrix& A, double tol = 1e-4);

// Rightmost real part of the eps-pseudospectrum, by criss-cross iteration
// (alternating horizontal searches and vertical-line Hamiltonian sweeps) to
// absolute tolerance 1e-8.
double pseudospectral_abscissa(const RealMatrix& A, double eps);

// alpha_eps / eps profile over a log-spaced grid; the peak is a lower-bound
// cross-check of kreiss_constant.
EpsProfile kreiss_via_eps(const RealMatrix& A, const std::vector<double>& eps_grid);
std::vector<double> default_eps_grid();

// H2 norm of a strictly proper Hurwitz system.
double h2_norm(const StateSpace& sys);

// max over vertices v of the unit cube of sqrt(v^T J^T Y J v), where
// A_cl^T Y + Y A_cl + J J^T = 0: the worst-case output energy of the
// autonomous loop over unit-box initial plant states.  Exact by convexity
// (the maximum of a convex quadratic over a polytope sits at a vertex).
// Guarded to plant dimension n <= 20.
WorstCaseEnergy worst_case_energy(const RealMatrix& A_cl, const ProjectionJ& J);

}  // namespace ktg
