#pragma once

#include "ktg/matrix.hpp"
#include "ktg/state_space.hpp"

#include <vector>

namespace ktg {

// e^{At} by scaling-and-squaring with a Pade approximant.
RealMatrix expm(const RealMatrix& A, double t = 1.0);

// Unique symmetric X with A^T X + X A + Q = 0 for Hurwitz A and symmetric Q,
// by Schur-form back-substitution (Bartels-Stewart).  Throws numerical_error
// when A is not Hurwitz.
RealMatrix solve_lyapunov(const RealMatrix& A, const RealMatrix& Q);

// Eigenvalues (closed under conjugation for real input).
Spectrum spectrum_of(const RealMatrix& A);

// Largest singular value of the frequency response at omega (omega may be
// +infinity, giving the feedthrough gain).
double transfer_gain(const StateSpace& sys, double omega);

// All omega >= 0 at which the largest singular value of the transfer matrix
// equals gamma, from the purely imaginary eigenvalues of the Hamiltonian
// associated with (sys, gamma).  An empty list certifies that the H-infinity
// norm is strictly below gamma.  Requires Hurwitz A and
// gamma > sigma_max(D).
std::vector<double> imaginary_axis_crossings(const StateSpace& sys, double gamma);

namespace detail {

// Hamiltonian test frequencies without the sigma_max filter: |Im| of every
// imaginary eigenvalue.  Crossings of *any* singular value appear here;
// hinf_norm exploits their gains to accelerate its lower bound.
std::vector<double> hamiltonian_frequencies(const StateSpace& sys, double gamma);

// Eigenvalues classified as purely imaginary when |Re| <= 1e-8 (1 + |lambda|).
bool is_imaginary(const Complex& lambda);

}  // namespace detail

}  // namespace ktg
