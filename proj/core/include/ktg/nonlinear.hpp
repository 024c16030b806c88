#pragma once

#include "ktg/state_space.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace ktg {

// The 2-state nonlinear benchmark  xdot = A x + ||x|| B_x x + B u,  y = C x
// with A = [-1/R 1; 0 -2/R] and skew B_x = [0 -1; 1 0]: a stable linear part
// whose non-normal transient growth feeds the quadratic term.
struct NonlinearSystem {
  RealMatrix A, B_x, B, C;
  double R = 25.0;

  // The benchmark instance: B = [1; 1], C = [1 0].
  static NonlinearSystem example(double R = 25.0);

  void validate() const;
  Index states() const { return A.rows(); }

  // Right-hand side of the autonomous part (no input).
  RealVector field(const RealVector& x) const {
    return A * x + x.norm() * (B_x * x);
  }
};

struct Trajectory {
  enum class Terminal { origin, remote, undecided };

  std::vector<double> times;
  std::vector<RealVector> states;  // plant states, then controller states
  std::vector<double> norms;       // plant-state norm along the trajectory
  Terminal classification = Terminal::undecided;
};

std::string to_string(Trajectory::Terminal t);

// Adaptive embedded Runge-Kutta integration of the open-loop (K = nullptr)
// or feedback-interconnected dynamics, with terminal classification:
// origin  -> plant norm below 1e-9 at the horizon and a stable linearization,
// remote  -> plant norm above 1e-2 with a nearly vanishing vector field,
// undecided otherwise. x0 is the plant initial state; controller states
// start at zero.
Trajectory simulate(const NonlinearSystem& sys, const Controller* K,
                    const RealVector& x0, double T = 2000.0, double tol = 1e-10);

// Bisection for the critical initial amplitude along `direction` at which the
// terminal classification flips between the bracket ends, to 1e-6 relative
// width. Returns nullopt when both ends classify identically (no threshold in
// the bracket); throws on undecided classifications.
std::optional<double> threshold_search(const NonlinearSystem& sys,
                                       const Controller* K,
                                       const RealVector& direction,
                                       double low, double high,
                                       double T = 2000.0, double tol = 1e-10);

// CSV rows: time, state components, plant norm.
void write_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace ktg
