#pragma once

#include "ktg/matrix.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace ktg {

// One oracle evaluation: the (possibly penalized) objective value together
// with the gradients of every branch that is active at the point. Nonsmooth
// objectives (max of singular-value curves, rightmost eigenvalues) report one
// gradient per active branch; smooth objectives report exactly one.
struct Evaluation {
  double value = std::numeric_limits<double>::infinity();
  std::vector<RealVector> gradients;
  bool feasible = false;

  static Evaluation infeasible() { return {}; }
};

using Oracle = std::function<Evaluation(const RealVector&)>;

struct DescentOptions {
  int max_iterations = 300;
  double initial_step = 0.5;
  double step_growth = 1.6;
  double max_step = 2.0;        // absolute floor of the step cap
  double relative_max_step = 0.25;  // step cap grows with the iterate norm
  double armijo = 1e-5;           // sufficient-decrease fraction
  double stationarity_tol = 1e-9; // on the least-norm subgradient
  int sample_count = 30;          // gradient-sampling draws per fallback
  double sample_radius = 1e-3;    // initial sampling radius
  double sample_shrink = 0.3;
  double min_sample_radius = 1e-7;
  std::uint64_t seed = 42;
};

struct DescentResult {
  RealVector point;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool stationary = false;  // stopped at (approximate) Clarke stationarity
};

// Minimum-norm element of the convex hull of the given gradients: the
// steepest-descent direction for a max-type nonsmooth function. Solved by
// projected gradient on the simplex.
RealVector least_norm_combination(const std::vector<RealVector>& gradients);

// Standard-normal draws via Box-Muller on the raw engine output; identical
// across platforms, unlike std::normal_distribution.
RealVector standard_normal(std::mt19937_64& rng, Index dim);

// Carries the adaptive state between individual descent steps.
struct DescentState {
  RealVector x;
  Evaluation at_x;
  double step = 0.5;
  double radius = 1e-3;
  std::mt19937_64 rng;
  bool stationary = false;
  int iterations = 0;
};

DescentState make_descent_state(RealVector x0, const Oracle& oracle,
                                const DescentOptions& opts = {});

// One iteration of the subgradient/gradient-sampling hybrid: a least-norm
// descent direction with Armijo backtracking, falling back to gradient
// sampling with a shrinking radius when the line search stalls. Never accepts
// an increase. Returns false once the iterate is (approximately) stationary.
bool local_step(DescentState& state, const Oracle& oracle,
                const DescentOptions& opts = {});

// Runs local_step until stationarity or the iteration cap.
DescentResult minimize(const Oracle& oracle, RealVector x0,
                       const DescentOptions& opts = {});

}  // namespace ktg
