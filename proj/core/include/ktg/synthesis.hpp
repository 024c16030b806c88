#pragma once

#include "ktg/analysis.hpp"
#include "ktg/descent.hpp"
#include "ktg/state_space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ktg {

// Closed-loop eigenvalue region: Re(lambda) <= -min_decay and
// |lambda| <= radius, keeping designs neither sluggish nor high-gain.
struct DiskRegion {
  double min_decay = 0.001;
  double radius = 100.0;

  void validate() const {
    require(min_decay > 0.0 && radius > 0.0, "DiskRegion: parameters must be positive");
    require(min_decay < radius, "DiskRegion: min_decay must be below radius");
  }
};

enum class ObjectiveKind { kreiss, numabs, h2match, wcenergy };

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_from_string(const std::string& name);

struct SynthesisProblem {
  StateSpace plant;                     // strictly proper (D = 0)
  Index controller_order = 0;           // n_K >= 0
  ObjectiveKind objective = ObjectiveKind::kreiss;
  RealMatrix reference;                 // A_r for h2match; default -I
  DiskRegion region;
  int restarts = 10;
  double scenario_tol = 0.01;           // scenario-loop stopping slack
  std::uint64_t seed = 1;               // base of the deterministic seed list
  int workers = 0;                      // 0 = library default

  void validate() const;
  RealMatrix reference_or_default() const;
};

struct ScenarioRecord {
  double h_star = 0.0;       // multi-model optimum over the current scenarios
  double delta_star = 0.0;   // worst delta found by degradation
  double alpha_star = 0.0;   // worst family abscissa found by destabilization
  double h_degrade = 0.0;    // objective at delta_star
};

struct ScenarioState {
  enum class Status { running, converged, certified };

  std::vector<double> scenarios{0.0};
  std::vector<ScenarioRecord> history;
  Status status = Status::running;
};

struct SynthesisResult {
  Controller controller;
  double certified_value = std::numeric_limits<double>::infinity();
  ScenarioState history;
  int winner_restart = -1;
  std::vector<double> restart_values;  // certified value per restart (inf = infeasible)
};

// The objective functional evaluated through the analysis module:
// kreiss   -> restricted Kreiss constant of the closed loop,
// numabs   -> numerical abscissa of the plant-state block J^T A_cl J,
// h2match  -> H2 norm of J^T (sI - A_cl)^{-1} J - (sI - A_r)^{-1},
// wcenergy -> worst-case energy over unit-cube initial conditions.
double objective_value(ObjectiveKind kind, const SynthesisProblem& problem,
                       const Controller& K);

// Multi-model step: local minimization of the max over the given scenarios of
// the objective, under the region constraint via exact penalty. Runs a
// stabilization phase first when K0 does not stabilize every scenario.
// Guarantees h(out) <= h(K0) + 1e-12 whenever K0 was feasible.
std::pair<Controller, double> multimodel_min(const SynthesisProblem& problem,
                                             const std::vector<double>& scenarios,
                                             const Controller& K0);

// Worst-case stability scenario: maximizes the spectral abscissa of the
// delta-substituted closed loop over delta in [-1,1] (201-point grid plus
// golden refinement). Returns (delta*, alpha*).
std::pair<double, double> destabilize(const SynthesisProblem& problem,
                                      const Controller& K);

// Worst-performance scenario: maximizes the objective norm over delta.
// Requires a uniformly stable family. Returns (delta*, h*).
std::pair<double, double> degrade(const SynthesisProblem& problem,
                                  const Controller& K);

// Full scenario loop with multi-start: Initialize -> Multi-model ->
// Destabilize -> Degrade -> Stopping, certified through the analysis module,
// best over the deterministic restart list.
SynthesisResult scenario_loop(const SynthesisProblem& problem);

}  // namespace ktg
