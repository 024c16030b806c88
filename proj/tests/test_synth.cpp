#include "ktg/fixtures.hpp"
#include "ktg/synthesis.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ktg;
using namespace ktg::testing;

namespace {

StateSpace scalar_plant(double a) {
  return StateSpace(RealMatrix::Constant(1, 1, a),
                    RealMatrix::Constant(1, 1, 1.0),
                    RealMatrix::Constant(1, 1, 1.0));
}

// A plant with no actuation: every controller leaves A_cl = A.
StateSpace inert_plant(const RealMatrix& A) {
  return StateSpace(A, RealMatrix::Zero(A.rows(), 1),
                    RealMatrix::Zero(1, A.rows()));
}

SynthesisProblem make_problem(StateSpace plant, Index order,
                              ObjectiveKind kind) {
  SynthesisProblem problem;
  problem.plant = std::move(plant);
  problem.controller_order = order;
  problem.objective = kind;
  return problem;
}

}  // namespace

TEST_SUITE_BEGIN("synth");

TEST_CASE("objective names round-trip") {
  for (auto kind : {ObjectiveKind::kreiss, ObjectiveKind::numabs,
                    ObjectiveKind::h2match, ObjectiveKind::wcenergy})
    CHECK(objective_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(objective_from_string("hinfinity"), invalid_input);
}

TEST_CASE("objective_value: catalog controllers and degenerate cases") {
  StateSpace plant = make_fixture("example-7x7").to_state_space();
  SynthesisProblem problem = make_problem(plant, 3, ObjectiveKind::numabs);

  Controller K51 = make_fixture("controller-kreiss").to_controller();
  CHECK(objective_value(ObjectiveKind::numabs, problem, K51) ==
        doctest::Approx(656.0).epsilon(0.02));

  // Perfect model match: loop equals the default reference -I.
  SynthesisProblem match =
      make_problem(inert_plant(-RealMatrix::Identity(2, 2)), 0,
                   ObjectiveKind::h2match);
  Controller zero = Controller::make_static(RealMatrix::Zero(1, 1));
  CHECK(objective_value(ObjectiveKind::h2match, match, zero) <= 1e-9);

  // kreiss and wcenergy agree with the analysis module directly.
  NonlinearSystem bench = NonlinearSystem::example();
  StateSpace nl_plant(bench.A, bench.B, bench.C);
  Controller nl_K = make_fixture("nl-controller").to_controller();
  SynthesisProblem nl_problem = make_problem(nl_plant, 2, ObjectiveKind::kreiss);
  StateSpace loop = close_loop(nl_plant, nl_K);
  ProjectionJ J(2, 2);
  CHECK(objective_value(ObjectiveKind::kreiss, nl_problem, nl_K) ==
        doctest::Approx(kreiss_constant(loop.A, J, 1e-4).value).epsilon(1e-3));
  CHECK(objective_value(ObjectiveKind::wcenergy, nl_problem, nl_K) ==
        doctest::Approx(worst_case_energy(loop.A, J).value).epsilon(1e-9));
}

TEST_CASE("multimodel_min: descent contract on a scalar plant") {
  SynthesisProblem problem =
      make_problem(scalar_plant(-2.0), 0, ObjectiveKind::kreiss);
  Controller K0 = Controller::make_static(RealMatrix::Zero(1, 1));
  auto [K, h] = multimodel_min(problem, {0.0}, K0);

  // h(K0): delta = 0 substitutes A_cl - I = -3, whose channel peaks at 1/3.
  CHECK(h <= 1.0 / 3.0 + 1e-12);
  StateSpace loop = close_loop(problem.plant, K);
  CHECK(spectral_abscissa(loop.A) <= -problem.region.min_decay + 1e-9);
  Spectrum s = spectrum_of(loop.A);
  for (Index i = 0; i < s.eigenvalues.size(); ++i)
    CHECK(std::abs(s.eigenvalues(i)) <= problem.region.radius * (1.0 + 1e-9));
}

TEST_CASE("multimodel_min: two-scenario toy matches a scalar-gain grid oracle") {
  SynthesisProblem problem =
      make_problem(scalar_plant(-1.0), 0, ObjectiveKind::kreiss);
  problem.region.radius = 10.0;
  const std::vector<double> scenarios = {0.0, 0.5};

  Controller K0 = Controller::make_static(RealMatrix::Zero(1, 1));
  auto [K, h] = multimodel_min(problem, scenarios, K0);

  // Closed form: the channel of c(a+K) - 1 peaks at 1/(1 + c|a+K|).
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 20000; ++i) {
    double gain = -10.0 + 20.0 * i / 20000.0;
    double acl = -1.0 + gain;
    if (acl > -problem.region.min_decay || std::abs(acl) > 10.0) continue;
    double worst = 0.0;
    for (double delta : scenarios) {
      double c = (1.0 - delta) / (1.0 + delta);
      worst = std::max(worst, 1.0 / (1.0 + c * std::abs(acl)));
    }
    best = std::min(best, worst);
  }
  CHECK(h == doctest::Approx(best).epsilon(1e-2));
}

TEST_CASE("destabilize: exact family abscissa") {
  // Stable loop: the family (1-d)/(1+d) A_cl - I peaks at delta = 1.
  NonlinearSystem bench = NonlinearSystem::example();
  StateSpace nl_plant(bench.A, bench.B, bench.C);
  Controller nl_K = make_fixture("nl-controller").to_controller();
  SynthesisProblem problem = make_problem(nl_plant, 2, ObjectiveKind::kreiss);
  auto [delta_star, alpha_star] = destabilize(problem, nl_K);
  CHECK(alpha_star < 0.0);
  CHECK(alpha_star == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(delta_star == doctest::Approx(1.0).epsilon(1e-9));

  // Unstable loop: delta near -1 blows the abscissa up.
  SynthesisProblem bad =
      make_problem(inert_plant(RealMatrix::Constant(1, 1, 0.5)), 0,
                   ObjectiveKind::kreiss);
  Controller zero = Controller::make_static(RealMatrix::Zero(1, 1));
  auto [d_bad, a_bad] = destabilize(bad, zero);
  CHECK(a_bad >= 0.0);
  CHECK(d_bad <= -0.99);
}

TEST_CASE("destabilize: dominates a fine delta grid") {
  std::mt19937_64 rng(2001);
  SynthesisProblem problem =
      make_problem(StateSpace(random_stable(rng, 3, 0.2),
                              random_matrix(rng, 3, 1),
                              random_matrix(rng, 1, 3)),
                   0, ObjectiveKind::kreiss);
  Controller zero = Controller::make_static(RealMatrix::Zero(1, 1));
  auto [delta_star, alpha_star] = destabilize(problem, zero);

  double grid_max = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 100000; ++i) {  // skip the delta = -1 sentinel
    double delta = -1.0 + 2.0 * i / 100000.0;
    double c = (1.0 - delta) / (1.0 + delta);
    RealMatrix M = c * problem.plant.A - RealMatrix::Identity(3, 3);
    grid_max = std::max(grid_max, spectral_abscissa(M));
  }
  CHECK(alpha_star >= grid_max - 1e-9);
  CHECK(alpha_star == doctest::Approx(grid_max).epsilon(1e-6));
}

TEST_CASE("degrade: contraction families and the printed controller") {
  SynthesisProblem normal =
      make_problem(inert_plant(-RealMatrix::Identity(2, 2)), 0,
                   ObjectiveKind::kreiss);
  Controller zero = Controller::make_static(RealMatrix::Zero(1, 1));
  auto [d_n, h_n] = degrade(normal, zero);
  CHECK(h_n == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(d_n == doctest::Approx(1.0).epsilon(1e-6));

  // Scalar family: h(delta) = 1/(1 + 2c) maximized at c = 0.
  SynthesisProblem scalar =
      make_problem(inert_plant(RealMatrix::Constant(1, 1, -2.0)), 0,
                   ObjectiveKind::kreiss);
  auto [d_s, h_s] = degrade(scalar, zero);
  CHECK(h_s == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(d_s == doctest::Approx(1.0).epsilon(1e-6));

  // The catalog Kreiss controller reproduces its certified constant.
  StateSpace plant = make_fixture("example-7x7").to_state_space();
  Controller K51 = make_fixture("controller-kreiss").to_controller();
  SynthesisProblem bench = make_problem(plant, 3, ObjectiveKind::kreiss);
  auto [d_b, h_b] = degrade(bench, K51);
  CHECK(h_b == doctest::Approx(10.91).epsilon(0.05));
  StateSpace loop = close_loop(plant, K51);
  CHECK(h_b == doctest::Approx(kreiss_constant(loop.A, ProjectionJ(7, 3), 1e-4)
                    .value).epsilon(0.01));
}

TEST_CASE("degrade: refuses an unstable family") {
  SynthesisProblem bad =
      make_problem(inert_plant(RealMatrix::Constant(1, 1, 0.5)), 0,
                   ObjectiveKind::kreiss);
  Controller zero = Controller::make_static(RealMatrix::Zero(1, 1));
  CHECK_THROWS(degrade(bad, zero));
}

TEST_CASE("scenario_loop: contraction plant certifies at 1") {
  SynthesisProblem problem =
      make_problem(inert_plant(-RealMatrix::Identity(2, 2)), 0,
                   ObjectiveKind::kreiss);
  problem.restarts = 1;
  SynthesisResult result = scenario_loop(problem);
  CHECK(result.certified_value == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(result.history.status != ScenarioState::Status::running);
  CHECK(result.history.history.size() <= 3);
}

TEST_CASE("scenario_loop: history and region invariants on a toy plant") {
  RealMatrix A{{-0.1, 1.0}, {0.0, -0.2}};
  SynthesisProblem problem = make_problem(
      StateSpace(A, RealMatrix{{0.0}, {1.0}}, RealMatrix{{1.0, 0.0}}), 0,
      ObjectiveKind::kreiss);
  problem.restarts = 2;
  problem.seed = 5;
  SynthesisResult result = scenario_loop(problem);

  const auto& h = result.history;
  for (std::size_t i = 1; i < h.history.size(); ++i)
    CHECK(h.history[i].h_star >= h.history[i - 1].h_star - 1e-9);
  for (std::size_t i = 0; i < h.scenarios.size(); ++i)
    for (std::size_t j = i + 1; j < h.scenarios.size(); ++j)
      CHECK(std::abs(h.scenarios[i] - h.scenarios[j]) > 1e-6);
  for (const auto& rec : h.history)
    CHECK(rec.h_degrade >= rec.h_star * (1.0 - 1e-6) - 1e-9);

  StateSpace loop = close_loop(problem.plant, result.controller);
  CHECK(spectral_abscissa(loop.A) <= -problem.region.min_decay + 1e-9);
  Spectrum s = spectrum_of(loop.A);
  for (Index i = 0; i < s.eigenvalues.size(); ++i)
    CHECK(std::abs(s.eigenvalues(i)) <= problem.region.radius * (1.0 + 1e-9));
  auto [d_final, a_final] = destabilize(problem, result.controller);
  CHECK(a_final < 0.0);

  // Certified through the analysis module, consistent with the loop history.
  double direct = kreiss_constant(loop.A, ProjectionJ(2, 0), 1e-4).value;
  CHECK(result.certified_value == doctest::Approx(direct).epsilon(1e-2));
}

TEST_CASE("scenario_loop: deterministic for fixed seeds") {
  RealMatrix A{{-0.3, 0.8}, {0.0, -0.4}};
  SynthesisProblem problem = make_problem(
      StateSpace(A, RealMatrix{{0.0}, {1.0}}, RealMatrix{{1.0, 0.0}}), 0,
      ObjectiveKind::kreiss);
  problem.restarts = 2;
  problem.seed = 11;
  SynthesisResult a = scenario_loop(problem);
  SynthesisResult b = scenario_loop(problem);
  CHECK(a.certified_value == b.certified_value);
  CHECK(a.winner_restart == b.winner_restart);
  CHECK((a.controller.packed() - b.controller.packed()).norm() == 0.0);
  REQUIRE(a.restart_values.size() == b.restart_values.size());
  for (std::size_t i = 0; i < a.restart_values.size(); ++i)
    CHECK(a.restart_values[i] == b.restart_values[i]);
}

TEST_CASE("scenario_loop: toy certified value near the static-gain optimum") {
  RealMatrix A{{-0.1, 1.0}, {0.0, -0.2}};
  StateSpace plant(A, RealMatrix{{0.0}, {1.0}}, RealMatrix{{1.0, 0.0}});
  SynthesisProblem problem = make_problem(plant, 0, ObjectiveKind::kreiss);
  problem.restarts = 3;
  SynthesisResult result = scenario_loop(problem);

  // Brute force over the scalar gain: family value via an independent
  // frequency-grid H-infinity oracle on a Chebyshev delta grid.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 300; ++i) {
    double gain = -12.0 + 12.019 * i / 300.0;
    RealMatrix A_cl = A;
    A_cl(1, 0) += gain;
    if (spectral_abscissa(A_cl) > -problem.region.min_decay) continue;
    double worst = 0.0;
    for (int k = 0; k <= 40; ++k) {
      double delta = -std::cos(M_PI * k / 40.0);
      if (delta <= -1.0 + 1e-12) continue;
      double c = (1.0 - delta) / (1.0 + delta);
      RealMatrix M = c * A_cl - RealMatrix::Identity(2, 2);
      StateSpace chan(M, RealMatrix::Identity(2, 2),
                      RealMatrix::Identity(2, 2));
      worst = std::max(worst, grid_hinf(chan, 1500));
    }
    best = std::min(best, worst);
  }
  CHECK(result.certified_value <= best * 1.05);
  CHECK(result.certified_value >= best * 0.90);
}

TEST_CASE("scenario_loop: unstabilizable plant yields an infeasibility report") {
  SynthesisProblem problem =
      make_problem(inert_plant(RealMatrix::Constant(1, 1, 0.5)), 0,
                   ObjectiveKind::kreiss);
  problem.restarts = 2;
  CHECK_THROWS_AS(scenario_loop(problem), numerical_error);
}

TEST_SUITE_END();
