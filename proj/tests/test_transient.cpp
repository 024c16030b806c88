#include "ktg/analysis.hpp"
#include "ktg/fixtures.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ktg;
using namespace ktg::testing;

namespace {

double operator_norm(const RealMatrix& m) {
  return m.jacobiSvd().singularValues()(0);
}

}  // namespace

TEST_SUITE_BEGIN("transient");

TEST_CASE("spectral_abscissa: closed forms and the Grcar prerequisite") {
  RealMatrix D{{-1.0, 0.0}, {0.0, -3.0}};
  CHECK(spectral_abscissa(D) == doctest::Approx(-1.0).epsilon(1e-12));
  RealMatrix T{{-2.0, 0.0}, {3.0, -1.0}};
  CHECK(spectral_abscissa(T) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(spectral_abscissa(grcar(10)) < 0.0);
}

TEST_CASE("numerical_abscissa: closed forms and the benchmark plant") {
  CHECK(numerical_abscissa(-RealMatrix::Identity(3, 3)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  RealMatrix T{{-2.0, 0.0}, {3.0, -1.0}};
  CHECK(numerical_abscissa(T) ==
        doctest::Approx((-3.0 + std::sqrt(10.0)) / 2.0).epsilon(1e-12));
  CHECK(numerical_abscissa(example_7x7_A()) ==
        doctest::Approx(680.4).epsilon(1e-3));
}

TEST_CASE("transient_growth: contractions and triangular restriction") {
  TransientProfile c = transient_growth(-RealMatrix::Identity(2, 2));
  CHECK(c.peak == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c.peak_time == doctest::Approx(0.0));

  RealMatrix T{{-2.0, 0.0}, {3.0, -1.0}};
  TransientProfile r = transient_growth(T, ProjectionJ(1, 1));
  CHECK(r.peak == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("transient_growth: profile invariants") {
  std::mt19937_64 rng(1001);
  RealMatrix A = random_stable(rng, 4, 0.2);
  TransientProfile p = transient_growth(A);
  CHECK(p.gains.front() == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < p.times.size(); ++i)
    CHECK(p.times[i] > p.times[i - 1]);
  double max_sample = *std::max_element(p.gains.begin(), p.gains.end());
  CHECK(p.peak >= max_sample - 1e-12);
  CHECK(p.horizon >= p.peak_time);
}

TEST_CASE("transient_growth: benchmark plant peak") {
  RealMatrix A = example_7x7_A();
  TransientProfile p = transient_growth(A, 1e-4);
  CHECK(p.peak == doctest::Approx(598.45).epsilon(0.01));
  CHECK(p.peak_time == doctest::Approx(0.5934).epsilon(0.05));
  // The reported peak is attained: direct propagator evaluation agrees.
  CHECK(expm(A, p.peak_time).jacobiSvd().singularValues()(0) ==
        doctest::Approx(p.peak).epsilon(1e-9));
}

TEST_CASE("transient_growth: restricted growth never exceeds the full norm") {
  StateSpace plant = make_fixture("example-7x7").to_state_space();
  Controller K = make_fixture("controller-kreiss").to_controller();
  StateSpace loop = close_loop(plant, K);
  TransientProfile full = transient_growth(loop.A, 1e-3);
  TransientProfile restricted =
      transient_growth(loop.A, ProjectionJ(7, K.order), 1e-3);
  CHECK(restricted.peak <= full.peak * (1.0 + 1e-6));
}

TEST_CASE("transient_growth: rejects unstable input") {
  RealMatrix U{{0.1, 0.0}, {0.0, -1.0}};
  CHECK_THROWS_AS(transient_growth(U), numerical_error);
}

TEST_CASE("hinf_norm: DC gain and resonance closed forms") {
  StateSpace lag(RealMatrix::Constant(1, 1, -1.0),
                 RealMatrix::Constant(1, 1, 1.0),
                 RealMatrix::Constant(1, 1, 1.0));
  HinfResult r = hinf_norm(lag);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.omega == doctest::Approx(0.0).epsilon(1e-3));

  // G(s) = 1/(s^2 + 0.1 s + 1): peak 10.0125 near omega = 0.9975.
  RealMatrix A{{0.0, 1.0}, {-1.0, -0.1}};
  RealMatrix B{{0.0}, {1.0}};
  RealMatrix C{{1.0, 0.0}};
  HinfResult res = hinf_norm(StateSpace(A, B, C));
  CHECK(res.value == doctest::Approx(10.012523).epsilon(1e-4));
  CHECK(res.omega == doctest::Approx(0.997497).epsilon(1e-2));
  CHECK(transfer_gain(StateSpace(A, B, C), res.omega) >=
        res.value * (1.0 - 1e-5));
}

TEST_CASE("hinf_norm: rejects unstable systems") {
  StateSpace bad(RealMatrix::Constant(1, 1, 0.2),
                 RealMatrix::Constant(1, 1, 1.0),
                 RealMatrix::Constant(1, 1, 1.0));
  CHECK_THROWS_AS(hinf_norm(bad), numerical_error);
}

TEST_CASE("hinf_norm: dense-grid oracle on random systems") {
  std::mt19937_64 rng(1002);
  for (int trial = 0; trial < 20; ++trial) {
    Index m = 1 + static_cast<Index>(rng() % 2);
    Index p = 1 + static_cast<Index>(rng() % 2);
    StateSpace sys(random_stable(rng, 4), random_matrix(rng, 4, m),
                   random_matrix(rng, p, 4));
    HinfResult r = hinf_norm(sys, 1e-8);
    double oracle = grid_hinf(sys);
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-3));
  }
}

TEST_CASE("kreiss_constant: scalar and strongly dissipative cases") {
  KreissReport one = kreiss_constant(RealMatrix::Constant(1, 1, -1.0), 1e-4);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-3));

  RealMatrix A{{-2.0, 3.0}, {0.0, -2.0}};  // 4ac - b^2 = 7 > 0
  KreissReport diss = kreiss_constant(A, 1e-4);
  CHECK(diss.value == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("kreiss_constant: Grcar(10) and the nonlinear benchmark A") {
  KreissReport g10 = kreiss_constant(grcar(10), 1e-4);
  CHECK(g10.value == doctest::Approx(1.1855).epsilon(0.005));

  RealMatrix A = make_fixture("nl-A").expect("A");
  KreissReport nl = kreiss_constant(A, 1e-4);
  CHECK(nl.value == doctest::Approx(4.36).epsilon(0.01));
}

TEST_CASE("kreiss_constant: report invariants") {
  std::mt19937_64 rng(1003);
  RealMatrix A = random_stable(rng, 4, 0.2);
  const double tol = 1e-4;
  KreissReport rep = kreiss_constant(A, tol);
  CHECK(rep.value >= 1.0 - tol);
  CHECK(rep.tolerance <= tol);
  for (auto [delta, h] : rep.profile) {
    CHECK(delta >= -1.0);
    CHECK(delta <= 1.0);
    CHECK(h <= rep.value * (1.0 + tol) + 1e-12);
  }
  // The reported maximizer reproduces the value through the direct formula.
  double c = (1.0 - rep.delta_star) / (1.0 + rep.delta_star);
  RealMatrix M = c * A - RealMatrix::Identity(4, 4);
  CHECK(resolvent_gain(M, ProjectionJ(4, 0), rep.omega_star) ==
        doctest::Approx(rep.value).epsilon(5e-3));
}

TEST_CASE("kreiss_constant: rejects unstable input") {
  RealMatrix U{{0.05, 1.0}, {0.0, -1.0}};
  CHECK_THROWS_AS(kreiss_constant(U, 1e-4), numerical_error);
}

TEST_CASE("kreiss_constant: 2-D resolvent-grid oracle on random matrices") {
  std::mt19937_64 rng(1004);
  for (int trial = 0; trial < 20; ++trial) {
    RealMatrix A = random_stable(rng, 3, 0.15);
    KreissReport rep = kreiss_constant(A, 1e-4);
    double oracle = kreiss_2d_oracle(A);
    CHECK(rep.value == doctest::Approx(oracle).epsilon(0.01));
  }
}

TEST_CASE("pseudospectral_abscissa: normal shift and the eps -> 0 limit") {
  RealMatrix D{{-1.0, 0.0}, {0.0, -2.0}};
  CHECK(pseudospectral_abscissa(D, 0.1) ==
        doctest::Approx(-0.9).epsilon(1e-6));

  std::mt19937_64 rng(1005);
  for (int trial = 0; trial < 10; ++trial) {
    RealMatrix A = random_stable(rng, 4, 0.2);
    CHECK(pseudospectral_abscissa(A, 1e-9) ==
          doctest::Approx(spectral_abscissa(A)).epsilon(1e-6));
  }
}

TEST_CASE("pseudospectral_abscissa: complex-plane grid oracle") {
  std::mt19937_64 rng(1006);
  RealMatrix A = random_stable(rng, 3, 0.2);
  const double eps = 0.5;
  double reported = pseudospectral_abscissa(A, eps);

  auto smin = [&](double x, double y) {
    ComplexMatrix S = Complex(x, y) * ComplexMatrix::Identity(3, 3) -
                      A.cast<Complex>();
    auto sv = S.jacobiSvd().singularValues();
    return sv(sv.size() - 1);
  };
  double alpha = spectral_abscissa(A);
  double ymax = A.norm() + 2.0;
  double width = reported - alpha + 1.1;  // catches undershoots up to 1.0
  double best = alpha;
  double bx = alpha, by = 0.0;
  for (int i = 0; i <= 700; ++i)
    for (int j = 0; j <= 700; ++j) {
      double x = alpha - 0.1 + width * i / 700.0;
      double y = -ymax + 2.0 * ymax * j / 700.0;
      if (x > best && smin(x, y) <= eps) { best = x; bx = x; by = y; }
    }
  for (int round = 0; round < 4; ++round) {
    double span = width / 700.0 / std::pow(5.0, round);
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j) {
        double x = bx - span + 2 * span * i / 40.0;
        double y = by - span + 2 * span * j / 40.0;
        if (x > best && smin(x, y) <= eps) { best = x; bx = x; by = y; }
      }
  }
  CHECK(reported == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("pseudospectral_abscissa: monotone in eps") {
  std::mt19937_64 rng(1007);
  for (int trial = 0; trial < 10; ++trial) {
    RealMatrix A = random_stable(rng, 4, 0.2);
    double prev = -std::numeric_limits<double>::infinity();
    for (double eps : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
      double a = pseudospectral_abscissa(A, eps);
      CHECK(a >= prev - 1e-8);
      prev = a;
    }
  }
}

TEST_CASE("kreiss_via_eps: contraction bound and agreement with the delta-grid route") {
  EpsProfile normal = kreiss_via_eps(-RealMatrix::Identity(2, 2),
                                     default_eps_grid());
  CHECK(normal.ratio_peak <= 1.0 + 1e-9);
  for (std::size_t i = 1; i < normal.alphas.size(); ++i)
    CHECK(normal.alphas[i] >= normal.alphas[i - 1] - 1e-9);

  std::mt19937_64 rng(1008);
  for (int trial = 0; trial < 10; ++trial) {
    RealMatrix A = random_stable(rng, 3, 0.15);
    EpsProfile prof = kreiss_via_eps(A, default_eps_grid());
    double K = kreiss_constant(A, 1e-4).value;
    CHECK(prof.ratio_peak <= K * 1.01);
  }
}

TEST_CASE("h2_norm: closed forms and error cases") {
  StateSpace lag(RealMatrix::Constant(1, 1, -1.0),
                 RealMatrix::Constant(1, 1, 1.0),
                 RealMatrix::Constant(1, 1, 1.0));
  CHECK(h2_norm(lag) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));

  RealMatrix A{{-1.0, 0.0}, {0.0, -2.0}};
  StateSpace two(A, RealMatrix::Identity(2, 2), RealMatrix::Identity(2, 2));
  CHECK(h2_norm(two) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-10));

  StateSpace direct(RealMatrix::Constant(1, 1, -1.0),
                    RealMatrix::Constant(1, 1, 1.0),
                    RealMatrix::Constant(1, 1, 1.0),
                    RealMatrix::Constant(1, 1, 0.3));
  CHECK_THROWS_AS(h2_norm(direct), numerical_error);

  StateSpace unstable(RealMatrix::Constant(1, 1, 0.1),
                      RealMatrix::Constant(1, 1, 1.0),
                      RealMatrix::Constant(1, 1, 1.0));
  CHECK_THROWS_AS(h2_norm(unstable), numerical_error);
}

TEST_CASE("h2_norm: impulse-response quadrature oracle") {
  std::mt19937_64 rng(1009);
  for (int trial = 0; trial < 10; ++trial) {
    StateSpace sys(random_stable(rng, 4, 0.3), random_matrix(rng, 4, 2),
                   random_matrix(rng, 2, 4));
    double reported = h2_norm(sys);

    // Composite Simpson on ||C e^{At} B||_F^2 with step-composed exponentials.
    double alpha = spectral_abscissa(sys.A);
    double T = 40.0 / std::abs(alpha);
    int N = 40000;  // even
    double h = T / N;
    RealMatrix Eh = expm(sys.A, h);
    RealMatrix Ek = RealMatrix::Identity(4, 4);
    double sum = 0.0;
    for (int k = 0; k <= N; ++k) {
      double g = (sys.C * Ek * sys.B).squaredNorm();
      double w = (k == 0 || k == N) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      sum += w * g;
      Ek = Ek * Eh;
    }
    double oracle = std::sqrt(sum * h / 3.0);
    CHECK(reported == doctest::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("worst_case_energy: scalar case and maximizing vertex") {
  WorstCaseEnergy w = worst_case_energy(RealMatrix::Constant(1, 1, -1.0),
                                        ProjectionJ(1, 0));
  CHECK(w.value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  REQUIRE(w.vertex.size() == 1);
  CHECK(std::abs(std::abs(w.vertex(0)) - 1.0) < 1e-14);
}

TEST_CASE("worst_case_energy: per-vertex Lyapunov brute force") {
  std::mt19937_64 rng(1010);
  for (int trial = 0; trial < 20; ++trial) {
    Index n = 3 + static_cast<Index>(rng() % 3);
    Index q = static_cast<Index>(rng() % 3);
    RealMatrix A = random_stable(rng, n + q, 0.3);
    ProjectionJ J(n, q);
    RealMatrix Jm = J.matrix();
    WorstCaseEnergy w = worst_case_energy(A, J);

    double brute = 0.0;
    for (long long mask = 0; mask < (1LL << n); ++mask) {
      RealVector v(n);
      for (Index i = 0; i < n; ++i) v(i) = (mask >> i) & 1 ? 1.0 : -1.0;
      StateSpace per_vertex(A, Jm * v, Jm.transpose());
      brute = std::max(brute, h2_norm(per_vertex));
    }
    CHECK(std::abs(w.value - brute) <= 1e-8 * (1.0 + brute));

    // The reported vertex attains the reported value.
    StateSpace at_vertex(A, Jm * w.vertex, Jm.transpose());
    CHECK(h2_norm(at_vertex) == doctest::Approx(w.value).epsilon(1e-10));
  }
}

TEST_CASE("worst_case_energy: vertex-count guard") {
  RealMatrix A = -RealMatrix::Identity(25, 25);
  CHECK_THROWS_AS(worst_case_energy(A, ProjectionJ(25, 0)), invalid_input);
}

TEST_CASE("Kreiss sandwich on random stable matrices") {
  std::mt19937_64 rng(1011);
  for (int trial = 0; trial < 20; ++trial) {
    Index n = 2 + static_cast<Index>(rng() % 7);
    RealMatrix A = random_stable(rng, n, 0.2);
    double K = kreiss_constant(A, 1e-3).value;
    double M0 = transient_growth(A, 1e-3).peak;
    CHECK(K <= M0 * 1.01);
    CHECK(M0 <= std::exp(1.0) * double(n) * K * 1.01);
  }
}

TEST_CASE("restricted Kreiss sandwich on random loops") {
  std::mt19937_64 rng(1012);
  for (int trial = 0; trial < 20; ++trial) {
    Index n = 2 + static_cast<Index>(rng() % 4);
    Index q = 1 + static_cast<Index>(rng() % 3);
    RealMatrix A = random_stable(rng, n + q, 0.2);
    ProjectionJ J(n, q);
    double K = kreiss_constant(A, J, 1e-3).value;
    double M0 = transient_growth(A, J, 1e-3).peak;
    CHECK(K <= M0 * 1.01);
    CHECK(M0 <= std::exp(1.0) * double(n + q) * K * 1.01);
  }
}

TEST_CASE("growth-envelope properties of the numerical abscissa") {
  std::mt19937_64 rng(1013);
  for (int trial = 0; trial < 20; ++trial) {
    Index n = 2 + static_cast<Index>(rng() % 4);
    RealMatrix A = random_stable(rng, n, 0.1);
    A(0, n - 1) += 3.0;  // guarantee visible non-normality
    A -= (std::max(spectral_abscissa(A), -0.05) + 0.1) *
         RealMatrix::Identity(n, n);
    double omega = numerical_abscissa(A);

    // (a) peak = 1 iff omega <= 0: dissipative shift vs expansive original.
    RealMatrix Ad = A - (omega + 0.05) * RealMatrix::Identity(n, n);
    CHECK(transient_growth(Ad, 1e-4).peak == doctest::Approx(1.0).epsilon(1e-6));
    if (omega > 1e-3)
      CHECK(transient_growth(A, 1e-4).peak > 1.0 + 1e-6);

    // (b) every sampled gain is below the numerical-abscissa envelope.
    TransientProfile p = transient_growth(A, 1e-3);
    for (std::size_t i = 0; i < p.times.size(); ++i)
      CHECK(p.gains[i] <= std::exp(omega * p.times[i]) * (1.0 + 1e-9));

    // (c) finite-difference slope of ||e^{Ah}|| at h -> 0 recovers omega.
    double prev_err = std::numeric_limits<double>::infinity();
    for (double h : {1e-4, 1e-5, 1e-6}) {
      double slope = (operator_norm(expm(A, h)) - 1.0) / h;
      double err = std::abs(slope - omega);
      double bound = std::exp(1.0) * A.norm() * A.norm() * h + 1e-8;
      CHECK(err <= bound);
      CHECK(err <= prev_err + 1e-9);
      prev_err = err;
    }
  }
}

TEST_CASE("K >= 1 with equality for normal stable matrices") {
  std::mt19937_64 rng(1014);
  for (int trial = 0; trial < 20; ++trial) {
    Index n = 2 + static_cast<Index>(rng() % 5);
    RealMatrix A = random_stable(rng, n, 0.2);
    CHECK(kreiss_constant(A, 1e-3).value >= 1.0 - 1e-3);

    RealMatrix N = random_normal_stable(rng, n);
    CHECK(kreiss_constant(N, 1e-3).value == doctest::Approx(1.0).epsilon(5e-3));
  }
}

TEST_CASE("restricted Kreiss constant never exceeds the full one") {
  std::mt19937_64 rng(1015);
  for (int trial = 0; trial < 10; ++trial) {
    Index n = 2 + static_cast<Index>(rng() % 3);
    Index q = 1 + static_cast<Index>(rng() % 2);
    RealMatrix A = random_stable(rng, n + q, 0.2);
    double restricted = kreiss_constant(A, ProjectionJ(n, q), 1e-3).value;
    double full = kreiss_constant(A, 1e-3).value;
    CHECK(restricted <= full * (1.0 + 2e-3));
  }
}

TEST_SUITE_END();
