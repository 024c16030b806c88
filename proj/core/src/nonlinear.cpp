#include "ktg/nonlinear.hpp"

#include "ktg/analysis.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <ostream>
#include <vector>

namespace ktg {

NonlinearSystem NonlinearSystem::example(double R) {
  require(R > 0.0, "NonlinearSystem: R must be positive");
  NonlinearSystem sys;
  sys.R = R;
  sys.A = RealMatrix{{-1.0 / R, 1.0}, {0.0, -2.0 / R}};
  sys.B_x = RealMatrix{{0.0, -1.0}, {1.0, 0.0}};
  sys.B = RealMatrix{{1.0}, {1.0}};
  sys.C = RealMatrix{{1.0, 0.0}};
  return sys;
}

void NonlinearSystem::validate() const {
  require(R > 0.0, "NonlinearSystem: R must be positive");
  require(A.rows() == 2 && A.cols() == 2, "NonlinearSystem: A must be 2x2");
  RealMatrix A_ref{{-1.0 / R, 1.0}, {0.0, -2.0 / R}};
  require((A - A_ref).cwiseAbs().maxCoeff() <= 1e-12,
          "NonlinearSystem: A must equal [-1/R 1; 0 -2/R]");
  require(B_x.rows() == 2 && B_x.cols() == 2 &&
              (B_x + B_x.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "NonlinearSystem: B_x must be skew-symmetric");
  require(B.rows() == 2 && B.cols() >= 1, "NonlinearSystem: B must be 2 x m");
  require(C.cols() == 2 && C.rows() >= 1, "NonlinearSystem: C must be p x 2");
  require_finite(B, "NonlinearSystem.B");
  require_finite(C, "NonlinearSystem.C");
}

std::string to_string(Trajectory::Terminal t) {
  switch (t) {
    case Trajectory::Terminal::origin: return "origin";
    case Trajectory::Terminal::remote: return "remote";
    case Trajectory::Terminal::undecided: return "undecided";
  }
  return "undecided";
}

namespace {

using OdeState = std::vector<double>;

struct FeedbackDynamics {
  const NonlinearSystem& sys;
  const Controller* K;
  Index n_p, n_K, m, p;

  FeedbackDynamics(const NonlinearSystem& s, const Controller* k)
      : sys(s), K(k), n_p(s.states()) {
    n_K = K ? K->order : 0;
    m = K ? K->control_outputs() : 0;
    p = K ? K->measurement_inputs() : 0;
    if (K) {
      require(m == sys.B.cols(), "simulate: controller outputs must match B columns");
      require(p == sys.C.rows(), "simulate: controller inputs must match C rows");
    }
  }

  Index total() const { return n_p + n_K; }

  void operator()(const OdeState& s, OdeState& dsdt, double /*t*/) const {
    Eigen::Map<const RealVector> x(s.data(), n_p);
    RealVector xdot = sys.A * x + x.norm() * (sys.B_x * x);
    if (K) {
      Eigen::Map<const RealVector> xk(s.data() + n_p, n_K);
      RealVector y = sys.C * x;
      RealVector u = K->D_K * y;
      if (n_K > 0) u += K->C_K * xk;
      xdot += sys.B * u;
      RealVector xkdot = n_K > 0 ? RealVector(K->A_K * xk + K->B_K * y)
                                 : RealVector(0);
      for (Index i = 0; i < n_K; ++i) dsdt[n_p + i] = xkdot(i);
    }
    for (Index i = 0; i < n_p; ++i) dsdt[i] = xdot(i);
  }
};

}  // namespace

Trajectory simulate(const NonlinearSystem& sys, const Controller* K,
                    const RealVector& x0, double T, double tol) {
  sys.validate();
  require(T > 0.0, "simulate: horizon must be positive");
  require(tol > 0.0, "simulate: tolerance must be positive");
  require(x0.size() == sys.states(), "simulate: x0 must match the plant dimension");
  require_finite(RealMatrix(x0), "simulate.x0");

  FeedbackDynamics dynamics(sys, K);
  OdeState state(dynamics.total(), 0.0);
  for (Index i = 0; i < sys.states(); ++i) state[i] = x0(i);

  Trajectory out;
  auto record = [&](double t) {
    Eigen::Map<const RealVector> full(state.data(), dynamics.total());
    out.times.push_back(t);
    out.states.emplace_back(full);
    out.norms.push_back(full.head(sys.states()).norm());
  };
  record(0.0);

  // The decay toward the origin spans many decades, so a fixed absolute
  // error floor would turn the tail into noise; instead the floor follows
  // the current state norm (component-wise relative control alone breaks
  // down at zero crossings of individual components).
  namespace odeint = boost::numeric::odeint;
  Eigen::Map<const RealVector> full_state(state.data(), dynamics.total());
  double t = 0.0, dt = 1e-3;
  long steps = 0;
  if (full_state.norm() == 0.0) {
    t = T;  // the field vanishes identically at the origin
    record(t);
  }
  while (t < T) {
    if (t + dt > T) dt = T - t;
    auto stepper = odeint::make_controlled(
        tol * std::max(full_state.norm(), 1e-300), tol,
        odeint::runge_kutta_dopri5<OdeState>());
    auto res = stepper.try_step(dynamics, state, t, dt);
    if (res == odeint::controlled_step_result::fail) {
      if (dt < 1e-14 * (1.0 + std::abs(t)))
        throw numerical_error("simulate: step size underflow (stiff divergence)");
      continue;  // dt was shrunk by the controller
    }
    record(t);
    // Conclusively at the origin: the dynamics are linear at this scale, and
    // integrating further only walks the state toward the underflow range.
    if (full_state.norm() < 1e-11) break;
    if (++steps > 50'000'000L)
      throw numerical_error("simulate: step budget exhausted");
  }

  // Terminal classification with a linearization check at the attractor.
  Eigen::Map<const RealVector> full(state.data(), dynamics.total());
  RealVector xT = full.head(sys.states());
  double nT = xT.norm();
  if (nT < 1e-9) {
    RealMatrix A_lin = sys.A;
    if (K) A_lin = close_loop(StateSpace(sys.A, sys.B, sys.C), *K).A;
    if (spectral_abscissa(A_lin) < 0.0)
      out.classification = Trajectory::Terminal::origin;
  } else if (nT > 1e-2 && sys.field(xT).norm() < 1e-8) {
    out.classification = Trajectory::Terminal::remote;
  }
  return out;
}

std::optional<double> threshold_search(const NonlinearSystem& sys,
                                       const Controller* K,
                                       const RealVector& direction,
                                       double low, double high,
                                       double T, double tol) {
  require(low > 0.0 && high > low, "threshold_search: need 0 < low < high");
  require(direction.norm() > 0.0, "threshold_search: zero direction");

  auto classify = [&](double amplitude) {
    Trajectory tr = simulate(sys, K, amplitude * direction, T, tol);
    if (tr.classification == Trajectory::Terminal::undecided)
      throw numerical_error("threshold_search: undecided classification at amplitude " +
                            std::to_string(amplitude));
    return tr.classification;
  };

  Trajectory::Terminal lo_class = classify(low);
  Trajectory::Terminal hi_class = classify(high);
  if (lo_class == hi_class) return std::nullopt;

  double lo = low, hi = high;
  while ((hi - lo) > 1e-6 * hi) {
    double mid = 0.5 * (lo + hi);
    if (classify(mid) == lo_class)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void write_csv(const Trajectory& trajectory, std::ostream& out) {
  out << "time";
  const Index dim = trajectory.states.empty() ? 0 : trajectory.states.front().size();
  for (Index i = 0; i < dim; ++i) out << ",x" << (i + 1);
  out << ",norm\n";
  char buf[32];
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.12g", trajectory.times[k]);
    out << buf;
    for (Index i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof buf, "%.12g", trajectory.states[k](i));
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.12g", trajectory.norms[k]);
    out << ',' << buf << '\n';
  }
}

}  // namespace ktg
