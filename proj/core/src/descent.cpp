#include "ktg/descent.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace ktg {

RealVector least_norm_combination(const std::vector<RealVector>& gradients) {
  require(!gradients.empty(), "least_norm_combination: no gradients");
  const Index dim = gradients.front().size();
  const Index m = static_cast<Index>(gradients.size());
  if (m == 1) return gradients.front();

  RealMatrix G(dim, m);
  for (Index j = 0; j < m; ++j) {
    require(gradients[j].size() == dim, "least_norm_combination: inconsistent sizes");
    G.col(j) = gradients[j];
  }

  RealMatrix GtG = G.transpose() * G;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(GtG, Eigen::EigenvaluesOnly);
  double L = std::max(es.eigenvalues().maxCoeff(), 1e-12);

  RealVector lam = RealVector::Constant(m, 1.0 / static_cast<double>(m));
  RealVector u(m);
  for (int it = 0; it < 400; ++it) {
    lam -= (GtG * lam) / L;
    // Euclidean projection onto the probability simplex.
    u = lam;
    std::sort(u.data(), u.data() + m, std::greater<double>());
    double cum = 0.0;
    double theta = 0.0;
    for (Index i = 0; i < m; ++i) {
      cum += u(i);
      if (u(i) * static_cast<double>(i + 1) > cum - 1.0)
        theta = (cum - 1.0) / static_cast<double>(i + 1);
    }
    lam = (lam.array() - theta).max(0.0);
  }
  return G * lam;
}

DescentState make_descent_state(RealVector x0, const Oracle& oracle,
                                const DescentOptions& opts) {
  DescentState s;
  s.x = std::move(x0);
  s.at_x = oracle(s.x);
  s.step = opts.initial_step;
  s.radius = opts.sample_radius;
  s.rng.seed(opts.seed);
  return s;
}

RealVector standard_normal(std::mt19937_64& rng, Index dim) {
  RealVector v(dim);
  auto unit = [&rng]() {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  };
  for (Index i = 0; i < dim; ++i) {
    double u1 = unit(), u2 = unit();
    v(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return v;
}

bool local_step(DescentState& state, const Oracle& oracle,
                const DescentOptions& opts) {
  if (state.stationary) return false;
  if (!state.at_x.feasible || state.at_x.gradients.empty()) {
    state.stationary = true;
    return false;
  }
  ++state.iterations;

  RealVector d = least_norm_combination(state.at_x.gradients);
  double nd = d.norm();
  if (nd < opts.stationarity_tol) {
    state.stationary = true;
    return false;
  }

  double f = state.at_x.value;
  double s = state.step;
  for (int k = 0; k < 28; ++k) {
    RealVector x2 = state.x - (s / nd) * d;
    Evaluation e2 = oracle(x2);
    if (e2.feasible && e2.value < f - opts.armijo * s * nd) {
      state.x = std::move(x2);
      state.at_x = std::move(e2);
      double cap = std::max(opts.max_step,
                            opts.relative_max_step * state.x.norm());
      state.step = std::min(s * opts.step_growth, cap);
      return true;
    }
    s *= 0.5;
  }
  state.step = std::max(state.step * 0.5, 1e-8);

  // Gradient sampling: enrich the bundle with gradients from nearby points so
  // the least-norm direction sees every surface meeting near the iterate.
  // Radii are relative to the iterate scale so sampling remains meaningful
  // whether the minimizer sits at norm 1e-2 or 1e3.
  const double scale = 1.0 + state.x.norm();
  while (state.radius >= opts.min_sample_radius) {
    std::vector<RealVector> bundle = state.at_x.gradients;
    for (int j = 0; j < opts.sample_count; ++j) {
      RealVector xs = state.x +
                      state.radius * scale * standard_normal(state.rng, state.x.size());
      Evaluation es = oracle(xs);
      if (!es.feasible) continue;
      for (auto& g : es.gradients) bundle.push_back(std::move(g));
    }
    d = least_norm_combination(bundle);
    nd = d.norm();
    if (nd >= opts.stationarity_tol) {
      double ss = state.radius * scale;
      double accept_tol = 1e-9 * (1.0 + std::abs(f));
      for (int k = 0; k < 24; ++k) {
        RealVector x2 = state.x - (ss / std::max(nd, 1e-300)) * d;
        Evaluation e2 = oracle(x2);
        if (e2.feasible && e2.value < f - accept_tol) {
          state.x = std::move(x2);
          state.at_x = std::move(e2);
          return true;
        }
        ss *= 0.5;
      }
    }
    state.radius *= opts.sample_shrink;
  }
  state.stationary = true;
  return false;
}

DescentResult minimize(const Oracle& oracle, RealVector x0,
                       const DescentOptions& opts) {
  DescentState state = make_descent_state(std::move(x0), oracle, opts);
  while (state.iterations < opts.max_iterations) {
    if (!local_step(state, oracle, opts)) break;
  }
  DescentResult result;
  result.point = std::move(state.x);
  result.value = state.at_x.feasible ? state.at_x.value
                                     : std::numeric_limits<double>::infinity();
  result.iterations = state.iterations;
  result.stationary = state.stationary;
  return result;
}

}  // namespace ktg
