#include "ktg/synthesis.hpp"

#include "ktg/linalg.hpp"
#include "ktg/parallel.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ktg {

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kreiss: return "kreiss";
    case ObjectiveKind::numabs: return "numabs";
    case ObjectiveKind::h2match: return "h2match";
    case ObjectiveKind::wcenergy: return "wcenergy";
  }
  throw invalid_input("unknown objective kind");
}

ObjectiveKind objective_from_string(const std::string& name) {
  if (name == "kreiss") return ObjectiveKind::kreiss;
  if (name == "numabs") return ObjectiveKind::numabs;
  if (name == "h2match") return ObjectiveKind::h2match;
  if (name == "wcenergy") return ObjectiveKind::wcenergy;
  throw invalid_input("unknown objective: " + name +
                      " (expected kreiss|numabs|h2match|wcenergy)");
}

void SynthesisProblem::validate() const {
  require(plant.strictly_proper(), "SynthesisProblem: plant must have D = 0");
  require(controller_order >= 0, "SynthesisProblem: controller order must be >= 0");
  require(restarts >= 1, "SynthesisProblem: restarts must be >= 1");
  require(scenario_tol > 0.0, "SynthesisProblem: scenario tol must be positive");
  region.validate();
  if (reference.size() > 0) {
    require_square(reference, "SynthesisProblem.reference");
    require_finite(reference, "SynthesisProblem.reference");
    require(reference.rows() == plant.states(),
            "SynthesisProblem: reference must match the plant state dimension");
  }
}

RealMatrix SynthesisProblem::reference_or_default() const {
  if (reference.size() > 0) return reference;
  return -RealMatrix::Identity(plant.states(), plant.states());
}

namespace {

constexpr double kActiveRel = 1e-3;   // active-branch threshold
constexpr double kHinfTol = 1e-5;     // scenario-channel norm tolerance
constexpr double kBigAlpha = 1e300;   // destabilize sentinel at delta = -1

double substitution_gain(double delta) { return (1.0 - delta) / (1.0 + delta); }

// Everything fixed across one synthesis problem, shared by the oracles.
struct SynthContext {
  AugmentedBlocks blocks;
  RealMatrix Jm;          // (n + n_K) x n
  ComplexMatrix B_c, C_c; // complex casts of B_a, C_a for frequency gradients
  ObjectiveKind kind;
  RealMatrix A_r;
  DiskRegion region;
  Index n = 0, n_K = 0;
  Index rows = 0, cols = 0;  // packed controller dimensions

  explicit SynthContext(const SynthesisProblem& p)
      : blocks(augmented_blocks(p.plant, p.controller_order)),
        kind(p.objective),
        A_r(p.reference_or_default()),
        region(p.region),
        n(p.plant.states()),
        n_K(p.controller_order) {
    Jm = blocks.J.matrix();
    B_c = blocks.B_a.cast<Complex>();
    C_c = blocks.C_a.cast<Complex>();
    rows = blocks.B_a.cols();
    cols = blocks.C_a.rows();
  }

  Index dim() const { return rows * cols; }

  RealMatrix unpack(const RealVector& th) const {
    return Eigen::Map<const RealMatrix>(th.data(), rows, cols);
  }

  RealVector pack(const RealMatrix& K_a) const {
    return Eigen::Map<const RealVector>(K_a.data(), K_a.size());
  }

  RealMatrix closed_loop(const RealVector& th) const {
    return blocks.A_a + blocks.B_a * unpack(th) * blocks.C_a;
  }
};

// Right/left eigen structure of the closed loop with branch gradients for the
// spectral abscissa and radius.
struct EigInfo {
  double alpha = 0.0;
  double rho = 0.0;
  std::vector<RealVector> alpha_grads;
  std::vector<RealVector> rho_grads;
};

EigInfo eig_info(const SynthContext& ctx, const RealMatrix& M) {
  Eigen::EigenSolver<RealMatrix> er(M);
  Eigen::EigenSolver<RealMatrix> el(M.transpose());
  if (er.info() != Eigen::Success || el.info() != Eigen::Success)
    throw numerical_error("synthesis: eigensolver failed on the closed loop");

  ComplexVector lam = er.eigenvalues();
  ComplexVector lamT = el.eigenvalues();
  EigInfo info;
  info.alpha = lam.real().maxCoeff();
  info.rho = lam.cwiseAbs().maxCoeff();

  auto branch_gradient = [&](Index i) -> ComplexMatrix {
    // Match the left eigenvector through the transposed spectrum; w with
    // M^T w = lambda w gives d lambda / dK = (B_a^T w)(C_a x)^T / (w^T x).
    Index j = 0;
    (lamT.array() - lam(i)).abs().minCoeff(&j);
    ComplexVector x = er.eigenvectors().col(i);
    ComplexVector w = el.eigenvectors().col(j);
    Complex s = w.transpose() * x;
    if (std::abs(s) < 1e-14) return ComplexMatrix();
    ComplexVector a = ctx.B_c.transpose() * w;
    ComplexVector b = ctx.C_c * x;
    return (a * b.transpose()) / s;
  };

  for (Index i = 0; i < lam.size(); ++i) {
    if (lam(i).imag() < -1e-12) continue;  // conjugate twin duplicates the gradient
    bool alpha_active = lam(i).real() >= info.alpha - 1e-7 * (1.0 + std::abs(info.alpha));
    bool rho_active = std::abs(lam(i)) >= info.rho * (1.0 - 1e-7);
    if (!alpha_active && !rho_active) continue;
    ComplexMatrix dl = branch_gradient(i);
    if (dl.size() == 0) continue;
    if (alpha_active)
      info.alpha_grads.push_back(ctx.pack(dl.real()));
    if (rho_active && info.rho > 1e-300) {
      ComplexMatrix scaled = std::conj(lam(i)) * dl;
      info.rho_grads.push_back(ctx.pack(scaled.real() / std::abs(lam(i))));
    }
  }
  if (info.alpha_grads.empty()) info.alpha_grads.push_back(RealVector::Zero(ctx.dim()));
  if (info.rho_grads.empty()) info.rho_grads.push_back(RealVector::Zero(ctx.dim()));
  return info;
}

// Gradient of sigma_max(J^T (jw I - (c A_cl - I))^{-1} J) with respect to the
// packed controller, via the top singular pair.
RealVector channel_gradient(const SynthContext& ctx, const RealMatrix& Md,
                            double c, double omega) {
  const Index N = Md.rows();
  ComplexMatrix shift = Complex(0.0, omega) * ComplexMatrix::Identity(N, N) -
                        Md.cast<Complex>();
  ComplexMatrix R = shift.partialPivLu().solve(ComplexMatrix::Identity(N, N));
  ComplexMatrix RJ = R * ctx.Jm.cast<Complex>();
  ComplexMatrix G = ctx.Jm.transpose().cast<Complex>() * RJ;
  Eigen::JacobiSVD<ComplexMatrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ComplexVector u = svd.matrixU().col(0);
  ComplexVector v = svd.matrixV().col(0);
  ComplexVector a = ctx.B_c.transpose() * (R.transpose() * (ctx.Jm.cast<Complex>() * u.conjugate()));
  ComplexVector b = ctx.C_c * (RJ * v);
  RealMatrix g = c * (a * b.transpose()).real();
  return ctx.pack(g);
}

struct ObjectiveEval {
  double value = std::numeric_limits<double>::infinity();
  std::vector<RealVector> gradients;
  bool ok = false;
};

// Raw (unpenalized) objective with active-branch gradients.
ObjectiveEval raw_objective(const SynthContext& ctx, const RealMatrix& M,
                            double alpha, const std::vector<double>& scenarios) {
  ObjectiveEval out;
  switch (ctx.kind) {
    case ObjectiveKind::kreiss: {
      struct Branch { double value, c, omega; };
      std::vector<Branch> branches;
      double vmax = -1.0;
      for (double d : scenarios) {
        if (d <= -1.0) continue;  // contributes the zero matrix
        double c = substitution_gain(d);
        if (c * alpha - 1.0 >= -1e-10) return out;  // scenario not stable
        if (c == 0.0) {
          branches.push_back({1.0, 0.0, 0.0});
          vmax = std::max(vmax, 1.0);
          continue;
        }
        RealMatrix Md = c * M - RealMatrix::Identity(M.rows(), M.cols());
        HinfResult h = hinf_norm(StateSpace(Md, ctx.Jm, ctx.Jm.transpose()), kHinfTol);
        branches.push_back({h.value, c, h.omega});
        vmax = std::max(vmax, h.value);
      }
      if (branches.empty()) return out;
      out.value = vmax;
      for (const Branch& br : branches) {
        if (br.value < vmax * (1.0 - kActiveRel)) continue;
        if (br.c == 0.0) {
          out.gradients.push_back(RealVector::Zero(ctx.dim()));
          continue;
        }
        RealMatrix Md = br.c * M - RealMatrix::Identity(M.rows(), M.cols());
        out.gradients.push_back(channel_gradient(ctx, Md, br.c, br.omega));
      }
      out.ok = true;
      return out;
    }
    case ObjectiveKind::numabs: {
      RealMatrix S = 0.5 * (M.topLeftCorner(ctx.n, ctx.n) +
                            M.topLeftCorner(ctx.n, ctx.n).transpose());
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(S);
      if (es.info() != Eigen::Success) return out;
      double w = es.eigenvalues().maxCoeff();
      out.value = w;
      for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()(i) < w - 1e-7 * (1.0 + std::abs(w))) continue;
        RealVector x = es.eigenvectors().col(i);
        RealVector Jx = ctx.Jm * x;
        RealMatrix g = (ctx.blocks.B_a.transpose() * Jx) *
                       (ctx.blocks.C_a * Jx).transpose();
        out.gradients.push_back(ctx.pack(g));
      }
      out.ok = true;
      return out;
    }
    case ObjectiveKind::h2match: {
      if (alpha >= -1e-12) return out;
      const Index N = M.rows(), nr = ctx.A_r.rows();
      RealMatrix At = RealMatrix::Zero(N + nr, N + nr);
      At.topLeftCorner(N, N) = M;
      At.bottomRightCorner(nr, nr) = ctx.A_r;
      RealMatrix Bt(N + nr, ctx.n);
      Bt.topRows(N) = ctx.Jm;
      Bt.bottomRows(nr) = RealMatrix::Identity(nr, nr);
      RealMatrix Ct(ctx.n, N + nr);
      Ct.leftCols(N) = ctx.Jm.transpose();
      Ct.rightCols(nr) = -RealMatrix::Identity(nr, nr);
      RealMatrix W, Z;
      try {
        W = solve_lyapunov(At.transpose(), Bt * Bt.transpose());
        Z = solve_lyapunov(At, Ct.transpose() * Ct);
      } catch (const numerical_error&) {
        return out;
      }
      double v2 = std::max((Ct * W * Ct.transpose()).trace(), 0.0);
      double v = std::sqrt(v2);
      RealMatrix ZW = (Z * W).topLeftCorner(N, N);
      RealMatrix g2 = 2.0 * ctx.blocks.B_a.transpose() * ZW * ctx.blocks.C_a.transpose();
      out.value = v;
      out.gradients.push_back(ctx.pack(g2 / (2.0 * std::max(v, 1e-9))));
      out.ok = true;
      return out;
    }
    case ObjectiveKind::wcenergy: {
      if (alpha >= -1e-12) return out;
      WorstCaseEnergy wc;
      RealMatrix Y;
      try {
        Y = solve_lyapunov(M, ctx.Jm * ctx.Jm.transpose());
        wc = worst_case_energy(M, ctx.blocks.J);
      } catch (const numerical_error&) {
        return out;
      }
      RealVector Jv = ctx.Jm * wc.vertex;
      RealMatrix Z;
      try {
        Z = solve_lyapunov(M.transpose(), Jv * Jv.transpose());
      } catch (const numerical_error&) {
        return out;
      }
      double v = wc.value;
      RealMatrix g2 = 2.0 * ctx.blocks.B_a.transpose() * (Y * Z) *
                      ctx.blocks.C_a.transpose();
      out.value = v;
      out.gradients.push_back(ctx.pack(g2 / (2.0 * std::max(v, 1e-9))));
      out.ok = true;
      return out;
    }
  }
  return out;
}

// Exact-penalty oracle: objective + W * ((alpha + decay)_+ + (rho - radius)_+).
Oracle make_penalized_oracle(const SynthContext& ctx,
                             const std::vector<double>& scenarios, double weight) {
  return [&ctx, scenarios, weight](const RealVector& th) -> Evaluation {
    RealMatrix M = ctx.closed_loop(th);
    if (!M.allFinite()) return Evaluation::infeasible();
    EigInfo ei = eig_info(ctx, M);
    ObjectiveEval obj = raw_objective(ctx, M, ei.alpha, scenarios);
    if (!obj.ok) return Evaluation::infeasible();

    double viol_a = std::max(0.0, ei.alpha + ctx.region.min_decay);
    double viol_r = std::max(0.0, ei.rho - ctx.region.radius);

    Evaluation e;
    e.feasible = true;
    e.value = obj.value + weight * (viol_a + viol_r);
    for (const RealVector& g : obj.gradients) {
      if (viol_a <= 0.0 && viol_r <= 0.0) {
        e.gradients.push_back(g);
        continue;
      }
      for (const RealVector& ga : ei.alpha_grads) {
        if (viol_r <= 0.0) {
          e.gradients.push_back(g + (viol_a > 0.0 ? weight : 0.0) * ga);
          continue;
        }
        for (const RealVector& gr : ei.rho_grads) {
          RealVector tot = g;
          if (viol_a > 0.0) tot += weight * ga;
          tot += weight * gr;
          e.gradients.push_back(std::move(tot));
          if (e.gradients.size() >= 24) break;
        }
        if (e.gradients.size() >= 24) break;
      }
      if (e.gradients.size() >= 24) break;
    }
    return e;
  };
}

// Stabilization objective: max over scenarios of the family abscissa together
// with the decay margin, plus a radius penalty. Negative value == strictly
// feasible start for the multi-model phase.
Oracle make_stabilization_oracle(const SynthContext& ctx,
                                 const std::vector<double>& scenarios,
                                 double radius_weight) {
  double c_max = 0.0;
  for (double d : scenarios)
    if (d > -1.0) c_max = std::max(c_max, substitution_gain(d));
  return [&ctx, c_max, radius_weight](const RealVector& th) -> Evaluation {
    RealMatrix M = ctx.closed_loop(th);
    if (!M.allFinite()) return Evaluation::infeasible();
    EigInfo ei = eig_info(ctx, M);
    // Scenario abscissas are affine in alpha: alpha(c A - I) = c alpha - 1.
    double fam = c_max * ei.alpha - 1.0;
    double margin = ei.alpha + ctx.region.min_decay;
    double f = std::max(fam, margin);
    double viol_r = std::max(0.0, ei.rho - ctx.region.radius);

    Evaluation e;
    e.feasible = true;
    e.value = f + radius_weight * viol_r;
    double tol = 1e-9 * (1.0 + std::abs(f));
    for (const RealVector& ga : ei.alpha_grads) {
      std::vector<RealVector> scaled;
      if (fam >= f - tol && c_max > 0.0) scaled.push_back(c_max * ga);
      if (margin >= f - tol) scaled.push_back(ga);
      for (RealVector& g : scaled) {
        if (viol_r > 0.0) {
          for (const RealVector& gr : ei.rho_grads) {
            e.gradients.push_back(g + radius_weight * gr);
            if (e.gradients.size() >= 24) break;
          }
        } else {
          e.gradients.push_back(std::move(g));
        }
        if (e.gradients.size() >= 24) break;
      }
      if (e.gradients.size() >= 24) break;
    }
    if (e.gradients.empty()) e.gradients.push_back(RealVector::Zero(ctx.dim()));
    return e;
  };
}

bool disk_feasible(const SynthContext& ctx, const RealVector& th,
                   const std::vector<double>& scenarios, double slack = 1e-9) {
  RealMatrix M = ctx.closed_loop(th);
  Spectrum sp = spectrum_of(M);
  double alpha = sp.eigenvalues.real().maxCoeff();
  double rho = sp.eigenvalues.cwiseAbs().maxCoeff();
  if (alpha > -ctx.region.min_decay + slack) return false;
  if (rho > ctx.region.radius + 1e-6 * ctx.region.radius) return false;
  for (double d : scenarios) {
    if (d <= -1.0) continue;
    if (substitution_gain(d) * alpha - 1.0 >= -1e-10) return false;
  }
  return true;
}

RealVector stabilize(const SynthContext& ctx, RealVector th,
                     const std::vector<double>& scenarios) {
  if (disk_feasible(ctx, th, scenarios)) return th;
  double weight = 100.0;
  for (int round = 0; round < 6; ++round) {
    Oracle oracle = make_stabilization_oracle(ctx, scenarios, weight);
    DescentOptions opts;
    opts.max_iterations = 600;
    opts.seed = 1729;
    DescentState state = make_descent_state(th, oracle, opts);
    while (state.iterations < opts.max_iterations) {
      if (state.at_x.feasible && state.at_x.value < -1e-8 &&
          disk_feasible(ctx, state.x, scenarios))
        break;
      if (!local_step(state, oracle, opts)) break;
    }
    th = state.x;
    if (disk_feasible(ctx, th, scenarios)) return th;
    weight *= 10.0;
  }
  throw numerical_error(
      "synthesis: stabilization phase found no stabilizing controller");
}

}  // namespace

double objective_value(ObjectiveKind kind, const SynthesisProblem& problem,
                       const Controller& K) {
  problem.validate();
  StateSpace loop = close_loop(problem.plant, K);
  ProjectionJ J(problem.plant.states(), K.order);
  switch (kind) {
    case ObjectiveKind::kreiss:
      return kreiss_constant(loop.A, J).value;
    case ObjectiveKind::numabs:
      return numerical_abscissa(loop.A.topLeftCorner(J.n, J.n));
    case ObjectiveKind::h2match: {
      RealMatrix A_r = problem.reference_or_default();
      const Index N = loop.A.rows(), nr = A_r.rows();
      RealMatrix Jm = J.matrix();
      RealMatrix At = RealMatrix::Zero(N + nr, N + nr);
      At.topLeftCorner(N, N) = loop.A;
      At.bottomRightCorner(nr, nr) = A_r;
      RealMatrix Bt(N + nr, J.n);
      Bt.topRows(N) = Jm;
      Bt.bottomRows(nr) = RealMatrix::Identity(nr, nr);
      RealMatrix Ct(J.n, N + nr);
      Ct.leftCols(N) = Jm.transpose();
      Ct.rightCols(nr) = -RealMatrix::Identity(nr, nr);
      return h2_norm(StateSpace(At, Bt, Ct));
    }
    case ObjectiveKind::wcenergy:
      return worst_case_energy(loop.A, J).value;
  }
  throw invalid_input("unknown objective kind");
}

std::pair<Controller, double> multimodel_min(const SynthesisProblem& problem,
                                             const std::vector<double>& scenarios,
                                             const Controller& K0) {
  problem.validate();
  require(!scenarios.empty(), "multimodel_min: scenario set is empty");
  SynthContext ctx(problem);
  require(K0.order == problem.controller_order,
          "multimodel_min: controller order mismatch");

  RealVector th = ctx.pack(K0.packed());
  bool started_feasible = disk_feasible(ctx, th, scenarios);
  th = stabilize(ctx, th, scenarios);

  auto raw_value = [&](const RealVector& t) {
    RealMatrix M = ctx.closed_loop(t);
    double alpha = spectrum_of(M).eigenvalues.real().maxCoeff();
    ObjectiveEval obj = raw_objective(ctx, M, alpha, scenarios);
    return obj.ok ? obj.value : std::numeric_limits<double>::infinity();
  };
  RealVector th0 = th;
  double h0 = raw_value(th0);

  double weight = 100.0;
  for (int escalation = 0; escalation < 6; ++escalation) {
    Oracle oracle = make_penalized_oracle(ctx, scenarios, weight);
    DescentOptions opts;
    opts.max_iterations = 600;
    opts.seed = 42;
    DescentResult res = minimize(oracle, th, opts);
    if (res.value < std::numeric_limits<double>::infinity()) th = res.point;
    if (disk_feasible(ctx, th, scenarios)) break;
    weight *= 10.0;
  }

  double h = raw_value(th);
  if (started_feasible && h > h0 + 1e-12) {  // descent guarantee
    th = th0;
    h = h0;
  }
  return {Controller::from_packed(ctx.unpack(th), problem.controller_order), h};
}

std::pair<double, double> destabilize(const SynthesisProblem& problem,
                                      const Controller& K) {
  problem.validate();
  StateSpace loop = close_loop(problem.plant, K);
  double alpha = spectral_abscissa(loop.A);

  auto family_abscissa = [alpha](double delta) {
    if (delta <= -1.0) {
      if (alpha > 1e-12) return kBigAlpha;
      if (alpha < -1e-12) return -kBigAlpha;
      return -1.0;
    }
    return substitution_gain(delta) * alpha - 1.0;
  };

  const int grid = 201;
  double best = -std::numeric_limits<double>::infinity(), best_d = 0.0;
  std::vector<double> vals(grid);
  for (int k = 0; k < grid; ++k) {
    double d = -1.0 + 2.0 * k / (grid - 1);
    vals[k] = family_abscissa(d);
    if (vals[k] > best) { best = vals[k]; best_d = d; }
  }
  // Golden refinement around the grid argmax (the family abscissa is monotone
  // in delta, but the contract is grid + refinement).
  int ki = static_cast<int>(std::lround((best_d + 1.0) * (grid - 1) / 2.0));
  double a = -1.0 + 2.0 * std::max(0, ki - 1) / (grid - 1);
  double b = -1.0 + 2.0 * std::min(grid - 1, ki + 1) / (grid - 1);
  constexpr double kGolden = 0.6180339887498949;
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = family_abscissa(x1), f2 = family_abscissa(x2);
  for (int it = 0; it < 40 && (b - a) > 1e-10; ++it) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = family_abscissa(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = family_abscissa(x1);
    }
  }
  for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (f > best) { best = f; best_d = x; }
  }
  return {best_d, best};
}

std::pair<double, double> degrade(const SynthesisProblem& problem,
                                  const Controller& K) {
  problem.validate();
  if (problem.objective != ObjectiveKind::kreiss) {
    // The remaining objectives do not depend on delta: the profile is flat.
    return {0.0, objective_value(problem.objective, problem, K)};
  }

  StateSpace loop = close_loop(problem.plant, K);
  double alpha = spectral_abscissa(loop.A);
  if (alpha >= 0.0)
    throw numerical_error("degrade: family is not uniformly stable");
  ProjectionJ J(problem.plant.states(), K.order);
  RealMatrix Jm = J.matrix();
  const Index N = loop.A.rows();

  auto value_at = [&](double delta) -> double {
    if (delta <= -1.0) return 0.0;
    if (delta >= 1.0) return 1.0;
    double c = substitution_gain(delta);
    RealMatrix Md = c * loop.A - RealMatrix::Identity(N, N);
    return hinf_norm(StateSpace(Md, Jm, Jm.transpose()), kHinfTol).value;
  };

  const int grid = 201;
  std::vector<double> deltas(grid), vals(grid);
  for (int k = 0; k < grid; ++k) deltas[k] = -1.0 + 2.0 * k / (grid - 1);
  parallel_for(grid, [&](Index k) { vals[k] = value_at(deltas[k]); },
               problem.workers);

  double best = -1.0, best_d = 0.0;
  for (int k = 0; k < grid; ++k)
    if (vals[k] > best) { best = vals[k]; best_d = deltas[k]; }

  constexpr double kGolden = 0.6180339887498949;
  int refined = 0;
  for (int i = 0; i < grid && refined < 20; ++i) {
    double left = i > 0 ? vals[i - 1] : -1.0;
    double right = i + 1 < grid ? vals[i + 1] : -1.0;
    if (vals[i] < left || vals[i] < right) continue;
    if (vals[i] < 0.9 * best) continue;
    ++refined;
    double a = i > 0 ? deltas[i - 1] : deltas[i];
    double b = i + 1 < grid ? deltas[i + 1] : deltas[i];
    if (b - a < 1e-12) continue;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = value_at(x1), f2 = value_at(x2);
    for (int it = 0; it < 30 && (b - a) > 1e-9; ++it) {
      if (f1 < f2) {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + kGolden * (b - a);
        f2 = value_at(x2);
      } else {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - kGolden * (b - a);
        f1 = value_at(x1);
      }
    }
    for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
      if (f > best) { best = f; best_d = x; }
    }
  }
  return {best_d, best};
}

SynthesisResult scenario_loop(const SynthesisProblem& problem) {
  problem.validate();
  SynthContext ctx(problem);
  const Index dim = ctx.dim();

  SynthesisResult result;
  result.restart_values.assign(problem.restarts, std::numeric_limits<double>::infinity());

  for (int r = 0; r < problem.restarts; ++r) {
    RealVector th0;
    if (r == 0) {
      th0 = RealVector::Zero(dim);
    } else {
      std::mt19937_64 rng(problem.seed + static_cast<std::uint64_t>(r));
      // Spread restarts across gain scales: useful local minima of
      // non-normality objectives are routinely high-gain, and a fixed
      // small radius would leave those basins unexplored.
      std::uniform_real_distribution<double> log_scale(-2.0, 3.0);
      th0 = std::pow(10.0, log_scale(rng)) * standard_normal(rng, dim);
    }
    Controller K = Controller::from_packed(ctx.unpack(th0), problem.controller_order);

    ScenarioState state;
    bool failed = false;
    for (int round = 0; round < 30; ++round) {
      double h_star;
      try {
        std::tie(K, h_star) = multimodel_min(problem, state.scenarios, K);
      } catch (const numerical_error&) {
        failed = true;  // infeasibility report for this restart
        break;
      }
      auto [d_bad, alpha_star] = destabilize(problem, K);
      if (alpha_star >= 0.0) {
        double d_add = std::max(d_bad, -1.0 + 1e-4);
        state.history.push_back({h_star, d_add, alpha_star,
                                 std::numeric_limits<double>::infinity()});
        bool fresh = true;
        for (double d : state.scenarios)
          if (std::abs(d - d_add) <= 1e-6) fresh = false;
        if (!fresh) { failed = true; break; }
        state.scenarios.push_back(d_add);
        continue;
      }
      auto [d_star, h_deg] = degrade(problem, K);
      state.history.push_back({h_star, d_star, alpha_star, h_deg});
      if (h_deg < (1.0 + problem.scenario_tol) * h_star) {
        state.status = ScenarioState::Status::converged;
        break;
      }
      bool fresh = true;
      for (double d : state.scenarios)
        if (std::abs(d - d_star) <= 1e-6) fresh = false;
      if (!fresh) {
        state.status = ScenarioState::Status::converged;
        break;
      }
      state.scenarios.push_back(d_star);
    }
    if (failed) continue;

    double certified;
    try {
      certified = objective_value(problem.objective, problem, K);
    } catch (const numerical_error&) {
      continue;
    }
    if (state.status == ScenarioState::Status::converged)
      state.status = ScenarioState::Status::certified;
    result.restart_values[r] = certified;
    if (certified < result.certified_value) {
      result.certified_value = certified;
      result.controller = K;
      result.history = std::move(state);
      result.winner_restart = r;
    }
  }

  if (result.winner_restart < 0)
    throw numerical_error("synthesis: every restart failed to stabilize the family");
  return result;
}

}  // namespace ktg
