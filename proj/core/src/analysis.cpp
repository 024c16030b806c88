#include "ktg/analysis.hpp"

#include "ktg/linalg.hpp"
#include "ktg/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ktg {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2

double sigma_max(const RealMatrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<RealMatrix>(M).singularValues().coeff(0);
}

double sigma_min(const ComplexMatrix& M) {
  Eigen::JacobiSVD<ComplexMatrix> svd(M);
  return svd.singularValues().coeff(svd.singularValues().size() - 1);
}

}  // namespace

double spectral_abscissa(const RealMatrix& A) {
  Spectrum sp = spectrum_of(A);
  double a = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < sp.eigenvalues.size(); ++i)
    a = std::max(a, sp.eigenvalues(i).real());
  return a;
}

double numerical_abscissa(const RealMatrix& A) {
  require_square(A, "numerical_abscissa.A");
  require_finite(A, "numerical_abscissa.A");
  RealMatrix S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(S, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, "numerical_abscissa: eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------
// H-infinity norm
// ---------------------------------------------------------------------------

HinfResult hinf_norm(const StateSpace& sys, double tol) {
  require(tol > 0.0 && tol < 1.0, "hinf_norm: tol must lie in (0, 1)");
  Spectrum sp = spectrum_of(sys.A);
  double rho = 0.0;
  for (Index i = 0; i < sp.eigenvalues.size(); ++i) {
    if (sp.eigenvalues(i).real() >= 0.0)
      throw numerical_error("hinf_norm: system is not stable");
    rho = std::max(rho, std::abs(sp.eigenvalues(i)));
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> candidates{0.0, inf};
  for (Index i = 0; i < sp.eigenvalues.size(); ++i) {
    candidates.push_back(std::abs(sp.eigenvalues(i).imag()));
    candidates.push_back(std::abs(sp.eigenvalues(i)));
  }
  // Coarse magnitude sweeps guard against gain minima at all eigen-derived
  // frequencies.
  for (double f : {0.01, 0.1, 1.0, 10.0, 100.0}) candidates.push_back(f * rho);

  double lo = 0.0, omega_star = 0.0;
  for (double w : candidates) {
    double g = transfer_gain(sys, w);
    if (g > lo) { lo = g; omega_star = w; }
  }
  if (lo < 1e-300) return {0.0, 0.0};

  double hi = 2.0 * lo;
  for (int i = 0; i < 300; ++i) {
    std::vector<double> ws = detail::hamiltonian_frequencies(sys, hi);
    if (ws.empty()) break;
    for (double w : ws) {
      double g = transfer_gain(sys, w);
      if (g > lo) { lo = g; omega_star = w; }
    }
    hi *= 2.0;
    if (i == 299) throw numerical_error("hinf_norm: no finite upper bound found");
  }

  for (int it = 0; it < 400 && (hi - lo) > tol * lo; ++it) {
    double mid = std::sqrt(hi * lo);
    std::vector<double> ws = detail::hamiltonian_frequencies(sys, mid);
    if (ws.empty()) {
      hi = mid;
      continue;
    }
    // Evaluate gains between adjacent crossings: at least one midpoint lies
    // inside a sigma_max > mid interval, pulling the lower bound up fast.
    std::vector<double> probes;
    if (ws.size() == 1) probes.push_back(ws.front());
    for (std::size_t i = 0; i + 1 < ws.size(); ++i)
      probes.push_back(0.5 * (ws[i] + ws[i + 1]));
    double best = mid, best_w = omega_star;
    for (double w : probes) {
      double g = transfer_gain(sys, w);
      if (g > best) { best = g; best_w = w; }
    }
    if (best > lo) { lo = best; omega_star = best_w; }
    lo = std::max(lo, mid);
  }
  return {lo, omega_star};
}

// ---------------------------------------------------------------------------
// Kreiss constant via the worst-case H-infinity reformulation
// ---------------------------------------------------------------------------

namespace {

StateSpace kreiss_channel_system(const RealMatrix& A, const RealMatrix& Jm,
                                 double delta) {
  const Index N = A.rows();
  double c = (1.0 - delta) / (1.0 + delta);
  RealMatrix Ad = c * A - RealMatrix::Identity(N, N);
  return StateSpace(Ad, Jm, Jm.transpose());
}

}  // namespace

KreissReport kreiss_constant(const RealMatrix& A, const ProjectionJ& J, double tol) {
  require(tol > 0.0 && tol < 0.5, "kreiss_constant: tol must lie in (0, 0.5)");
  require(A.rows() == J.total(), "kreiss_constant: A must be (n + n_K) square");
  if (spectral_abscissa(A) >= 0.0)
    throw numerical_error("kreiss_constant: A is not Hurwitz");

  const RealMatrix Jm = J.matrix();
  const double inner_tol = tol / 5.0;

  // delta = -1 contributes zero by convention; delta = 1 collapses the
  // substitution to the contraction -I whose restricted norm is exactly 1.
  auto eval = [&](double delta) -> HinfResult {
    if (delta <= -1.0) return {0.0, 0.0};
    if (delta >= 1.0) return {1.0, 0.0};
    return hinf_norm(kreiss_channel_system(A, Jm, delta), inner_tol);
  };

  constexpr int kGrid = 101;  // Chebyshev points, both endpoints included
  std::vector<double> deltas(kGrid);
  for (int k = 0; k < kGrid; ++k)
    deltas[k] = -std::cos(M_PI * static_cast<double>(k) / (kGrid - 1));

  std::vector<HinfResult> grid(kGrid);
  parallel_for(kGrid, [&](Index k) { grid[k] = eval(deltas[k]); });

  KreissReport report;
  report.tolerance = tol;
  report.profile.reserve(kGrid);
  for (int k = 0; k < kGrid; ++k)
    report.profile.emplace_back(deltas[k], grid[k].value);

  double best = -1.0, best_delta = 1.0, best_omega = 0.0;
  for (int k = 0; k < kGrid; ++k) {
    if (grid[k].value > best) {
      best = grid[k].value;
      best_delta = deltas[k];
      best_omega = grid[k].omega;
    }
  }

  // Golden-section polish around every competitive grid-local maximum.
  for (int i = 0; i < kGrid; ++i) {
    double left = i > 0 ? grid[i - 1].value : -1.0;
    double right = i + 1 < kGrid ? grid[i + 1].value : -1.0;
    if (grid[i].value < left || grid[i].value < right) continue;
    if (grid[i].value < 0.5 * best) continue;

    double a = i > 0 ? deltas[i - 1] : deltas[i];
    double b = i + 1 < kGrid ? deltas[i + 1] : deltas[i];
    if (b - a < 1e-12) continue;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    HinfResult f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 40 && (b - a) > 1e-9; ++it) {
      if (f1.value < f2.value) {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + kGolden * (b - a);
        f2 = eval(x2);
      } else {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - kGolden * (b - a);
        f1 = eval(x1);
      }
    }
    for (auto& [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
      if (f.value > best) { best = f.value; best_delta = x; best_omega = f.omega; }
    }
  }

  report.value = best;
  report.delta_star = best_delta;
  report.omega_star = best_omega;
  return report;
}

KreissReport kreiss_constant(const RealMatrix& A, double tol) {
  require_square(A, "kreiss_constant.A");
  return kreiss_constant(A, ProjectionJ(A.rows(), 0), tol);
}

// ---------------------------------------------------------------------------
// Transient growth
// ---------------------------------------------------------------------------

namespace {

struct DecayBound {
  double log_kappa = std::numeric_limits<double>::infinity();  // eig route
  double log_normN = 0.0;  // Schur route, strict upper triangle norm
  Index n = 0;
  double alpha = 0.0;

  // log of min(kappa e^{alpha t}, e^{alpha t} sum_k (|N| t)^k / k!)
  double log_bound(double t) const {
    double eig_route = log_kappa + alpha * t;
    double lognt = log_normN + std::log(t);
    double acc = 0.0;  // log-sum-exp of k*log(|N|t) - log k!
    double lgk = 0.0;
    for (Index k = 1; k < n; ++k) {
      lgk += std::log(static_cast<double>(k));
      double term = static_cast<double>(k) * lognt - lgk;
      acc = std::max(acc, term) +
            std::log1p(std::exp(-std::abs(acc - term)));
    }
    double schur_route = alpha * t + acc;
    return std::min(eig_route, schur_route);
  }

  // True when the bound is decreasing on [T, inf) and already below peak.
  bool certifies(double T, double peak) const {
    double lp = std::log(peak);
    if (log_kappa + alpha * T <= lp) return true;  // always decreasing
    bool schur_decreasing = static_cast<double>(n - 1) / T < -alpha;
    return schur_decreasing && log_bound(T) <= lp;
  }
};

DecayBound make_decay_bound(const RealMatrix& A, double alpha) {
  DecayBound b;
  b.n = A.rows();
  b.alpha = alpha;

  Eigen::EigenSolver<RealMatrix> es(A);
  if (es.info() == Eigen::Success) {
    Eigen::JacobiSVD<ComplexMatrix> svd(es.eigenvectors());
    double smax = svd.singularValues().coeff(0);
    double smin = svd.singularValues().coeff(svd.singularValues().size() - 1);
    if (smin > 0.0) b.log_kappa = std::log(smax) - std::log(smin);
  }

  Eigen::ComplexSchur<ComplexMatrix> schur(A.cast<Complex>());
  ComplexMatrix T = schur.matrixT();
  T.diagonal().setZero();
  b.log_normN = std::log(std::max(T.norm(), 1e-300));
  return b;
}

double sandwich_gain(const RealMatrix& P, Index n) {
  // J = [I_n; 0], so J^T P J is the leading n x n block.
  return sigma_max(P.topLeftCorner(n, n));
}

}  // namespace

TransientProfile transient_growth(const RealMatrix& A, const ProjectionJ& J,
                                  double tol) {
  require(A.rows() == J.total(), "transient_growth: A must be (n + n_K) square");
  require(tol > 0.0, "transient_growth: tol must be positive");
  const Index N = A.rows();
  const Index n = J.n;

  double alpha = spectral_abscissa(A);
  if (alpha >= 0.0)
    throw numerical_error("transient_growth: A is not Hurwitz (supremum may be infinite)");
  double omega = numerical_abscissa(A);

  double max_im = 0.0;
  {
    Spectrum sp = spectrum_of(A);
    for (Index i = 0; i < sp.eigenvalues.size(); ++i)
      max_im = std::max(max_im, std::abs(sp.eigenvalues(i).imag()));
  }

  const double T0 = 10.0 / std::abs(alpha);
  double dt = T0 / 2000.0;
  if (max_im > 0.0) dt = std::min(dt, 0.45 / max_im);

  // Early fine phase: resolve the initial rise whose slope is omega(A).
  double rate = std::max({omega, std::abs(alpha), 1e-12});
  double dt_fine = std::min(dt, 0.7 / rate);
  double T_fine = std::min(T0, 120.0 / rate);

  DecayBound bound = make_decay_bound(A, alpha);

  std::vector<double> times{0.0};
  std::vector<double> gains{sandwich_gain(RealMatrix::Identity(N, N), n)};

  struct Phase { double t0, dt; long steps; };
  auto run_phase = [&](double from, double to, double step_dt) {
    if (to <= from || step_dt <= 0.0) return;
    long steps = static_cast<long>(std::ceil((to - from) / step_dt));
    steps = std::min(steps, 30'000'000L);
    RealMatrix E = expm(A, step_dt);
    RealMatrix P = expm(A, from);
    for (long k = 1; k <= steps; ++k) {
      P = P * E;
      if (k % 4096 == 0) P = expm(A, from + k * step_dt);  // kill drift
      times.push_back(from + k * step_dt);
      gains.push_back(sandwich_gain(P, n));
    }
  };

  run_phase(0.0, T_fine, dt_fine);
  double resume = times.back();
  run_phase(resume, T0, dt);

  auto exact_gain = [&](double t) {
    RealMatrix P = expm(A, t);
    return sandwich_gain(P, n);
  };

  auto refine_all = [&](double& peak, double& t_peak) {
    peak = 1.0;
    t_peak = 0.0;
    double grid_best = *std::max_element(gains.begin(), gains.end());
    std::vector<std::size_t> local_maxima;
    for (std::size_t i = 0; i < gains.size(); ++i) {
      double leftv = i > 0 ? gains[i - 1] : -1.0;
      double rightv = i + 1 < gains.size() ? gains[i + 1] : -1.0;
      if (gains[i] < leftv || gains[i] < rightv) continue;
      if (gains[i] < 0.80 * grid_best) continue;
      local_maxima.push_back(i);
    }
    std::sort(local_maxima.begin(), local_maxima.end(),
              [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
    if (local_maxima.size() > 2000) local_maxima.resize(2000);

    for (std::size_t i : local_maxima) {
      double a = i > 0 ? times[i - 1] : times[i];
      double b = i + 1 < times.size() ? times[i + 1] : times[i];
      if (b - a < 1e-15) {
        if (gains[i] > peak) { peak = gains[i]; t_peak = times[i]; }
        continue;
      }
      double x1 = b - kGolden * (b - a);
      double x2 = a + kGolden * (b - a);
      double f1 = exact_gain(x1), f2 = exact_gain(x2);
      for (int it = 0; it < 30; ++it) {
        if (f1 < f2) {
          a = x1; x1 = x2; f1 = f2;
          x2 = a + kGolden * (b - a);
          f2 = exact_gain(x2);
        } else {
          b = x2; x2 = x1; f2 = f1;
          x1 = b - kGolden * (b - a);
          f1 = exact_gain(x1);
        }
      }
      for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}, std::pair{times[i], gains[i]}}) {
        if (f > peak) { peak = f; t_peak = x; }
      }
    }
  };

  double peak = 1.0, t_peak = 0.0;
  double T = T0;
  for (int extension = 0; extension < 40; ++extension) {
    refine_all(peak, t_peak);
    bool peak_interior = t_peak < 0.98 * T;
    bool horizon_ok = T >= 5.0 * t_peak;
    bool certified = bound.certifies(T, peak);
    if (peak_interior && horizon_ok && certified) break;
    double T_next = std::max(2.0 * T, 5.0 * t_peak);
    run_phase(T, T_next, dt);
    T = T_next;
    if (extension == 39)
      throw numerical_error("transient_growth: could not certify a finite horizon");
  }

  TransientProfile profile;
  profile.peak = peak;
  profile.peak_time = t_peak;
  profile.horizon = T;

  // Decimate the stored envelope; the certified peak is kept exactly.
  std::size_t stride = std::max<std::size_t>(1, gains.size() / 4000);
  for (std::size_t i = 0; i < gains.size(); i += stride) {
    profile.times.push_back(times[i]);
    profile.gains.push_back(gains[i]);
  }
  if (profile.times.back() != times.back()) {
    profile.times.push_back(times.back());
    profile.gains.push_back(gains.back());
  }
  return profile;
}

TransientProfile transient_growth(const RealMatrix& A, double tol) {
  require_square(A, "transient_growth.A");
  return transient_growth(A, ProjectionJ(A.rows(), 0), tol);
}

// ---------------------------------------------------------------------------
// Pseudospectral abscissa (criss-cross) and the eps cross-check
// ---------------------------------------------------------------------------

namespace {

// Rightmost real eigenvalue of [M, -eI; -eI, M^H] with M = A - j y I:
// the rightmost point of the eps-pseudospectrum on the horizontal line Im = y.
bool horizontal_search(const RealMatrix& A, double eps, double y, double& x_out) {
  const Index n = A.rows();
  ComplexMatrix M = A.cast<Complex>();
  M.diagonal().array() -= Complex(0.0, y);
  ComplexMatrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = M;
  H.topRightCorner(n, n) = -eps * ComplexMatrix::Identity(n, n);
  H.bottomLeftCorner(n, n) = -eps * ComplexMatrix::Identity(n, n);
  H.bottomRightCorner(n, n) = M.adjoint();
  Eigen::ComplexEigenSolver<ComplexMatrix> es(H, false);
  if (es.info() != Eigen::Success) return false;
  bool found = false;
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    Complex l = es.eigenvalues()(i);
    if (std::abs(l.imag()) > 1e-8 * (1.0 + std::abs(l))) continue;
    best = std::max(best, l.real());
    found = true;
  }
  if (found) x_out = best;
  return found;
}

// Imaginary-axis crossings of the vertical line Re = x with the
// eps-pseudospectrum boundary.
std::vector<double> vertical_search(const RealMatrix& A, double eps, double x) {
  const Index n = A.rows();
  RealMatrix M = A - x * RealMatrix::Identity(n, n);
  RealMatrix V(2 * n, 2 * n);
  V.topLeftCorner(n, n) = M;
  V.topRightCorner(n, n) = -eps * RealMatrix::Identity(n, n);
  V.bottomLeftCorner(n, n) = eps * RealMatrix::Identity(n, n);
  V.bottomRightCorner(n, n) = -M.transpose();
  Eigen::EigenSolver<RealMatrix> es(V, false);
  std::vector<double> ys;
  if (es.info() != Eigen::Success) return ys;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    Complex l = es.eigenvalues()(i);
    if (!detail::is_imaginary(l)) continue;
    ys.push_back(l.imag());
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           ys.end());
  return ys;
}

}  // namespace

double pseudospectral_abscissa(const RealMatrix& A, double eps) {
  require_square(A, "pseudospectral_abscissa.A");
  require_finite(A, "pseudospectral_abscissa.A");
  require(eps > 0.0, "pseudospectral_abscissa: eps must be positive");
  const Index n = A.rows();
  constexpr double kTol = 1e-8;

  Spectrum sp = spectrum_of(A);
  double x = -std::numeric_limits<double>::infinity(), y = 0.0;
  for (Index i = 0; i < sp.eigenvalues.size(); ++i) {
    if (sp.eigenvalues(i).real() > x) {
      x = sp.eigenvalues(i).real();
      y = sp.eigenvalues(i).imag();
    }
  }

  ComplexMatrix I_c = ComplexMatrix::Identity(n, n);
  auto inside = [&](double xx, double yy) {
    return sigma_min(Complex(xx, yy) * I_c - A.cast<Complex>()) <= eps * (1.0 + 1e-12);
  };

  for (int it = 0; it < 100; ++it) {
    double xh;
    if (!horizontal_search(A, eps, y, xh)) break;
    if (xh > x) x = xh;

    std::vector<double> ys = vertical_search(A, eps, x);
    double best_x = x, best_y = y;
    bool improved = false;
    if (ys.size() >= 2) {
      for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
        double mid = 0.5 * (ys[i] + ys[i + 1]);
        if (!inside(x, mid)) continue;
        double xc;
        if (horizontal_search(A, eps, mid, xc) && xc > best_x) {
          best_x = xc;
          best_y = mid;
          improved = true;
        }
      }
    }
    if (!improved || best_x <= x + kTol) {
      if (improved) { x = best_x; y = best_y; }
      return x;
    }
    x = best_x;
    y = best_y;
  }
  // The iteration is monotone in x; reaching the cap without meeting the
  // tolerance means the sweep kept finding new crossing segments.
  throw numerical_error("pseudospectral_abscissa: criss-cross did not converge");
}

std::vector<double> default_eps_grid() {
  std::vector<double> grid;
  const int count = 49;
  for (int i = 0; i < count; ++i) {
    double e = -6.0 + 8.0 * static_cast<double>(i) / (count - 1);
    grid.push_back(std::pow(10.0, e));
  }
  return grid;
}

EpsProfile kreiss_via_eps(const RealMatrix& A, const std::vector<double>& eps_grid) {
  require(!eps_grid.empty(), "kreiss_via_eps: empty eps grid");
  if (spectral_abscissa(A) >= 0.0)
    throw numerical_error("kreiss_via_eps: A is not Hurwitz");

  EpsProfile profile;
  profile.epsilons = eps_grid;
  profile.alphas.resize(eps_grid.size());
  parallel_for(static_cast<Index>(eps_grid.size()), [&](Index i) {
    profile.alphas[i] = pseudospectral_abscissa(A, eps_grid[i]);
  });
  profile.ratio_peak = 0.0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i)
    profile.ratio_peak = std::max(profile.ratio_peak, profile.alphas[i] / eps_grid[i]);
  return profile;
}

// ---------------------------------------------------------------------------
// H2 norm and worst-case energy
// ---------------------------------------------------------------------------

double h2_norm(const StateSpace& sys) {
  if (!sys.strictly_proper())
    throw numerical_error("h2_norm: system has feedthrough (infinite H2 norm)");
  if (spectral_abscissa(sys.A) >= 0.0)
    throw numerical_error("h2_norm: system is not stable");
  RealMatrix Wc = solve_lyapunov(sys.A.transpose(), sys.B * sys.B.transpose());
  double tr = (sys.C * Wc * sys.C.transpose()).trace();
  return std::sqrt(std::max(tr, 0.0));
}

WorstCaseEnergy worst_case_energy(const RealMatrix& A_cl, const ProjectionJ& J) {
  require(A_cl.rows() == J.total(), "worst_case_energy: A_cl must match J");
  require(J.n <= 20, "worst_case_energy: vertex enumeration guarded to n <= 20");
  if (spectral_abscissa(A_cl) >= 0.0)
    throw numerical_error("worst_case_energy: A_cl is not Hurwitz");

  const Index n = J.n;
  RealMatrix Jm = J.matrix();
  RealMatrix Y = solve_lyapunov(A_cl, Jm * Jm.transpose());
  RealMatrix Q = Jm.transpose() * Y * Jm;
  Q = 0.5 * (Q + Q.transpose());

  // Gray-code walk over half the cube (v and -v give equal energy).
  RealVector v = RealVector::Ones(n);
  RealVector s = Q * v;
  double val = v.dot(s);
  double best = val;
  RealVector best_v = v;

  const std::uint64_t count = n > 1 ? (1ull << (n - 1)) : 1;
  for (std::uint64_t k = 1; k < count; ++k) {
    int i = std::countr_zero(k);
    val += -4.0 * v(i) * s(i) + 4.0 * Q(i, i);
    s -= 2.0 * v(i) * Q.col(i);
    v(i) = -v(i);
    if (k % 4096 == 0) { s = Q * v; val = v.dot(s); }  // refresh drift
    if (val > best) { best = val; best_v = v; }
  }
  return {std::sqrt(std::max(best, 0.0)), best_v};
}

}  // namespace ktg
