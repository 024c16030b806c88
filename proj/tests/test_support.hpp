#pragma once

#include "ktg/analysis.hpp"
#include "ktg/linalg.hpp"
#include "ktg/state_space.hpp"

#include <random>

namespace ktg::testing {

// Deterministic uniform(-1,1) matrix.
inline RealMatrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

// Random matrix shifted to spectral abscissa exactly -margin.
inline RealMatrix random_stable(std::mt19937_64& rng, Index n,
                                double margin = 0.3, double scale = 1.0) {
  RealMatrix A = scale * random_matrix(rng, n, n);
  A -= (spectral_abscissa(A) + margin) * RealMatrix::Identity(n, n);
  return A;
}

// Random real normal stable matrix: Q diag(blocks) Q^T with orthogonal Q and
// 2x2 rotation blocks / negative reals on the diagonal.
inline RealMatrix random_normal_stable(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  RealMatrix D = RealMatrix::Zero(n, n);
  Index i = 0;
  while (i < n) {
    double re = -u(rng);
    if (i + 1 < n && (rng() & 1)) {
      double im = u(rng);
      D(i, i) = re;
      D(i + 1, i + 1) = re;
      D(i, i + 1) = im;
      D(i + 1, i) = -im;
      i += 2;
    } else {
      D(i, i) = re;
      i += 1;
    }
  }
  Eigen::HouseholderQR<RealMatrix> qr(random_matrix(rng, n, n));
  RealMatrix Q = qr.householderQ();
  return Q * D * Q.transpose();
}

inline double sigma_max(const ComplexMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

// Direct resolvent gain sigma_max(J^T (jw I - M)^{-1} J).
inline double resolvent_gain(const RealMatrix& M, const ProjectionJ& J,
                             double omega) {
  const Index N = M.rows();
  ComplexMatrix S = Complex(0.0, omega) * ComplexMatrix::Identity(N, N) -
                    M.cast<Complex>();
  ComplexMatrix R = S.partialPivLu().solve(ComplexMatrix::Identity(N, N));
  const RealMatrix Jm = J.matrix();
  return sigma_max(Jm.transpose().cast<Complex>() * R * Jm.cast<Complex>());
}

// Independent 2-D maximization of Re(s) ||(sI - A)^{-1}|| over the right
// half-plane: coarse log-x / linear-y grid plus local box refinement. An
// oracle for the Kreiss constant, accurate to well under 1% on small stable
// matrices.
inline double kreiss_2d_oracle(const RealMatrix& A) {
  const Index n = A.rows();
  auto value = [&](double x, double y) {
    ComplexMatrix S = Complex(x, y) * ComplexMatrix::Identity(n, n) -
                      A.cast<Complex>();
    return x * sigma_max(S.partialPivLu().solve(
                   ComplexMatrix::Identity(n, n)));
  };
  const double ymax = 3.0 * A.norm() + 10.0;
  double best = 0.0, bx = 1.0, by = 0.0;
  for (int i = 0; i <= 120; ++i) {
    double x = 1e-4 * std::pow(1e8, i / 120.0);
    for (int j = 0; j <= 240; ++j) {
      double y = ymax * j / 240.0;
      double v = value(x, y);
      if (v > best) { best = v; bx = x; by = y; }
    }
  }
  double dx = bx, dy = ymax / 240.0;
  for (int round = 0; round < 5; ++round) {
    double x0 = std::max(1e-8, bx - dx), x1 = bx + dx;
    double y0 = std::max(0.0, by - dy), y1 = by + dy;
    for (int i = 0; i <= 30; ++i)
      for (int j = 0; j <= 30; ++j) {
        double x = x0 + (x1 - x0) * i / 30.0;
        double y = y0 + (y1 - y0) * j / 30.0;
        double v = value(x, y);
        if (v > best) { best = v; bx = x; by = y; }
      }
    dx = (x1 - x0) / 15.0;
    dy = (y1 - y0) / 15.0;
  }
  return best;
}

// Grid + local-refinement maximum of the transfer gain over omega >= 0:
// an independent H-infinity oracle accurate to ~1e-6 relative for the
// smooth low-order gain curves used in tests.
inline double grid_hinf(const StateSpace& sys, int coarse = 20000) {
  auto gain = [&](double w) { return transfer_gain(sys, w); };
  double best = std::max(gain(0.0), transfer_gain(sys,
                         std::numeric_limits<double>::infinity()));
  double best_w = 0.0;
  const double lo = 1e-4, hi = 1e4;
  for (int i = 0; i <= coarse; ++i) {
    double w = lo * std::pow(hi / lo, double(i) / coarse);
    double g = gain(w);
    if (g > best) { best = g; best_w = w; }
  }
  double span = best_w > 0 ? best_w : 1e-3;
  double a = std::max(0.0, best_w - 2 * span), b = best_w + 2 * span;
  for (int round = 0; round < 6; ++round) {
    double step = (b - a) / 400;
    double local = best, local_w = best_w;
    for (int i = 0; i <= 400; ++i) {
      double w = a + i * step;
      double g = gain(w);
      if (g > local) { local = g; local_w = w; }
    }
    best = local;
    a = std::max(0.0, local_w - 2 * step);
    b = local_w + 2 * step;
  }
  return best;
}

}  // namespace ktg::testing
