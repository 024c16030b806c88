#include "ktg/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ktg {

RealMatrix expm(const RealMatrix& A, double t) {
  require_square(A, "expm.A");
  require_finite(A, "expm.A");
  require(t >= 0.0 && std::isfinite(t), "expm: t must be finite and >= 0");
  RealMatrix At = A * t;
  return At.exp();
}

RealMatrix solve_lyapunov(const RealMatrix& A, const RealMatrix& Q) {
  require_square(A, "solve_lyapunov.A");
  require_square(Q, "solve_lyapunov.Q");
  require(A.rows() == Q.rows(), "solve_lyapunov: A and Q sizes differ");
  require_finite(A, "solve_lyapunov.A");
  require_finite(Q, "solve_lyapunov.Q");
  require(Q.isApprox(Q.transpose(), 1e-10), "solve_lyapunov: Q must be symmetric");

  const Index n = A.rows();
  // Work with M = A^T so the target becomes the standard M Y + Y M^H = -Q.
  ComplexMatrix M = A.transpose().cast<Complex>();
  Eigen::ComplexSchur<ComplexMatrix> schur(M);
  require(schur.info() == Eigen::Success, "solve_lyapunov: Schur factorization failed");
  const ComplexMatrix& T = schur.matrixT();
  const ComplexMatrix& U = schur.matrixU();

  for (Index i = 0; i < n; ++i)
    if (T(i, i).real() >= 0.0)
      throw numerical_error("solve_lyapunov: A is not Hurwitz");

  ComplexMatrix Cq = -U.adjoint() * Q.cast<Complex>() * U;
  ComplexMatrix Y = ComplexMatrix::Zero(n, n);

  // T Y + Y T^H = Cq, T upper triangular: solve columns right to left.
  for (Index j = n - 1; j >= 0; --j) {
    ComplexVector rhs = Cq.col(j);
    for (Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
    ComplexMatrix S = T + std::conj(T(j, j)) * ComplexMatrix::Identity(n, n);
    Y.col(j) = S.triangularView<Eigen::Upper>().solve(rhs);
  }

  RealMatrix X = (U * Y * U.adjoint()).real();
  return 0.5 * (X + X.transpose());
}

namespace {

// Parlett-Reinsch balancing with power-of-two factors: a diagonal similarity
// that narrows the row/column norm spread without rounding, improving the
// convergence of the unsymmetric QR iteration on badly scaled matrices.
RealMatrix balanced(const RealMatrix& A) {
  RealMatrix B = A;
  const Index n = B.rows();
  bool changed = true;
  for (int sweep = 0; sweep < 50 && changed; ++sweep) {
    changed = false;
    for (Index i = 0; i < n; ++i) {
      double r = B.row(i).cwiseAbs().sum() - std::abs(B(i, i));
      double c = B.col(i).cwiseAbs().sum() - std::abs(B(i, i));
      if (r <= 0.0 || c <= 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) { c *= 2.0; r /= 2.0; f *= 2.0; }
      while (c >= r * 2.0) { c /= 2.0; r *= 2.0; f /= 2.0; }
      if (c + r < 0.95 * s) {
        changed = true;
        B.row(i) /= f;
        B.col(i) *= f;
      }
    }
  }
  return B;
}

// Eigenvalues with a balancing pass and a complex-Schur fallback; the plain
// real QR iteration occasionally stalls on Hamiltonian blocks.
ComplexVector robust_eigenvalues(const RealMatrix& A, const char* who) {
  RealMatrix B = balanced(A);
  Eigen::EigenSolver<RealMatrix> es(B, /*computeEigenvectors=*/false);
  if (es.info() == Eigen::Success) return es.eigenvalues();
  Eigen::ComplexEigenSolver<ComplexMatrix> ces(B.cast<Complex>(),
                                               /*computeEigenvectors=*/false);
  require(ces.info() == Eigen::Success,
          std::string(who) + ": eigenvalue iteration failed");
  return ces.eigenvalues();
}

}  // namespace

Spectrum spectrum_of(const RealMatrix& A) {
  require_square(A, "spectrum_of.A");
  require_finite(A, "spectrum_of.A");
  return Spectrum{robust_eigenvalues(A, "spectrum_of"), A.rows()};
}

double transfer_gain(const StateSpace& sys, double omega) {
  if (std::isinf(omega)) {
    if (sys.D.size() == 0) return 0.0;
    return sys.D.jacobiSvd().singularValues().coeff(0);
  }
  ComplexMatrix G = sys.transfer(omega);
  if (G.size() == 0) return 0.0;
  return G.jacobiSvd().singularValues().coeff(0);
}

namespace detail {

bool is_imaginary(const Complex& lambda) {
  return std::abs(lambda.real()) <= 1e-8 * (1.0 + std::abs(lambda));
}

std::vector<double> hamiltonian_frequencies(const StateSpace& sys, double gamma) {
  const Index n = sys.states();
  const Index m = sys.inputs();
  const Index p = sys.outputs();
  require(gamma > 0.0, "hamiltonian test: gamma must be positive");

  const RealMatrix& A = sys.A;
  const RealMatrix& B = sys.B;
  const RealMatrix& C = sys.C;
  const RealMatrix& D = sys.D;

  RealMatrix H(2 * n, 2 * n);
  if (sys.strictly_proper()) {
    H.topLeftCorner(n, n) = A;
    H.topRightCorner(n, n) = (B * B.transpose()) / gamma;
    H.bottomLeftCorner(n, n) = -(C.transpose() * C) / gamma;
    H.bottomRightCorner(n, n) = -A.transpose();
  } else {
    RealMatrix R = D.transpose() * D - gamma * gamma * RealMatrix::Identity(m, m);
    RealMatrix S = D * D.transpose() - gamma * gamma * RealMatrix::Identity(p, p);
    Eigen::PartialPivLU<RealMatrix> luR(R), luS(S);
    RealMatrix RinvDtC = luR.solve(D.transpose() * C);
    RealMatrix RinvBt = luR.solve(B.transpose());
    RealMatrix SinvC = luS.solve(C);
    H.topLeftCorner(n, n) = A - B * RinvDtC;
    H.topRightCorner(n, n) = -gamma * B * RinvBt;
    H.bottomLeftCorner(n, n) = gamma * C.transpose() * SinvC;
    H.bottomRightCorner(n, n) = -(A - B * RinvDtC).transpose();
  }

  ComplexVector eigs = robust_eigenvalues(H, "hamiltonian test");

  std::vector<double> freqs;
  for (Index i = 0; i < eigs.size(); ++i) {
    Complex lambda = eigs(i);
    if (!is_imaginary(lambda)) continue;
    double w = std::abs(lambda.imag());
    bool dup = false;
    for (double v : freqs)
      if (std::abs(v - w) <= 1e-9 * (1.0 + w)) { dup = true; break; }
    if (!dup) freqs.push_back(w);
  }
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

}  // namespace detail

std::vector<double> imaginary_axis_crossings(const StateSpace& sys, double gamma) {
  // The Hamiltonian is only defined for internally stable systems with
  // gamma above the feedthrough gain.
  Spectrum sp = spectrum_of(sys.A);
  for (Index i = 0; i < sp.eigenvalues.size(); ++i)
    if (sp.eigenvalues(i).real() >= 0.0)
      throw numerical_error("imaginary_axis_crossings: A is not Hurwitz");
  double d_gain = transfer_gain(sys, std::numeric_limits<double>::infinity());
  if (gamma <= d_gain)
    throw invalid_input(
        "imaginary_axis_crossings: gamma must exceed the feedthrough gain");

  std::vector<double> out;
  for (double w : detail::hamiltonian_frequencies(sys, gamma)) {
    // Keep only frequencies where the *largest* singular value meets gamma;
    // the Hamiltonian also flags lower singular-value crossings.
    if (std::abs(transfer_gain(sys, w) - gamma) <= 1e-6 * gamma) out.push_back(w);
  }
  return out;
}

}  // namespace ktg
