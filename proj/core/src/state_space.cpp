#include "ktg/state_space.hpp"

#include <Eigen/LU>

#include <cmath>
#include <utility>

namespace ktg {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kRcondFloor = 1e-12;  // 1 / conditioning threshold 1e12
}  // namespace

StateSpace::StateSpace(RealMatrix A_, RealMatrix B_, RealMatrix C_)
    : StateSpace(std::move(A_), std::move(B_), std::move(C_), RealMatrix()) {}

StateSpace::StateSpace(RealMatrix A_, RealMatrix B_, RealMatrix C_, RealMatrix D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
  require_square(A, "StateSpace.A");
  if (B.size() == 0 && B.rows() == 0) B = RealMatrix::Zero(A.rows(), 0);
  if (C.size() == 0 && C.rows() == 0) C = RealMatrix::Zero(0, A.cols());
  require(B.rows() == A.rows(), "StateSpace.B: row count must match states");
  require(C.cols() == A.cols(), "StateSpace.C: column count must match states");
  if (D.size() == 0 && D.rows() == 0) D = RealMatrix::Zero(C.rows(), B.cols());
  require(D.rows() == C.rows() && D.cols() == B.cols(),
          "StateSpace.D: must be outputs x inputs");
  require_finite(A, "StateSpace.A");
  require_finite(B, "StateSpace.B");
  require_finite(C, "StateSpace.C");
  require_finite(D, "StateSpace.D");
}

ComplexMatrix StateSpace::transfer(double omega) const {
  ComplexMatrix M = Complex(0.0, omega) * ComplexMatrix::Identity(states(), states());
  M -= A.cast<Complex>();
  Eigen::PartialPivLU<ComplexMatrix> lu(M);
  ComplexMatrix X = lu.solve(B.cast<Complex>());
  return C.cast<Complex>() * X + D.cast<Complex>();
}

ProjectionJ::ProjectionJ(Index n_, Index order_) : n(n_), order(order_) {
  require(n >= 1, "ProjectionJ: plant state count must be positive");
  require(order >= 0, "ProjectionJ: controller order must be nonnegative");
}

RealMatrix ProjectionJ::matrix() const {
  RealMatrix J = RealMatrix::Zero(total(), n);
  J.topRows(n).setIdentity();
  return J;
}

Controller Controller::make_static(RealMatrix K) {
  require_finite(K, "Controller.K");
  Controller c;
  c.kind = Kind::static_gain;
  c.order = 0;
  c.D_K = std::move(K);
  c.A_K = RealMatrix::Zero(0, 0);
  c.B_K = RealMatrix::Zero(0, c.D_K.cols());
  c.C_K = RealMatrix::Zero(c.D_K.rows(), 0);
  return c;
}

Controller Controller::make_dynamic(RealMatrix A_K, RealMatrix B_K,
                                    RealMatrix C_K, RealMatrix D_K) {
  require_square(A_K, "Controller.A_K");
  require(B_K.rows() == A_K.rows(), "Controller.B_K: rows must match order");
  require(C_K.cols() == A_K.cols(), "Controller.C_K: cols must match order");
  require(D_K.rows() == C_K.rows() && D_K.cols() == B_K.cols(),
          "Controller.D_K: must be m x p");
  require_finite(A_K, "Controller.A_K");
  require_finite(B_K, "Controller.B_K");
  require_finite(C_K, "Controller.C_K");
  require_finite(D_K, "Controller.D_K");
  Controller c;
  c.kind = A_K.rows() == 0 ? Kind::static_gain : Kind::dynamic;
  c.order = A_K.rows();
  c.A_K = std::move(A_K);
  c.B_K = std::move(B_K);
  c.C_K = std::move(C_K);
  c.D_K = std::move(D_K);
  return c;
}

Controller Controller::from_packed(const RealMatrix& K_a, Index order) {
  require(order >= 0 && K_a.rows() >= order && K_a.cols() >= order,
          "Controller::from_packed: order exceeds packed dimensions");
  Index m = K_a.rows() - order;
  Index p = K_a.cols() - order;
  if (order == 0) return make_static(K_a);
  return make_dynamic(K_a.topLeftCorner(order, order),
                      K_a.topRightCorner(order, p),
                      K_a.bottomLeftCorner(m, order),
                      K_a.bottomRightCorner(m, p));
}

RealMatrix Controller::packed() const {
  if (order == 0) return D_K;
  RealMatrix K(order + D_K.rows(), order + D_K.cols());
  K.topLeftCorner(order, order) = A_K;
  K.topRightCorner(order, D_K.cols()) = B_K;
  K.bottomLeftCorner(D_K.rows(), order) = C_K;
  K.bottomRightCorner(D_K.rows(), D_K.cols()) = D_K;
  return K;
}

Index Controller::measurement_inputs() const { return D_K.cols(); }
Index Controller::control_outputs() const { return D_K.rows(); }

void TwoPortPlant::validate() const {
  require(n_delta >= 0 && n_w >= 0 && n_z >= 0 && m >= 0 && p >= 0,
          "TwoPortPlant: negative channel dimension");
  require(inner.inputs() == n_delta + n_w + m,
          "TwoPortPlant: input channels do not partition the inner inputs");
  require(inner.outputs() == n_delta + n_z + p,
          "TwoPortPlant: output channels do not partition the inner outputs");
}

PartitionedMatrix PartitionedMatrix::source(ComplexMatrix m) {
  return PartitionedMatrix{std::move(m), 0, 0};
}

PartitionedMatrix PartitionedMatrix::load(ComplexMatrix m) {
  PartitionedMatrix p;
  p.out1 = m.rows();
  p.in1 = m.cols();
  p.value = std::move(m);
  return p;
}

PartitionedMatrix star(const PartitionedMatrix& M, const PartitionedMatrix& N) {
  require(M.out2() == N.in1,
          "star: M's second output port does not match N's first input port");
  require(N.out1 == M.in2(),
          "star: N's first output port does not match M's second input port");

  const Index k = N.out1;  // interconnection size (w signal)
  ComplexMatrix M11 = M.block11(), M12 = M.block12(), M21 = M.block21(),
                M22 = M.block22();
  ComplexMatrix N11 = N.block11(), N12 = N.block12(), N21 = N.block21(),
                N22 = N.block22();

  PartitionedMatrix R;
  R.out1 = M.out1;
  R.in1 = M.in1;
  R.value.resize(M.out1 + N.out2(), M.in1 + N.in2());

  if (k == 0) {
    // No interconnection signal: the star product decouples.
    R.value.topLeftCorner(M.out1, M.in1) = M11;
    R.value.topRightCorner(M.out1, N.in2()).setZero();
    R.value.bottomLeftCorner(N.out2(), M.in1).setZero();
    R.value.bottomRightCorner(N.out2(), N.in2()) = N22;
    return R;
  }

  ComplexMatrix I_k = ComplexMatrix::Identity(k, k);
  Eigen::PartialPivLU<ComplexMatrix> lu(I_k - N11 * M22);
  if (!(lu.rcond() > kRcondFloor))
    throw wellposedness_error(
        "star: interconnection is ill-posed (I - N11 M22 numerically singular)");

  // w = W2 (N11 M21 u1 + N12 u2), with W2 = (I - N11 M22)^{-1}.
  ComplexMatrix W2N11M21 = lu.solve(ComplexMatrix(N11 * M21));
  ComplexMatrix W2N12 = lu.solve(N12);

  R.value.topLeftCorner(M.out1, M.in1) = M11 + M12 * W2N11M21;
  R.value.topRightCorner(M.out1, N.in2()) = M12 * W2N12;
  R.value.bottomLeftCorner(N.out2(), M.in1) =
      N21 * (M21 + M22 * W2N11M21);
  R.value.bottomRightCorner(N.out2(), N.in2()) = N22 + N21 * (M22 * W2N12);
  return R;
}

ComplexMatrix lower_lft(const PartitionedMatrix& M, const ComplexMatrix& N) {
  return star(M, PartitionedMatrix::load(N)).value;
}

ComplexMatrix upper_lft(const PartitionedMatrix& N, const ComplexMatrix& Delta) {
  return star(PartitionedMatrix::source(Delta), N).value;
}

TwoPortPlant build_kreiss_plant(const RealMatrix& A, const ProjectionJ& J) {
  require_square(A, "build_kreiss_plant.A");
  require_finite(A, "build_kreiss_plant.A");
  require(A.rows() == J.total(),
          "build_kreiss_plant: A dimension must equal n + n_K of J");
  const Index N = J.total();
  const Index n = J.n;
  RealMatrix Jm = J.matrix();

  RealMatrix Ap = A - RealMatrix::Identity(N, N);
  RealMatrix B(N, N + n);
  B << kSqrt2 * RealMatrix::Identity(N, N), Jm;
  RealMatrix C(N + n, N);
  C << -kSqrt2 * A, Jm.transpose();
  RealMatrix D = RealMatrix::Zero(N + n, N + n);
  D.topLeftCorner(N, N) = -RealMatrix::Identity(N, N);

  TwoPortPlant P;
  P.inner = StateSpace(Ap, B, C, D);
  P.n_delta = N;
  P.n_w = n;
  P.n_z = n;
  P.m = 0;
  P.p = 0;
  P.validate();
  return P;
}

ComplexMatrix kreiss_channel(const TwoPortPlant& P, double delta, double omega,
                             const RealMatrix* K_packed) {
  P.validate();
  if (delta <= -1.0) return ComplexMatrix::Zero(P.n_z, P.n_w);

  ComplexMatrix G = P.transfer(omega);
  PartitionedMatrix full;

  if (P.m > 0 || P.p > 0) {
    require(K_packed != nullptr,
            "kreiss_channel: plant has a control channel but no controller given");
    require(K_packed->rows() == P.m && K_packed->cols() == P.p,
            "kreiss_channel: packed controller must be m x p");
    // Close the trailing (u, y) port first.
    PartitionedMatrix with_u{G, P.n_delta + P.n_z, P.n_delta + P.n_w};
    PartitionedMatrix closed = star(with_u, PartitionedMatrix::load(
                                                K_packed->cast<Complex>()));
    full = PartitionedMatrix{closed.value, P.n_delta, P.n_delta};
  } else {
    full = PartitionedMatrix{G, P.n_delta, P.n_delta};
  }

  ComplexMatrix DeltaI =
      Complex(delta, 0.0) * ComplexMatrix::Identity(P.n_delta, P.n_delta);
  return upper_lft(full, DeltaI);
}

StateSpace close_loop(const StateSpace& plant, const Controller& K) {
  require(plant.strictly_proper(),
          "close_loop: plant must be strictly proper (D = 0)");
  const Index n = plant.states();
  require(K.control_outputs() == plant.inputs(),
          "close_loop: controller output count must match plant inputs");
  require(K.measurement_inputs() == plant.outputs(),
          "close_loop: controller input count must match plant outputs");

  RealMatrix A_cl;
  if (K.order == 0) {
    A_cl = plant.A + plant.B * K.D_K * plant.C;
  } else {
    const Index nk = K.order;
    A_cl.resize(n + nk, n + nk);
    A_cl.topLeftCorner(n, n) = plant.A + plant.B * K.D_K * plant.C;
    A_cl.topRightCorner(n, nk) = plant.B * K.C_K;
    A_cl.bottomLeftCorner(nk, n) = K.B_K * plant.C;
    A_cl.bottomRightCorner(nk, nk) = K.A_K;
  }
  const Index N = A_cl.rows();
  return StateSpace(A_cl, RealMatrix::Zero(N, 0), RealMatrix::Zero(0, N));
}

AugmentedBlocks augmented_blocks(const StateSpace& plant, Index n_K) {
  require(plant.strictly_proper(), "augment: plant must be strictly proper");
  require(n_K >= 0, "augment: controller order must be nonnegative");
  const Index n = plant.states();
  const Index m = plant.inputs();
  const Index p = plant.outputs();
  const Index N = n + n_K;

  AugmentedBlocks blk;
  blk.A_a = RealMatrix::Zero(N, N);
  blk.A_a.topLeftCorner(n, n) = plant.A;

  // Control inputs ordered [controller-state inputs; physical inputs].
  blk.B_a = RealMatrix::Zero(N, n_K + m);
  blk.B_a.topRightCorner(n, m) = plant.B;
  blk.B_a.bottomLeftCorner(n_K, n_K).setIdentity();

  // Measurements ordered [controller states; physical outputs].
  blk.C_a = RealMatrix::Zero(n_K + p, N);
  blk.C_a.topRightCorner(n_K, n_K).setIdentity();
  blk.C_a.bottomLeftCorner(p, n) = plant.C;

  blk.J = ProjectionJ(n, n_K);
  return blk;
}

TwoPortPlant augment(const StateSpace& plant, Index n_K) {
  AugmentedBlocks blk = augmented_blocks(plant, n_K);
  const Index n = plant.states();
  const Index N = n + n_K;
  const Index mu = blk.B_a.cols();
  const Index py = blk.C_a.rows();
  RealMatrix Jm = blk.J.matrix();

  RealMatrix Ap = blk.A_a - RealMatrix::Identity(N, N);
  RealMatrix B(N, N + n + mu);
  B << kSqrt2 * RealMatrix::Identity(N, N), Jm, blk.B_a;
  RealMatrix C(N + n + py, N);
  C << -kSqrt2 * blk.A_a, Jm.transpose(), blk.C_a;
  RealMatrix D = RealMatrix::Zero(N + n + py, N + n + mu);
  D.topLeftCorner(N, N) = -RealMatrix::Identity(N, N);
  D.block(0, N + n, N, mu) = -kSqrt2 * blk.B_a;

  TwoPortPlant P;
  P.inner = StateSpace(Ap, B, C, D);
  P.n_delta = N;
  P.n_w = n;
  P.n_z = n;
  P.m = mu;
  P.p = py;
  P.validate();
  return P;
}

}  // namespace ktg
