#pragma once

#include "ktg/matrix.hpp"

namespace ktg {

// Real LTI system  xdot = Ax + Bu,  y = Cx + Du.  The universal carrier for
// plants, controllers, and closed loops.
struct StateSpace {
  RealMatrix A, B, C, D;

  StateSpace() = default;
  // D defaults to the zero matrix of matching size.
  StateSpace(RealMatrix A, RealMatrix B, RealMatrix C);
  StateSpace(RealMatrix A, RealMatrix B, RealMatrix C, RealMatrix D);

  Index states() const { return A.rows(); }
  Index inputs() const { return B.cols(); }
  Index outputs() const { return C.rows(); }

  bool strictly_proper() const { return D.isZero(0.0); }

  // C (jw I - A)^{-1} B + D
  ComplexMatrix transfer(double omega) const;
};

// Projection onto the plant states of an augmented closed loop:
// J = I_n when n_K = 0 and J = [I_n; 0] otherwise.  ||J|| = 1 always.
struct ProjectionJ {
  Index n = 0;         // plant states
  Index order = 0;     // appended controller states n_K

  ProjectionJ() = default;
  ProjectionJ(Index n_, Index order_);

  Index total() const { return n + order; }
  RealMatrix matrix() const;  // (n + n_K) x n
};

// Static gain or order-n_K dynamic output feedback.  The packed form
// K_a = [A_K B_K; C_K D_K] is the decision variable of every synthesis
// program; blocks and packed form round-trip exactly.
struct Controller {
  enum class Kind { static_gain, dynamic };

  Kind kind = Kind::static_gain;
  Index order = 0;            // n_K (0 for static)
  RealMatrix A_K, B_K, C_K;   // empty for static controllers
  RealMatrix D_K;             // the gain itself when static

  static Controller make_static(RealMatrix K);
  static Controller make_dynamic(RealMatrix A_K, RealMatrix B_K,
                                 RealMatrix C_K, RealMatrix D_K);
  // Unpack K_a = [A_K B_K; C_K D_K] with the given order.
  static Controller from_packed(const RealMatrix& K_a, Index order);

  RealMatrix packed() const;  // (n_K + m) x (n_K + p)
  Index measurement_inputs() const;  // p
  Index control_outputs() const;     // m
};

// Partitioned system with an uncertainty channel (w_delta, z_delta), a
// performance channel (w, z), and an optional control/measurement channel
// (u, y).  Inner inputs are ordered [w_delta; w; u] and outputs
// [z_delta; z; y].
struct TwoPortPlant {
  StateSpace inner;
  Index n_delta = 0;  // size of the square uncertainty channel
  Index n_w = 0, n_z = 0;
  Index m = 0, p = 0;  // control channel, possibly zero

  void validate() const;
  // Frequency response of the inner system, kept with channel dims so star
  // products can consume it.
  ComplexMatrix transfer(double omega) const { return inner.transfer(omega); }
};

// Complex matrix with a 2x2 output/input partition for Redheffer algebra.
// out1/in1 give the sizes of the first (upper) port; the second port takes
// the remainder.
struct PartitionedMatrix {
  ComplexMatrix value;
  Index out1 = 0, in1 = 0;

  Index out2() const { return value.rows() - out1; }
  Index in2() const { return value.cols() - in1; }

  // A block used as the closing element of an upper LFT (pure second port);
  // this is how a scalar uncertainty delta*I enters delta ⋆ P.
  static PartitionedMatrix source(ComplexMatrix m);
  // A block used as the closing element of a lower LFT (pure first port).
  static PartitionedMatrix load(ComplexMatrix m);

  ComplexMatrix block11() const { return value.topLeftCorner(out1, in1); }
  ComplexMatrix block12() const { return value.topRightCorner(out1, in2()); }
  ComplexMatrix block21() const { return value.bottomLeftCorner(out2(), in1); }
  ComplexMatrix block22() const { return value.bottomRightCorner(out2(), in2()); }
};

// Redheffer star product M ⋆ N: M's second port is closed against N's first
// port.  Reduces to the lower LFT when N is a pure load and to the upper LFT
// when M is a pure source.  Throws wellposedness_error when the
// interconnection inverse is singular beyond conditioning threshold 1e12.
PartitionedMatrix star(const PartitionedMatrix& M, const PartitionedMatrix& N);

// Convenience wrappers for the common closures.
ComplexMatrix lower_lft(const PartitionedMatrix& M, const ComplexMatrix& N);
ComplexMatrix upper_lft(const PartitionedMatrix& N, const ComplexMatrix& Delta);

// Two-port plant P with  xdot = (A - I)x + sqrt(2) w_delta + J w,
// z_delta = -sqrt(2) A x - w_delta,  z = J^T x,  such that closing the
// uncertainty channel with delta*I yields the shifted resolvent
// J^T (sI - ((1-delta)/(1+delta) A - I))^{-1} J for every delta in (-1, 1];
// at delta = -1 the interconnection denotes the zero matrix.
TwoPortPlant build_kreiss_plant(const RealMatrix& A, const ProjectionJ& J);

// Evaluates the delta-closed Kreiss channel of a two-port plant at jw via
// the star product (uncertainty channel closed with delta*I, control channel
// closed with K_packed when present).
ComplexMatrix kreiss_channel(const TwoPortPlant& P, double delta, double omega,
                             const RealMatrix* K_packed = nullptr);

// Autonomous closed loop A_cl: A + B K C for a static gain, and the 2x2
// block matrix [A + B D_K C, B C_K; B_K C, A_K] for a dynamic controller.
// The plant must be strictly proper.
StateSpace close_loop(const StateSpace& plant, const Controller& K);

// State augmentation: A_a = diag(A, 0), B_a = [0 B; I 0], C_a = [0 I; C 0],
// turning a fixed-order design into a static one in K_a.  The returned
// plant P_a satisfies  delta*I ⋆ P_a ⋆ K_a = J^T (sI - (c A_cl - I))^{-1} J
// with c = (1-delta)/(1+delta) and A_cl = A_a + B_a K_a C_a.
TwoPortPlant augment(const StateSpace& plant, Index n_K);

// The augmentation blocks themselves, exposed for synthesis gradients.
struct AugmentedBlocks {
  RealMatrix A_a, B_a, C_a;
  ProjectionJ J;
};
AugmentedBlocks augmented_blocks(const StateSpace& plant, Index n_K);

}  // namespace ktg
