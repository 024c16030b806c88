#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace ktg {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

// Raised for malformed inputs: dimension mismatches, non-finite entries,
// unparsable files.  The CLI maps this class to exit code 1.
struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when the mathematics refuses: unstable matrices where stability is
// required, non-convergent iterations, infeasible synthesis.  Exit code 2.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Loop interconnection is singular (beyond conditioning threshold).  Kept
// distinct from invalid_input so callers can tell ill-posedness from a
// plain shape error.
struct wellposedness_error : numerical_error {
  using numerical_error::numerical_error;
};

// Eigenvalues of a square matrix; closed under conjugation for real sources.
struct Spectrum {
  ComplexVector eigenvalues;
  Index source_dimension = 0;
};

inline bool all_finite(const RealMatrix& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw invalid_input(what);
}

inline void require_finite(const RealMatrix& m, const std::string& name) {
  if (!m.allFinite()) throw invalid_input(name + ": non-finite entries");
}

inline void require_square(const RealMatrix& m, const std::string& name) {
  if (m.rows() != m.cols())
    throw invalid_input(name + ": expected a square matrix, got " +
                        std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()));
}

}  // namespace ktg
