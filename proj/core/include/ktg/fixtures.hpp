#pragma once

#include "ktg/nonlinear.hpp"
#include "ktg/system_io.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ktg {

// Band Toeplitz test matrix: -1 on the subdiagonal and diagonal, +1 on the
// first three superdiagonals. Canonical non-normal benchmark.
RealMatrix grcar(Index n);

// The 7-state benchmark plant (4 actuators, 1 sensor) used by the synthesis
// examples.
RealMatrix example_7x7_A();
RealMatrix example_7x7_B();
RealMatrix example_7x7_C();

// Catalog access. Names:
//   grcar-<n>             Grcar plant of size n >= 2 (A only, as closed-loop kind)
//   example-7x7           the 7-state synthesis plant
//   controller-kreiss     printed controller minimizing the Kreiss constant
//   controller-numabs       "       "      minimizing the numerical abscissa
//   controller-h2match      "       "      for H2 model matching
//   controller-wcenergy     "       "      minimizing worst-case energy
//   nl-A                  linear part of the nonlinear benchmark (R = 25)
//   nl-controller         printed 2nd-order controller for it
//   nl-closed-loop        its printed 4x4 closed-loop matrix
std::vector<std::string> fixture_names();
SystemFile make_fixture(const std::string& name);

// FNV-1a 64-bit hash of the serialized fixture; integrity anchor for the
// embedded constants.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fixture_checksum(const std::string& name);

}  // namespace ktg
