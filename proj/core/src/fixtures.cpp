#include "ktg/fixtures.hpp"

#include <cstdlib>

namespace ktg {

RealMatrix grcar(Index n) {
  require(n >= 2, "grcar: size must be at least 2");
  RealMatrix A = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (i > 0) A(i, i - 1) = -1.0;
    A(i, i) = -1.0;
    for (Index k = 1; k <= 3; ++k)
      if (i + k < n) A(i, i + k) = 1.0;
  }
  return A;
}

RealMatrix example_7x7_A() {
  return RealMatrix{{-1, 0, 0, 0, 0, 0, -625},
                    {0, -1, -30, 400, 0, 0, 250},
                    {-2, 0, -1, 0, 0, 0, 30},
                    {5, -1, 5, -1, 0, 0, 200},
                    {11, 1, 25, -10, -1, 1, -200},
                    {200, 0, 0, -150, -100, -1, -1000},
                    {1, 0, 0, 0, 0, 0, -1}};
}

RealMatrix example_7x7_B() {
  RealMatrix B = RealMatrix::Zero(7, 4);
  B.topLeftCorner(4, 4) = RealMatrix::Identity(4, 4);
  return B;
}

RealMatrix example_7x7_C() {
  RealMatrix C = RealMatrix::Zero(1, 7);
  C(0, 5) = 1.0;
  return C;
}

namespace {

// Printed 3rd-order controllers for the 7-state plant, packed as
// [A_K B_K; C_K D_K] (7 x 4 each), one per synthesis objective.
RealMatrix packed_controller_kreiss() {
  return RealMatrix{{-42.9038, 11.5813, 0.0000, 0.0128},
                    {-164.9255, 70.3235, 152.7735, -13.6539},
                    {0.0000, -25.9407, -149.4428, 11.8197},
                    {-167.0674, 318.3261, 809.8411, -66.1531},
                    {200.4722, 413.5407, -666.0200, 72.5131},
                    {-66.2768, 27.6020, 76.9643, -2.4021},
                    {385.9815, -189.8190, -229.6792, 22.6246}};
}

RealMatrix packed_controller_numabs() {
  return RealMatrix{{59.9714, 140.8838, 0.0000, 125.1870},
                    {100.3809, 151.4666, -0.9285, 152.6506},
                    {0.0000, -271.6638, -612.4505, 514.0162},
                    {-180.2674, 2.4115, 610.7701, -818.7354},
                    {-1.9939, 17.2208, 896.7905, 248.2384},
                    {134.2585, 322.4479, 198.7380, 27.7581},
                    {145.1514, 114.7305, -229.1801, 350.4296}};
}

RealMatrix packed_controller_h2match() {
  return RealMatrix{{-10.0166, 32.8652, 0.0000, 4.2887},
                    {-5.3332, -75.2766, 74.7646, 83.9716},
                    {0.0000, 246.4755, -258.5282, -246.5133},
                    {-205.9510, 236.5090, -123.3962, -152.2283},
                    {-1153.0456, -879.8479, -71.1224, 150.9151},
                    {-13.2672, -120.1666, 21.8126, 115.6246},
                    {21.5530, 3.7044, 60.9500, 127.7649}};
}

RealMatrix packed_controller_wcenergy() {
  return RealMatrix{{-11.5489, 78.9907, 0.0000, 53.2452},
                    {199.9054, -357.8574, 329.8169, -206.2099},
                    {0.0000, -60.0656, -22.2754, -40.3642},
                    {-136.5439, -7.6336, 193.7006, 30.1711},
                    {-1434.8960, 269.1622, -473.4523, 27.1643},
                    {-482.9145, 868.9921, -824.9746, 499.5364},
                    {-39.9217, 559.8141, -80.1572, 351.7574}};
}

// Printed 2nd-order controller for the nonlinear benchmark, packed 3 x 3.
RealMatrix packed_controller_nl() {
  return RealMatrix{{-3.4146, -0.1902, -1.7997},
                    {-0.2856, -2.6781, -0.1119},
                    {-1.8068, -0.1095, -1.3710}};
}

// Its printed 4 x 4 closed-loop matrix (plant states first).
RealMatrix nl_closed_loop_A() {
  return RealMatrix{{-1.4110, 1.0000, -1.8068, -0.1095},
                    {-1.3710, -0.0800, -1.8068, -0.1095},
                    {-1.7997, 0.0000, -3.4146, -0.1902},
                    {-0.1119, 0.0000, -0.2856, -2.6781}};
}

SystemFile controller_fixture(const RealMatrix& packed, Index order) {
  return SystemFile::from_controller(Controller::from_packed(packed, order));
}

}  // namespace

std::vector<std::string> fixture_names() {
  return {"grcar-10",        "grcar-20",          "grcar-30",
          "grcar-50",        "grcar-100",         "example-7x7",
          "controller-kreiss", "controller-numabs", "controller-h2match",
          "controller-wcenergy", "nl-A",           "nl-controller",
          "nl-closed-loop"};
}

SystemFile make_fixture(const std::string& name) {
  if (name.rfind("grcar-", 0) == 0) {
    const std::string tail = name.substr(6);
    char* end = nullptr;
    long n = std::strtol(tail.c_str(), &end, 10);
    if (end == tail.c_str() || *end != '\0' || n < 2)
      throw invalid_input("fixture: bad grcar size in '" + name + "'");
    SystemFile f;
    f.kind = SystemFile::Kind::closed_loop;  // bare stable matrix, J = I
    f.order = 0;
    f.blocks.emplace_back("A", grcar(static_cast<Index>(n)));
    return f;
  }
  if (name == "example-7x7") {
    SystemFile f;
    f.kind = SystemFile::Kind::plant;
    f.blocks.emplace_back("A", example_7x7_A());
    f.blocks.emplace_back("B", example_7x7_B());
    f.blocks.emplace_back("C", example_7x7_C());
    return f;
  }
  if (name == "controller-kreiss") return controller_fixture(packed_controller_kreiss(), 3);
  if (name == "controller-numabs") return controller_fixture(packed_controller_numabs(), 3);
  if (name == "controller-h2match") return controller_fixture(packed_controller_h2match(), 3);
  if (name == "controller-wcenergy") return controller_fixture(packed_controller_wcenergy(), 3);
  if (name == "nl-A") {
    NonlinearSystem sys = NonlinearSystem::example();
    SystemFile f;
    f.kind = SystemFile::Kind::plant;
    f.blocks.emplace_back("A", sys.A);
    f.blocks.emplace_back("B", sys.B);
    f.blocks.emplace_back("C", sys.C);
    return f;
  }
  if (name == "nl-controller") return controller_fixture(packed_controller_nl(), 2);
  if (name == "nl-closed-loop") {
    SystemFile f;
    f.kind = SystemFile::Kind::closed_loop;
    f.order = 2;
    f.blocks.emplace_back("A", nl_closed_loop_A());
    return f;
  }
  throw invalid_input("unknown fixture: " + name);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fixture_checksum(const std::string& name) {
  return fnv1a64(to_text(make_fixture(name)));
}

}  // namespace ktg
