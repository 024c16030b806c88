// ktg — transient-growth analysis and Kreiss-constant controller synthesis.
//
// Verbs:
//   analyze      non-normality quantities of a plant or closed loop
//   bench-grcar  Kreiss constants of the Grcar family, with timings
//   synthesize   structured output-feedback design by scenario optimization
//   table2       closed-loop summary of the four catalog controllers
//   simulate     nonlinear benchmark trajectories and threshold search
//   fixtures     list or dump the embedded example systems

#include "ktg/analysis.hpp"
#include "ktg/fixtures.hpp"
#include "ktg/nonlinear.hpp"
#include "ktg/parallel.hpp"
#include "ktg/synthesis.hpp"
#include "ktg/system_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace ktg;

std::string strf(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buffer[512];
  std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  return buffer;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_ = Clock::now();
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open output file '" + path + "'");
  return out;
}

// An input names either a file on disk or a catalog fixture.
SystemFile load_input(const std::string& spec) {
  if (std::filesystem::exists(spec)) return load_system_file(spec);
  try {
    return make_fixture(spec);
  } catch (const invalid_input&) {
    throw invalid_input("input '" + spec +
                        "' is neither a readable file nor a fixture name "
                        "(see `ktg fixtures`)");
  }
}

// One analysis result: quantity name, value, data locating the maximizer,
// the tolerance it was computed to, and wall time.
struct Record {
  std::string quantity;
  double value = 0.0;
  std::string maximizer;
  double tolerance = 0.0;
  double seconds = 0.0;
};

void print_records(const std::vector<Record>& records) {
  std::printf("%-10s %-18s %-34s %-10s %s\n", "quantity", "value", "maximizer",
              "tol", "seconds");
  for (const auto& r : records) {
    std::printf("%-10s %-18.10g %-34s %-10.3g %.2f\n", r.quantity.c_str(),
                r.value, r.maximizer.empty() ? "-" : r.maximizer.c_str(),
                r.tolerance, r.seconds);
  }
}

void write_records(const std::vector<Record>& records, std::ostream& out) {
  for (const auto& r : records) {
    out << strf("quantity=%s value=%.12g maximizer=\"%s\" tolerance=%.6g "
                "seconds=%.3f\n",
                r.quantity.c_str(), r.value, r.maximizer.c_str(), r.tolerance,
                r.seconds);
  }
}

std::string describe_eig(const RealMatrix& A) {
  Eigen::EigenSolver<RealMatrix> eig(A);
  Index best = 0;
  for (Index i = 1; i < A.rows(); ++i)
    if (eig.eigenvalues()(i).real() > eig.eigenvalues()(best).real()) best = i;
  const auto l = eig.eigenvalues()(best);
  return strf("lambda=%.6g%+.6gi", l.real(), l.imag());
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string input;
  std::vector<std::string> quantities;
  double tol = 1e-4;
  bool full = false;
  int workers = 0;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& args) {
  if (args.workers > 0) set_default_workers(args.workers);
  SystemFile file = load_input(args.input);
  if (file.kind == SystemFile::Kind::controller)
    throw invalid_input(
        "analyze expects a plant or closed-loop input; '" + args.input +
        "' is a controller (close it with a plant first, or see `ktg table2`)");

  const StateSpace sys = file.to_state_space();
  const RealMatrix& A = sys.A;
  Index order = file.kind == SystemFile::Kind::closed_loop ? file.order : 0;
  if (args.full) order = 0;
  const ProjectionJ J(A.rows() - order, order);
  const RealMatrix Jm = J.matrix();
  const RealMatrix A_block = Jm.transpose() * A * Jm;

  std::vector<std::string> quantities = args.quantities;
  if (quantities.empty()) quantities = {"K", "M0", "omega", "alpha"};

  std::printf("input: %s  (%s, %td states", args.input.c_str(),
              to_string(file.kind).c_str(), static_cast<std::ptrdiff_t>(A.rows()));
  if (order > 0)
    std::printf(", %td of them controller states; restricted quantities",
                static_cast<std::ptrdiff_t>(order));
  std::printf(")\n\n");

  std::vector<Record> records;
  for (const auto& q : quantities) {
    Stopwatch watch;
    Record r;
    r.quantity = q;
    if (q == "K") {
      KreissReport report = kreiss_constant(A, J, args.tol);
      r.value = report.value;
      r.maximizer = strf("delta*=%.6g omega*=%.6g", report.delta_star,
                         report.omega_star);
      r.tolerance = report.tolerance;
    } else if (q == "M0") {
      TransientProfile profile = transient_growth(A, J, args.tol);
      r.value = profile.peak;
      r.maximizer = strf("t*=%.6g", profile.peak_time);
      r.tolerance = args.tol;
    } else if (q == "omega") {
      r.value = numerical_abscissa(A_block);
    } else if (q == "alpha") {
      r.value = spectral_abscissa(A);
      r.maximizer = describe_eig(A);
    } else if (q == "h2") {
      if (file.kind != SystemFile::Kind::plant)
        throw invalid_input("quantity h2 needs a plant input with B and C");
      r.value = h2_norm(sys);
    } else if (q == "wc-energy") {
      WorstCaseEnergy wc = worst_case_energy(A, J);
      r.value = wc.value;
      std::string vertex;
      for (Index i = 0; i < wc.vertex.size(); ++i)
        vertex += wc.vertex(i) > 0 ? '+' : '-';
      r.maximizer = "vertex=" + vertex;
    } else {
      throw invalid_input("unknown quantity '" + q +
                          "' (choose from K, M0, omega, alpha, h2, wc-energy)");
    }
    r.seconds = watch.seconds();
    records.push_back(std::move(r));
  }

  print_records(records);
  if (!args.out.empty()) {
    auto out = open_output(args.out);
    write_records(records, out);
  }
  return 0;
}

// ------------------------------------------------------------ bench-grcar

struct BenchArgs {
  std::vector<int> sizes = {10, 20, 30, 50};
  double tol = 1e-3;
  int workers = 0;
  std::string out;
};

int cmd_bench_grcar(const BenchArgs& args) {
  if (args.workers > 0) set_default_workers(args.workers);
  for (int n : args.sizes)
    require(n >= 2, "bench-grcar: sizes must be at least 2");

  std::printf("%-6s %-16s %s\n", "n", "K", "seconds");
  std::string csv = "n,estimate,seconds\n";
  for (int n : args.sizes) {
    Stopwatch watch;
    KreissReport report = kreiss_constant(grcar(n), args.tol);
    double secs = watch.seconds();
    std::printf("%-6d %-16.6g %.2f\n", n, report.value, secs);
    std::fflush(stdout);
    csv += strf("%d,%.12g,%.3f\n", n, report.value, secs);
  }
  if (!args.out.empty()) open_output(args.out) << csv;
  return 0;
}

// ------------------------------------------------------------- synthesize

struct SynthArgs {
  std::string input;
  std::string method = "kreiss";
  int order = 0;
  int restarts = 10;
  std::uint64_t seed = 1;
  double decay = 0.001;
  double radius = 100.0;
  double scenario_tol = 0.01;
  int workers = 0;
  std::string out;
};

int cmd_synthesize(const SynthArgs& args) {
  SystemFile file = load_input(args.input);
  if (file.kind != SystemFile::Kind::plant)
    throw invalid_input("synthesize expects a plant input");

  SynthesisProblem problem;
  problem.plant = file.to_state_space();
  problem.controller_order = args.order;
  problem.objective = objective_from_string(args.method);
  problem.region.min_decay = args.decay;
  problem.region.radius = args.radius;
  problem.restarts = args.restarts;
  problem.scenario_tol = args.scenario_tol;
  problem.seed = args.seed;
  problem.workers = args.workers;
  problem.validate();

  Stopwatch watch;
  SynthesisResult result = scenario_loop(problem);
  const double synth_seconds = watch.seconds();

  std::printf("restart values (certified %s):\n", args.method.c_str());
  for (std::size_t r = 0; r < result.restart_values.size(); ++r)
    std::printf("  restart %-3zu %.6g%s\n", r, result.restart_values[r],
                static_cast<int>(r) == result.winner_restart ? "  <- winner"
                                                             : "");
  std::printf("\nscenario rounds (winner restart):\n");
  std::printf("  %-6s %-14s %-12s %-14s %s\n", "round", "h*", "delta*",
              "alpha*", "h(delta*)");
  const auto& history = result.history.history;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& rec = history[i];
    std::printf("  %-6zu %-14.6g %-12.6g %-14.6g %.6g\n", i + 1, rec.h_star,
                rec.delta_star, rec.alpha_star, rec.h_degrade);
  }
  std::printf("\ncertified %s value: %.10g  (%d scenarios, %.1f s)\n",
              args.method.c_str(), result.certified_value,
              static_cast<int>(result.history.scenarios.size()),
              synth_seconds);

  // Closed-loop summary: transient peak, Kreiss certificate, numerical
  // abscissa of the plant block, and the synthesis wall time.
  const StateSpace loop = close_loop(problem.plant, result.controller);
  const ProjectionJ J(problem.plant.states(), args.order);
  const RealMatrix Jm = J.matrix();
  TransientProfile m0 = transient_growth(loop.A, J, 1e-3);
  KreissReport kreiss = kreiss_constant(loop.A, J, 1e-3);
  double omega = numerical_abscissa(Jm.transpose() * loop.A * Jm);
  std::printf("\nclosed loop: M0=%.6g (t*=%.4g)  K=%.6g  omega=%.6g  "
              "alpha=%.6g\n",
              m0.peak, m0.peak_time, kreiss.value, omega,
              spectral_abscissa(loop.A));

  if (!args.out.empty()) {
    save_system_file(SystemFile::from_controller(result.controller), args.out);
    std::printf("controller written to %s\n", args.out.c_str());
  } else {
    std::printf("\n%s", to_text(SystemFile::from_controller(result.controller))
                            .c_str());
  }
  return 0;
}

// ----------------------------------------------------------------- table2

struct Table2Args {
  double tol = 1e-3;
  int workers = 0;
  std::string out;
};

int cmd_table2(const Table2Args& args) {
  if (args.workers > 0) set_default_workers(args.workers);
  const StateSpace plant = make_fixture("example-7x7").to_state_space();
  const std::vector<std::string> methods = {"kreiss", "numabs", "h2match",
                                            "wcenergy"};

  std::printf("%-10s %-14s %-14s %-14s %s\n", "method", "M0", "K", "omega",
              "seconds");
  std::string csv = "method,M0,K,omega,seconds\n";
  for (const auto& method : methods) {
    Stopwatch watch;
    Controller K = make_fixture("controller-" + method).to_controller();
    const StateSpace loop = close_loop(plant, K);
    const ProjectionJ J(plant.states(), K.order);
    const RealMatrix Jm = J.matrix();
    TransientProfile m0 = transient_growth(loop.A, J, args.tol);
    KreissReport kreiss = kreiss_constant(loop.A, J, args.tol);
    double omega = numerical_abscissa(Jm.transpose() * loop.A * Jm);
    double secs = watch.seconds();
    std::printf("%-10s %-14.6g %-14.6g %-14.6g %.2f\n", method.c_str(),
                m0.peak, kreiss.value, omega, secs);
    std::fflush(stdout);
    csv += strf("%s,%.12g,%.12g,%.12g,%.3f\n", method.c_str(), m0.peak,
                kreiss.value, omega, secs);
  }
  if (!args.out.empty()) open_output(args.out) << csv;
  return 0;
}

// --------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string mode = "open";
  std::vector<double> amplitudes;
  double horizon = 2000.0;
  double R = 25.0;
  bool find_threshold = false;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  const NonlinearSystem sys = NonlinearSystem::example(args.R);
  Controller controller;
  const Controller* K = nullptr;
  if (args.mode == "closed") {
    controller = make_fixture("nl-controller").to_controller();
    K = &controller;
  }

  std::vector<double> amplitudes = args.amplitudes;
  if (amplitudes.empty())
    amplitudes = {1e-7, 1e-6, 1e-5, 1e-4, 4e-4, 5e-4, 1e-3, 1e-2};

  std::printf("%-12s %-12s %-14s %s\n", "x2(0)", "terminal", "final |x|",
              "csv");
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    RealVector x0 = RealVector::Zero(2);
    x0(1) = amplitudes[i];
    Trajectory traj;
    try {
      traj = simulate(sys, K, x0, args.horizon);
    } catch (const numerical_error& err) {
      throw numerical_error(strf("integration failed for x2(0)=%g: %s",
                                 amplitudes[i], err.what()));
    }
    std::string path = "-";
    if (!args.out.empty()) {
      path = strf("%s-%s-%02zu.csv", args.out.c_str(), args.mode.c_str(), i);
      auto out = open_output(path);
      write_csv(traj, out);
    }
    std::printf("%-12g %-12s %-14.6g %s\n", amplitudes[i],
                to_string(traj.classification).c_str(), traj.norms.back(),
                path.c_str());
    std::fflush(stdout);
  }

  if (args.find_threshold) {
    double lo = *std::min_element(amplitudes.begin(), amplitudes.end());
    double hi = *std::max_element(amplitudes.begin(), amplitudes.end());
    require(lo > 0.0 && hi > lo,
            "simulate: threshold search needs two distinct positive "
            "amplitudes");
    RealVector direction = RealVector::Zero(2);
    direction(1) = 1.0;
    auto threshold =
        threshold_search(sys, K, direction, lo, hi, args.horizon);
    if (threshold)
      std::printf("\nthreshold amplitude: %.6g  (bracket [%g, %g])\n",
                  *threshold, lo, hi);
    else
      std::printf("\nno threshold in [%g, %g]: both ends classify alike\n",
                  lo, hi);
  }
  return 0;
}

// --------------------------------------------------------------- fixtures

struct FixturesArgs {
  std::string name;
  std::string out;
};

int cmd_fixtures(const FixturesArgs& args) {
  if (args.name.empty()) {
    std::printf("%-22s %-12s %-22s %s\n", "name", "kind", "blocks",
                "checksum");
    for (const auto& name : fixture_names()) {
      SystemFile file = make_fixture(name);
      std::string blocks;
      for (const auto& [label, matrix] : file.blocks) {
        if (!blocks.empty()) blocks += ' ';
        blocks += strf("%s[%tdx%td]", label.c_str(),
                       static_cast<std::ptrdiff_t>(matrix.rows()),
                       static_cast<std::ptrdiff_t>(matrix.cols()));
      }
      std::printf("%-22s %-12s %-22s %016llx\n", name.c_str(),
                  to_string(file.kind).c_str(), blocks.c_str(),
                  static_cast<unsigned long long>(fixture_checksum(name)));
    }
    return 0;
  }
  const std::string text = to_text(make_fixture(args.name));
  if (!args.out.empty())
    open_output(args.out) << text;
  else
    std::fputs(text.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transient growth, Kreiss constants, and controller synthesis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ktg 0.1.0");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand(
      "analyze", "non-normality quantities of a plant or closed loop");
  analyze->add_option("input", analyze_args.input,
                      "system file or fixture name")->required();
  analyze->add_option("-q,--quantity", analyze_args.quantities,
                      "K | M0 | omega | alpha | h2 | wc-energy "
                      "(default: K M0 omega alpha)");
  analyze->add_option("--tol", analyze_args.tol, "relative tolerance")
      ->check(CLI::PositiveNumber);
  analyze->add_flag("--full", analyze_args.full,
                    "ignore the controller partition (J = I)");
  analyze->add_option("--workers", analyze_args.workers, "worker threads");
  analyze->add_option("--out", analyze_args.out, "structured-text output");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand(
      "bench-grcar", "Kreiss constants of the Grcar family, with timings");
  bench->add_option("--sizes", bench_args.sizes, "matrix sizes (default 10 20 30 50)");
  bench->add_option("--tol", bench_args.tol, "relative tolerance")
      ->check(CLI::PositiveNumber);
  bench->add_option("--workers", bench_args.workers, "worker threads");
  bench->add_option("--out", bench_args.out, "CSV output path");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand(
      "synthesize", "scenario-based structured output-feedback design");
  synth->add_option("input", synth_args.input, "plant file or fixture name")
      ->required();
  synth->add_option("--method", synth_args.method,
                    "kreiss | numabs | h2match | wcenergy")
      ->check(CLI::IsMember({"kreiss", "numabs", "h2match", "wcenergy"}));
  synth->add_option("--order", synth_args.order, "controller order")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--restarts", synth_args.restarts, "restart count")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_args.seed, "restart seed base");
  synth->add_option("--decay", synth_args.decay,
                    "minimum closed-loop decay rate")
      ->check(CLI::PositiveNumber);
  synth->add_option("--radius", synth_args.radius,
                    "closed-loop eigenvalue radius")
      ->check(CLI::PositiveNumber);
  synth->add_option("--scenario-tol", synth_args.scenario_tol,
                    "scenario-loop stopping slack")
      ->check(CLI::PositiveNumber);
  synth->add_option("--workers", synth_args.workers, "worker threads");
  synth->add_option("--out", synth_args.out, "controller file to write");

  Table2Args table2_args;
  auto* table2 = app.add_subcommand(
      "table2", "closed-loop summary of the four catalog controllers");
  table2->add_option("--tol", table2_args.tol, "relative tolerance")
      ->check(CLI::PositiveNumber);
  table2->add_option("--workers", table2_args.workers, "worker threads");
  table2->add_option("--out", table2_args.out, "CSV output path");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand(
      "simulate", "nonlinear benchmark trajectories and threshold search");
  sim->add_option("--mode", sim_args.mode, "open | closed")
      ->check(CLI::IsMember({"open", "closed"}));
  sim->add_option("--x0", sim_args.amplitudes,
                  "initial x2 amplitudes (default: the 8 benchmark values)");
  sim->add_option("--horizon", sim_args.horizon, "integration horizon")
      ->check(CLI::PositiveNumber);
  sim->add_option("--R", sim_args.R, "Reynolds-like parameter")
      ->check(CLI::PositiveNumber);
  sim->add_flag("--find-threshold", sim_args.find_threshold,
                "bisect the critical amplitude between the smallest and "
                "largest x0");
  sim->add_option("--out", sim_args.out, "CSV path prefix");

  FixturesArgs fix_args;
  auto* fixtures = app.add_subcommand(
      "fixtures", "list the embedded example systems, or dump one");
  fixtures->add_option("name", fix_args.name, "fixture to dump");
  fixtures->add_option("--out", fix_args.out, "write the dump here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze(analyze_args);
    if (app.got_subcommand(bench)) return cmd_bench_grcar(bench_args);
    if (app.got_subcommand(synth)) return cmd_synthesize(synth_args);
    if (app.got_subcommand(table2)) return cmd_table2(table2_args);
    if (app.got_subcommand(sim)) return cmd_simulate(sim_args);
    if (app.got_subcommand(fixtures)) return cmd_fixtures(fix_args);
  } catch (const ktg::invalid_input& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ktg::numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
