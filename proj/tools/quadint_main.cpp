#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "quadint/drivers.hpp"

using namespace quadint;

namespace {

int exit_code(Status s) {
  switch (s) {
    case Status::Optimal: return 0;
    case Status::Infeasible: return 2;
    case Status::Unbounded: return 3;
    default: return 1;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounds for quadratic integral inequalities via Legendre-series SDP relaxations"};
  app.require_subcommand(1);

  std::string problem, mode = "outer", param, out;
  int N = 6, degT = -1, ndirs = 300, threads = 0;
  double lo = 0, hi = 1, tol = 1e-4, solver_tol = 1e-8;

  auto common = [&](CLI::App* c) {
    c->add_option("--problem", problem, "problem document (JSON)")->required()->check(CLI::ExistingFile);
    c->add_option("-N", N, "Legendre truncation")->check(CLI::NonNegativeNumber);
    c->add_option("--degT", degT, "S-procedure multiplier degree (default min(N-2,6))");
    c->add_option("--solver-tol", solver_tol, "SDP feasibility tolerance")->check(CLI::PositiveNumber);
  };
  auto with_mode = [&](CLI::App* c) {
    c->add_option("--mode", mode, "inner or outer")->check(CLI::IsMember({"inner", "outer"}));
  };

  CLI::App* c_outer = app.add_subcommand("outer", "solve the outer (necessary) relaxation");
  common(c_outer);
  CLI::App* c_inner = app.add_subcommand("inner", "solve the inner (sufficient) relaxation");
  common(c_inner);
  CLI::App* c_bisect = app.add_subcommand("bisect", "bisect a parameter with a feasibility oracle");
  common(c_bisect);
  with_mode(c_bisect);
  c_bisect->add_option("--param", param, "parameter substituted per oracle call")->required();
  c_bisect->add_option("--lo", lo)->required();
  c_bisect->add_option("--hi", hi)->required();
  c_bisect->add_option("--tol", tol)->check(CLI::PositiveNumber);
  CLI::App* c_sweep = app.add_subcommand("sweep", "support function over equispaced directions");
  common(c_sweep);
  with_mode(c_sweep);
  c_sweep->add_option("--ndirs", ndirs)->check(CLI::PositiveNumber);
  c_sweep->add_option("--threads", threads, "worker threads (0: hardware concurrency)");
  CLI::App* c_export = app.add_subcommand("export", "write the relaxation as sparse SDPA");
  common(c_export);
  with_mode(c_export);
  c_export->add_option("--out", out, "output .dat-s path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    RunOptions o;
    o.N = N;
    o.degT = degT;
    o.solver.tol = solver_tol;
    const auto t0 = std::chrono::steady_clock::now();

    if (c_outer->parsed() || c_inner->parsed()) {
      o.mode = c_inner->parsed() ? Mode::Inner : Mode::Outer;
      const Problem p = prepare(load_problem(problem));
      const RelaxationResult r = solve_relaxation(p, o);
      std::cout << result_record(to_string(o.mode), r, p, o, since(t0)) << std::endl;
      return exit_code(r.status);
    }
    o.mode = parse_mode(mode);
    if (c_bisect->parsed()) {
      const BisectResult b = bisect(read_file(problem), param, lo, hi, tol, o);
      std::cout << bisect_record(b, param, o, since(t0)) << std::endl;
      return 0;
    }
    if (c_sweep->parsed()) {
      const Problem p = prepare(load_problem(problem));
      const SweepResult s = sweep(p, ndirs, o, threads);
      for (const auto& pt : s.points) std::cout << sweep_record(pt, p, o) << "\n";
      std::cout.flush();
      return 0;
    }
    if (c_export->parsed()) {
      const Problem p = prepare(load_problem(problem));
      ConicProgram prog;
      if (o.mode == Mode::Outer) {
        prog = outer_program(p, build_outer(p, N));
      } else {
        InnerOptions io;
        io.degT = degT;
        prog = build_inner_sdp(p, N, io).prog;
      }
      export_sdpa(prog, out);
      std::cout << "{\"command\":\"export\",\"status\":\"written\",\"out\":\"" << out << "\",\"mode\":\""
                << to_string(o.mode) << "\",\"N\":" << N << ",\"nvars\":" << prog.nvars << "}" << std::endl;
      return 0;
    }
  } catch (const BracketError& e) {
    std::cerr << "bracket error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
