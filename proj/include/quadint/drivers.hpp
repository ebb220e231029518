#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadint/inner.hpp"
#include "quadint/outer.hpp"

namespace quadint {

enum class Mode { Inner, Outer };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  Mode mode = Mode::Outer;
  int N = 6;
  int degT = -1;  // inner only; < 0 picks min(N - 2, 6)
  SolverOptions solver;
};

// p must already be prepared (on (-1,1), integrated by parts).
RelaxationResult solve_relaxation(const Problem& p, const RunOptions& o, bool feasibility = false);

struct BisectStep {
  double value = 0.0;
  bool feasible = false;
};

struct BisectResult {
  double value = 0.0;  // midpoint of the final bracket
  double lo = 0.0, hi = 0.0;
  bool feasible_at_hi = false;
  int iterations = 0;
  std::vector<BisectStep> trace;  // bracket ends first, then midpoints
};

// Locates the feasibility transition of `feasible` in [lo, hi] to within tol.
BisectResult bisect(const std::function<bool(double)>& feasible, double lo, double hi, double tol);

// `param` is substituted into the problem document per oracle call; all
// other parameters stay decision variables of a feasibility SDP.
BisectResult bisect(const std::string& document, const std::string& param, double lo, double hi, double tol,
                    const RunOptions& o);

struct SweepPoint {
  double theta = 0.0;
  Status status = Status::Inaccurate;
  double support = 0.0;  // max of gamma_1 sin(theta) + gamma_2 cos(theta)
  Eigen::VectorXd gamma;
  std::string error;  // set when the solve threw
};

struct SweepResult {
  Mode kind = Mode::Outer;
  std::vector<SweepPoint> points;
};

// p prepared, two parameters. threads <= 0 uses the hardware concurrency.
SweepResult sweep(const Problem& p, int ndirs, const RunOptions& o, int threads = 0);

// One-line JSON records. Everything except "time_s" is deterministic.
std::string result_record(const std::string& command, const RelaxationResult& r, const Problem& p,
                          const RunOptions& o, double seconds);
std::string bisect_record(const BisectResult& b, const std::string& param, const RunOptions& o, double seconds);
std::string sweep_record(const SweepPoint& s, const Problem& p, const RunOptions& o);

}  // namespace quadint
