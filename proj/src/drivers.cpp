#include "quadint/drivers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <thread>

namespace quadint {

using json = nlohmann::json;

std::string to_string(Mode m) { return m == Mode::Inner ? "inner" : "outer"; }

Mode parse_mode(const std::string& s) {
  if (s == "inner") return Mode::Inner;
  if (s == "outer") return Mode::Outer;
  throw std::invalid_argument("mode must be inner or outer, got '" + s + "'");
}

RelaxationResult solve_relaxation(const Problem& p, const RunOptions& o, bool feasibility) {
  if (o.mode == Mode::Outer) return solve_outer(p, o.N, o.solver, feasibility);
  InnerOptions io;
  io.degT = o.degT;
  return solve_inner(p, o.N, io, o.solver, feasibility);
}

BisectResult bisect(const std::function<bool(double)>& feasible, double lo, double hi, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("bisect: need lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("bisect: need tol > 0");
  BisectResult r;
  const bool flo = feasible(lo), fhi = feasible(hi);
  r.trace.push_back({lo, flo});
  r.trace.push_back({hi, fhi});
  if (flo == fhi)
    throw BracketError(std::string("bisect: oracle is ") + (flo ? "feasible" : "infeasible") + " at both ends");
  r.feasible_at_hi = fhi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const bool f = feasible(mid);
    r.trace.push_back({mid, f});
    ++r.iterations;
    if (f == fhi)
      hi = mid;
    else
      lo = mid;
  }
  r.lo = lo;
  r.hi = hi;
  r.value = 0.5 * (lo + hi);
  return r;
}

BisectResult bisect(const std::string& document, const std::string& param, double lo, double hi, double tol,
                    const RunOptions& o) {
  auto oracle = [&](double v) {
    const Problem p = prepare(parse_problem(document, {{param, v}}));
    return solve_relaxation(p, o, true).status == Status::Optimal;
  };
  return bisect(oracle, lo, hi, tol);
}

SweepResult sweep(const Problem& p, int ndirs, const RunOptions& o, int threads) {
  if (p.param_names.size() != 2) throw std::invalid_argument("sweep: problem must have exactly two parameters");
  if (ndirs < 1) throw std::invalid_argument("sweep: ndirs must be positive");
  SweepResult out;
  out.kind = o.mode;
  out.points.resize(ndirs);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < ndirs; i = next++) {
      SweepPoint& s = out.points[i];
      s.theta = 2.0 * std::numbers::pi * i / ndirs;
      Problem q = p;
      // maximise the support function by minimising its negative
      q.cost = Eigen::Vector2d(-std::sin(s.theta), -std::cos(s.theta));
      try {
        const RelaxationResult r = solve_relaxation(q, o);
        s.status = r.status;
        s.support = -r.bound;
        s.gamma = r.gamma;
      } catch (const std::exception& e) {
        s.status = Status::Inaccurate;
        s.support = std::numeric_limits<double>::quiet_NaN();
        s.error = e.what();
      }
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, ndirs);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

namespace {

json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

json gamma_json(const Eigen::VectorXd& g, const Problem& p) {
  json j = json::object();
  for (int i = 0; i < g.size() && i < static_cast<int>(p.param_names.size()); ++i) j[p.param_names[i]] = g(i);
  return j;
}

json run_json(const RunOptions& o) {
  json j = {{"mode", to_string(o.mode)}, {"N", o.N}};
  if (o.mode == Mode::Inner) j["degT"] = o.degT < 0 ? std::max(0, std::min(o.N - 2, 6)) : o.degT;
  return j;
}

}  // namespace

std::string result_record(const std::string& command, const RelaxationResult& r, const Problem& p,
                          const RunOptions& o, double seconds) {
  json j = {{"command", command}, {"status", to_string(r.status)}, {"bound", number(r.bound)}};
  j["gamma"] = gamma_json(r.gamma, p);
  j.update(run_json(o));
  j["iterations"] = r.iterations;
  j["primal_residual"] = r.primal_residual;
  j["dual_residual"] = r.dual_residual;
  j["time_s"] = seconds;
  return j.dump();
}

std::string bisect_record(const BisectResult& b, const std::string& param, const RunOptions& o, double seconds) {
  json j = {{"command", "bisect"}, {"status", "feasible"}, {"param", param}, {"value", b.value}};
  j["bracket"] = {b.lo, b.hi};
  j["feasible_side"] = b.feasible_at_hi ? "hi" : "lo";
  j["iterations"] = b.iterations;
  json tr = json::array();
  for (const auto& s : b.trace) tr.push_back({s.value, s.feasible});
  j["trace"] = tr;
  j.update(run_json(o));
  j["time_s"] = seconds;
  return j.dump();
}

std::string sweep_record(const SweepPoint& s, const Problem& p, const RunOptions& o) {
  json j = {{"command", "sweep"}, {"theta", s.theta}, {"status", to_string(s.status)}, {"support", number(s.support)}};
  j["gamma"] = gamma_json(s.gamma, p);
  j.update(run_json(o));
  if (!s.error.empty()) j["error"] = s.error;
  return j.dump();
}

}  // namespace quadint
