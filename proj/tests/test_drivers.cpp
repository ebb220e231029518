#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "quadint/drivers.hpp"

using namespace quadint;
using json = nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(QUADINT_DATA_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Box |g1| <= 1, |g2| <= 1 from four pointwise weights.
const char* kBox = R"({"variables": [{"name": "a", "k": 0, "l": 0}, {"name": "b", "k": 0, "l": 0},
  {"name": "c", "k": 0, "l": 0}, {"name": "d", "k": 0, "l": 0}],
 "parameters": ["g1", "g2"], "cost": [0, 0], "domain": [-1, 1], "terms": [
  {"coeff": {"const": [1], "params": {"g1": [1]}}, "factors": [{"var": "a", "deriv": 0, "where": "interior"}, {"var": "a", "deriv": 0, "where": "interior"}]},
  {"coeff": {"const": [1], "params": {"g1": [-1]}}, "factors": [{"var": "b", "deriv": 0, "where": "interior"}, {"var": "b", "deriv": 0, "where": "interior"}]},
  {"coeff": {"const": [1], "params": {"g2": [1]}}, "factors": [{"var": "c", "deriv": 0, "where": "interior"}, {"var": "c", "deriv": 0, "where": "interior"}]},
  {"coeff": {"const": [1], "params": {"g2": [-1]}}, "factors": [{"var": "d", "deriv": 0, "where": "interior"}, {"var": "d", "deriv": 0, "where": "interior"}]}],
 "bcs": []})";

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(QUADINT_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (fgets(buf, sizeof buf, p)) r.out += buf;
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

json strip_time(json j) {
  j.erase("time_s");
  return j;
}

}  // namespace

TEST(Bisect, LocatesThreshold) {
  int calls = 0;
  const double cut = 0.3141;
  const BisectResult r = bisect([&](double v) { ++calls; return v <= cut; }, 0.0, 1.0, 1e-4);
  EXPECT_NEAR(r.value, cut, 1e-4);
  EXPECT_LE(r.lo, cut);
  EXPECT_GE(r.hi, cut);
  EXPECT_FALSE(r.feasible_at_hi);
  EXPECT_LE(r.iterations, static_cast<int>(std::ceil(std::log2(1.0 / 1e-4))));
  EXPECT_EQ(calls, r.iterations + 2);
  ASSERT_EQ(static_cast<int>(r.trace.size()), calls);
  // bracket stays monotone: every midpoint lies inside the previous bracket
  double lo = 0.0, hi = 1.0;
  for (size_t i = 2; i < r.trace.size(); ++i) {
    const auto& s = r.trace[i];
    EXPECT_GT(s.value, lo);
    EXPECT_LT(s.value, hi);
    (s.feasible ? lo : hi) = s.value;
  }
}

TEST(Bisect, FeasibleAboveThreshold) {
  const BisectResult r = bisect([](double v) { return v >= 2.5; }, -4.0, 4.0, 1e-6);
  EXPECT_TRUE(r.feasible_at_hi);
  EXPECT_NEAR(r.value, 2.5, 1e-6);
  EXPECT_LE(r.iterations, static_cast<int>(std::ceil(std::log2(8.0 / 1e-6))));
}

TEST(Bisect, BracketErrors) {
  EXPECT_THROW(bisect([](double) { return true; }, 0.0, 1.0, 1e-3), BracketError);
  EXPECT_THROW(bisect([](double) { return false; }, 0.0, 1.0, 1e-3), BracketError);
  EXPECT_THROW(bisect([](double v) { return v < 0.5; }, 1.0, 0.0, 1e-3), std::invalid_argument);
  EXPECT_THROW(bisect([](double v) { return v < 0.5; }, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Bisect, ProblemDocumentOuter) {
  // pathology outer at N = 4: feasible below the threshold, infeasible far above
  RunOptions o;
  o.mode = Mode::Outer;
  o.N = 4;
  const BisectResult r = bisect(slurp(data("pathology.json")), "gamma", 0.0, 20.0, 1e-3, o);
  EXPECT_FALSE(r.feasible_at_hi);
  EXPECT_GT(r.value, 2.2);
  const Problem at = prepare(load_problem(data("pathology.json"), {{"gamma", r.lo}}));
  EXPECT_EQ(solve_relaxation(at, o, true).status, Status::Optimal);
  const Problem above = prepare(load_problem(data("pathology.json"), {{"gamma", r.hi}}));
  EXPECT_NE(solve_relaxation(above, o, true).status, Status::Optimal);
  const json rec = json::parse(bisect_record(r, "gamma", o, 0.5));
  EXPECT_EQ(rec["command"], "bisect");
  EXPECT_EQ(rec["feasible_side"], "lo");
  EXPECT_EQ(rec["trace"].size(), r.trace.size());
}

TEST(Sweep, BoxHasFiniteSupport) {
  const Problem p = prepare(parse_problem(kBox));
  for (Mode m : {Mode::Inner, Mode::Outer}) {
    RunOptions o;
    o.mode = m;
    o.N = 2;
    const SweepResult s = sweep(p, 4, o, 2);
    ASSERT_EQ(s.points.size(), 4u);
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(s.points[i].theta, i * std::acos(-1.0) / 2, 1e-15);
      EXPECT_EQ(s.points[i].status, Status::Optimal);
      EXPECT_NEAR(s.points[i].support, 1.0, 1e-6);
    }
  }
}

TEST(Sweep, InnerBelowOuterOnToy) {
  const Problem p = prepare(load_problem(data("toy.json")));
  RunOptions in, out;
  in.mode = Mode::Inner;
  out.mode = Mode::Outer;
  in.N = out.N = 6;
  const SweepResult a = sweep(p, 12, in), b = sweep(p, 12, out);
  for (int i = 0; i < 12; ++i) {
    if (a.points[i].status != Status::Optimal) continue;
    if (b.points[i].status == Status::Unbounded) continue;
    ASSERT_EQ(b.points[i].status, Status::Optimal) << i;
    EXPECT_LE(a.points[i].support, b.points[i].support + 1e-6) << i;
  }
}

TEST(Sweep, RequiresTwoParameters) {
  EXPECT_THROW(sweep(prepare(load_problem(data("shear_xi3.json"))), 4, RunOptions{}), std::invalid_argument);
}

TEST(Records, DeterministicModuloTiming) {
  const Problem p = prepare(load_problem(data("shear_xi3.json")));
  RunOptions o;
  o.N = 8;
  const std::string a = result_record("outer", solve_relaxation(p, o), p, o, 0.1);
  const std::string b = result_record("outer", solve_relaxation(p, o), p, o, 0.7);
  EXPECT_EQ(strip_time(json::parse(a)).dump(), strip_time(json::parse(b)).dump());
  const json j = json::parse(a);
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_EQ(j["N"], 8);
  EXPECT_TRUE(j["gamma"].contains("gamma"));
  EXPECT_FALSE(j.contains("degT"));

  RelaxationResult unb;
  unb.status = Status::Unbounded;
  unb.bound = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(json::parse(result_record("outer", unb, p, o, 0.0))["bound"], "-inf");
}

TEST(Cli, ExitCodesAndRecords) {
  const CliRun ok = cli("outer --problem " + data("shear_xi3.json") + " -N 9");
  EXPECT_EQ(ok.code, 0);
  const json j = json::parse(ok.out);
  EXPECT_NEAR(j["bound"].get<double>(), -139.7701, 5e-3);

  EXPECT_EQ(cli("outer --problem " + data("shear_xi3.json") + " -N 3").code, 3);
  EXPECT_EQ(cli("inner --problem " + data("pathology.json") + " -N 4").code, 2);
  EXPECT_EQ(cli("inner --problem /nonexistent.json -N 4").code != 0, true);
  EXPECT_NE(cli("frobnicate").code, 0);
  // bracket error: feasible at both ends
  EXPECT_EQ(cli("bisect --problem " + data("pathology.json") + " --mode outer -N 4 --param gamma --lo 0 --hi 1 --tol 0.1")
                .code,
            1);
}

TEST(Cli, InnerRunsAreByteIdentical) {
  const std::string args = "inner --problem " + data("toy.json") + " -N 4";
  const CliRun a = cli(args), b = cli(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(strip_time(json::parse(a.out)).dump(), strip_time(json::parse(b.out)).dump());
  EXPECT_EQ(json::parse(a.out)["degT"], 2);
}

TEST(Cli, ExportRoundTrips) {
  const std::string path = (std::filesystem::temp_directory_path() / "quadint_cli_export.dat-s").string();
  std::filesystem::remove(path);
  const CliRun r = cli("export --problem " + data("shear_xi3.json") + " -N 6 --out " + path);
  ASSERT_EQ(r.code, 0);
  ASSERT_TRUE(std::filesystem::exists(path));
  const std::string text = slurp(path);
  EXPECT_EQ(to_sdpa(import_sdpa(path)), text);
  const ConicProgram q = import_sdpa(path);
  const SolveResult s = solve(q);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.primal_objective + q.objective_offset, -140.4087, 5e-3);
  std::filesystem::remove(path);
}

TEST(Cli, SweepEmitsOneLinePerDirection) {
  const std::string path = (std::filesystem::temp_directory_path() / "quadint_box.json").string();
  {
    std::ofstream f(path);
    f << kBox;
  }
  const CliRun r = cli("sweep --problem " + path + " --mode outer -N 2 --ndirs 6");
  EXPECT_EQ(r.code, 0);
  std::istringstream in(r.out);
  int lines = 0;
  for (std::string l; std::getline(in, l); ++lines) EXPECT_EQ(json::parse(l)["command"], "sweep");
  EXPECT_EQ(lines, 6);
  std::filesystem::remove(path);
}
