#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace quadint {

// Scalar affine form constant + sum_i coeff[i] x_i.
struct LinearForm {
  double constant = 0.0;
  std::map<int, double> coeff;

  void add(int var, double v) {
    if (v != 0.0) coeff[var] += v;
  }
  double evaluate(const Eigen::VectorXd& x) const;
};

// Symmetric matrix affine in the program variables.
class SymAffineMatrix {
 public:
  SymAffineMatrix() = default;
  explicit SymAffineMatrix(int dim) : dim_(dim), constant_(Eigen::MatrixXd::Zero(dim, dim)) {}

  int dim() const { return dim_; }
  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& coefficients() const { return coeff_; }

  // Symmetric updates: (i,j) and (j,i) both receive v when i != j.
  void add_constant(int i, int j, double v);
  void add(int var, int i, int j, double v);
  void add_constant(const Eigen::MatrixXd& m);  // m is symmetrized
  void add(int var, const Eigen::MatrixXd& m);  // m is symmetrized

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;

 private:
  int dim_ = 0;
  Eigen::MatrixXd constant_;
  std::map<int, Eigen::MatrixXd> coeff_;
};

// min objective^T x + objective_offset
// s.t. psd_blocks[b](x) >= 0 (PSD), lin_ineqs[i](x) >= 0, lin_eqs[i](x) == 0.
struct ConicProgram {
  int nvars = 0;
  Eigen::VectorXd objective;
  double objective_offset = 0.0;
  std::vector<SymAffineMatrix> psd_blocks;
  std::vector<LinearForm> lin_ineqs;
  std::vector<LinearForm> lin_eqs;
  std::vector<std::string> var_names;

  // Returns the index of the first new variable.
  int add_variables(int n, const std::string& name = "");
  void validate() const;
};

enum class Status { Optimal, Infeasible, Unbounded, Inaccurate };
std::string to_string(Status s);

struct SolverOptions {
  double tol = 1e-8;     // feasibility tolerance; gap tolerances derive from it
  int max_iter = 200;
  double margin = 0.0;   // enforce every PSD block >= margin * I
  bool verbose = false;
};

struct SolveResult {
  Status status = Status::Inaccurate;
  double primal_objective = std::numeric_limits<double>::quiet_NaN();
  double dual_objective = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd x;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

SolveResult solve(const ConicProgram& prog, const SolverOptions& opts = {});

struct RelaxationResult {
  Status status = Status::Inaccurate;
  double bound = std::numeric_limits<double>::quiet_NaN();  // -inf when unbounded, +inf when infeasible
  Eigen::VectorXd gamma;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  Eigen::VectorXd certificate;  // all program variables at the solution
};

RelaxationResult to_relaxation_result(const SolveResult& r, int nparams, double offset = 0.0);

// Linear equalities removed by x = x0 + basis * z.
struct EqualityElimination {
  ConicProgram reduced;
  Eigen::VectorXd x0;
  Eigen::MatrixXd basis;
};
EqualityElimination eliminate_equalities(const ConicProgram& prog);

// Sparse SDPA text (.dat-s). Equalities are eliminated first; linear
// inequalities become one diagonal block.
std::string to_sdpa(const ConicProgram& prog);
void export_sdpa(const ConicProgram& prog, const std::string& path);
// Inverse of to_sdpa on the reduced program (no equalities).
ConicProgram from_sdpa(const std::string& text);
ConicProgram import_sdpa(const std::string& path);

}  // namespace quadint
