#pragma once

#include <Eigen/Dense>
#include <vector>

#include "quadint/model.hpp"
#include "quadint/outer.hpp"
#include "quadint/sdp.hpp"
#include "quadint/sos.hpp"

namespace quadint {

// Legendre coefficients of every derivative of one variable as linear
// functionals of its psi block [d^0..d^{k-1} u(-1), coefficients 0..M of d^k u].
class CoefficientMaps {
 public:
  CoefficientMaps(int k, int M);

  int k() const { return k_; }
  int M() const { return M_; }
  int block_size() const { return k_ + M_ + 1; }
  // highest valid coefficient index of d^alpha u
  int top(int alpha) const { return M_ + alpha - k_; }
  // row of length block_size giving the n-th coefficient of d^alpha u
  Eigen::RowVectorXd coef(int alpha, int n) const { return C_.at(alpha).row(n); }
  const Eigen::MatrixXd& all(int alpha) const { return C_.at(alpha); }
  // d^alpha u at an endpoint, alpha < k
  Eigen::RowVectorXd boundary(int alpha, Where end) const;

 private:
  int k_, M_;
  std::vector<Eigen::MatrixXd> C_;
};

struct IntegrationMatrices {
  Eigen::MatrixXd B;  // (s-r+1) x k, on D^{k-1}u(-1)
  Eigen::MatrixXd D;  // (s-r+1) x (M+1), on coefficients 0..M of d^k u
};

// Coefficients r..s of d^alpha u in terms of D^{k-1}u(-1) and d^k u's
// coefficients. Throws std::out_of_range if s > M + alpha - k.
IntegrationMatrices integration_matrices(int alpha, int r, int s, int k, int M);

// [D^{k-1}u(-1); D^{k-1}u(1)] = G * [D^{k-1}u(-1); coefficients 0..M of d^k u]
Eigen::MatrixXd boundary_matrix(int k, int M);

// 1/2 ||U^alpha_{N+alpha}||^2 <= psi^T Z psi + lambda ||U^k_M||^2 on one
// variable's psi block, U^j_i the Legendre tail of d^j u beyond index i.
struct TailBound {
  Eigen::MatrixXd Z;
  double lambda = 0.0;
};
TailBound tail_norm_bound(int k, int alpha, int N, int M);

struct InnerOptions {
  int degT = -1;  // < 0: min(N - 2, 6), floored at 0
  // Drop the tail estimate for f (d^a u)^2 with f a nonnegative constant,
  // whose remainder contribution is itself nonnegative.
  bool skip_nonnegative_diagonal = false;
};

struct OmegaInfo {
  int var_p = 0, var_r = 0;  // variable pair (p <= r)
  int block = -1;            // index into ConicProgram::psd_blocks
  int dim = 0;
  int first_Q = 0, first_Sigma = 0;  // auxiliary variables
};

struct AbsLift {
  LinearForm value;  // Legendre coefficient of an entry, affine in gamma
  int slack = 0;     // program variable t with -t <= value <= t
};

struct InnerAssembly {
  int N = 0, M = 0, d_F = 0, degT = 0;
  CoefficientLayout layout{{}, {}, 0};
  ConicProgram prog;           // gamma occupies variables 0..s-1
  SymAffineMatrix Q;           // Q^tot over xi
  std::vector<LinearForm> Sigma;  // diagonal of Sigma_M
  AffinePolyMatrix S;          // highest-derivative block
  Eigen::MatrixXd K;           // BC rows over xi
  Eigen::MatrixXd Lambda;      // orthonormal basis of null(K), pruned of directions Q ignores
  std::vector<OmegaInfo> omegas;
  std::vector<AbsLift> lifts;
  bool sos_used = false;
  int main_block = -1;  // index of the projected LMI
};

// Coefficient vector xi for polynomials w (one per variable) on (-1,1).
// Exact when each d^{k_i} w_i has degree <= M.
Eigen::VectorXd xi_from_functions(const Problem& p, const CoefficientLayout& L, const std::vector<LegendrePoly>& w);

// p must be on (-1,1) and N >= d_F + k_max - 1.
InnerAssembly build_inner_sdp(const Problem& p, int N, const InnerOptions& opts = {}, bool feasibility = false);
RelaxationResult solve_inner(const Problem& p, int N, const InnerOptions& opts = {}, const SolverOptions& sopts = {},
                             bool feasibility = false);

}  // namespace quadint
