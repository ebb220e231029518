#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "quadint/model.hpp"
#include "quadint/sdp.hpp"

namespace quadint {

struct DegreeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear maps from the degree-N Legendre coefficients of one variable to the
// coefficients of its derivatives and to boundary derivative values.
struct PolySpaceMaps {
  int N = 0;
  std::vector<Eigen::MatrixXd> deriv;  // deriv[a]: (N+1)x(N+1), coefficients of d^a u
  Eigen::RowVectorXd boundary(int alpha, Where end) const;

  PolySpaceMaps(int N, int max_order);
};

struct OuterRelaxation {
  int N = 0;
  int q = 0;
  int nparams = 0;
  std::vector<Eigen::MatrixXd> Q;  // Q[0] constant part, Q[1+i] coefficient of gamma_i; over phi_N
  Eigen::MatrixXd A;               // BC rows on phi_N
  Eigen::MatrixXd Pi;              // orthonormal basis of null(A)

  Eigen::MatrixXd Q_at(const Eigen::VectorXd& gamma) const;
  Eigen::MatrixXd projected(const Eigen::VectorXd& gamma) const { return Pi.transpose() * Q_at(gamma) * Pi; }
  // Polynomials for coefficient vector phi (length q(N+1)).
  std::vector<LegendrePoly> functions(const Eigen::VectorXd& phi) const;
};

// Orthonormal basis of null(A) from the SVD, rank threshold 1e-10 sigma_max.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& A);

// p must be on (-1,1).
OuterRelaxation build_outer(const Problem& p, int N);

// min c^T gamma s.t. Pi^T Q(gamma) Pi >= 0. In feasibility mode the cost is
// dropped and the LMI gets the solver margin.
ConicProgram outer_program(const Problem& p, const OuterRelaxation& r, bool feasibility = false);
RelaxationResult solve_outer(const Problem& p, int N, const SolverOptions& opts = {}, bool feasibility = false);

}  // namespace quadint
