#pragma once

#include <vector>

#include "quadint/affine_poly.hpp"
#include "quadint/sdp.hpp"

namespace quadint {

struct DegreeParityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Univariate polynomial whose Legendre coefficients are affine forms in the
// program variables.
struct PolyForm {
  std::vector<LinearForm> c;

  int degree() const;  // structural: last coefficient with any nonzero data
  LinearForm coeff(int n) const { return n < static_cast<int>(c.size()) ? c[n] : LinearForm{}; }
  void add(int n, const LinearForm& f, double scale = 1.0);
};

// Symmetric q x q matrix of PolyForm; z^T P(x) z is the polynomial in (x, z).
class PolyMatrixForm {
 public:
  PolyMatrixForm() = default;
  explicit PolyMatrixForm(int q) : q_(q), e_(static_cast<size_t>(q) * q) {}
  // gamma_i of an AffinePoly maps to program variable var_offset + i
  static PolyMatrixForm from_affine(const AffinePolyMatrix& m, int var_offset = 0);

  int q() const { return q_; }
  int degree() const;
  const PolyForm& operator()(int i, int j) const { return e_[static_cast<size_t>(i) * q_ + j]; }
  // Adds to (i,j) and (j,i); once on the diagonal.
  void add_symmetric(int i, int j, int n, const LinearForm& f, double scale = 1.0);
  // Numeric value at (x, program variables).
  Eigen::MatrixXd evaluate(double x, const Eigen::VectorXd& vars) const;

 private:
  int q_ = 0;
  std::vector<PolyForm> e_;
};

struct SosConstraint {
  int half_degree = 0;                        // basis L_0..L_h times each z_i
  std::vector<std::pair<int, int>> basis;     // (z index, Legendre degree)
  int gram_block = -1;                        // index into ConicProgram::psd_blocks
  int first_var = 0;                          // Gram entries (upper triangle, row-major)
  int first_eq = 0, num_eqs = 0;              // coefficient-matching equalities
  Eigen::MatrixXd gram(const Eigen::VectorXd& x) const;
};

// Emits Gram block + coefficient equalities making z^T poly z SOS in (x, z).
// max_x_degree must be even and at least the degree of poly.
SosConstraint gram_parameterize(ConicProgram& prog, const PolyMatrixForm& poly, int max_x_degree);

struct SProcedure {
  SosConstraint p1, p2;
  int T_first_var = 0;  // T coefficients: for n = 0..degT, upper triangle of q x q, row-major
  int degT = 0;
  PolyMatrixForm T;
};

// z^T Smat z >= 0 on [-1,1] x R^q via p1 = z^T[Smat - (1-x^2)T]z and
// p2 = z^T T z both SOS, T symmetric of degree degT.
SProcedure s_procedure_interval(ConicProgram& prog, const PolyMatrixForm& Smat, int degT);

}  // namespace quadint
