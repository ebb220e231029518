#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadint/affine_poly.hpp"

namespace quadint {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ReductionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Where { Interior, Minus, Plus };

struct Factor {
  int var = 0;
  int deriv = 0;
  Where where = Where::Interior;
};

// Contributes integral over the domain of coeff(y) * X * Y; boundary factors
// are constants, so a boundary-boundary term integrates its coefficient.
struct Term {
  AffinePoly coeff;
  Factor first, second;
};

struct Variable {
  std::string name;
  int k = 1;  // highest interior derivative
  int l = 1;  // highest boundary derivative
};

// Index arithmetic for every vector the relaxations use.
//   D^k w : per variable, derivatives 0..k_i
//   B^l w : per variable, [d^0..d^l at -1, d^0..d^l at +1]
//   psi_M : per variable, [d^0..d^{k_i-1} at -1, coefficients 0..M of d^{k_i}]
//   xi    : [psi_M; per variable, orders k_i..l_i at -1 then at +1]
class CoefficientLayout {
 public:
  CoefficientLayout(std::vector<int> k, std::vector<int> l, int M);

  int q() const { return static_cast<int>(k_.size()); }
  int M() const { return M_; }
  const std::vector<int>& k() const { return k_; }
  const std::vector<int>& l() const { return l_; }

  int dk_size() const { return dk_size_; }
  int dk_index(int var, int alpha) const { return dk_off_[var] + alpha; }

  int bnd_size() const { return bnd_size_; }
  int bnd_index(int var, int alpha, Where end) const {
    return bnd_off_[var] + (end == Where::Minus ? 0 : l_[var] + 1) + alpha;
  }

  int psi_size() const { return psi_size_; }
  int psi_block(int var) const { return psi_off_[var]; }
  int psi_block_size(int var) const { return k_[var] + M_ + 1; }
  int psi_bv(int var, int alpha) const { return psi_off_[var] + alpha; }  // d^alpha u(-1), alpha < k
  int psi_coef(int var, int n) const { return psi_off_[var] + k_[var] + n; }

  int ext_size() const { return ext_size_; }
  int xi_size() const { return psi_size_ + ext_size_; }
  int ext_index(int var, int alpha, Where end) const {
    const int w = l_[var] - k_[var] + 1;
    return psi_size_ + ext_off_[var] + (end == Where::Minus ? 0 : w) + (alpha - k_[var]);
  }

  // outer: Legendre coefficients 0..N of each variable
  static int phi_index(int var, int n, int N) { return var * (N + 1) + n; }

 private:
  std::vector<int> k_, l_;
  int M_;
  std::vector<int> dk_off_, bnd_off_, psi_off_, ext_off_;
  int dk_size_ = 0, bnd_size_ = 0, psi_size_ = 0, ext_size_ = 0;
};

struct Problem {
  std::vector<Variable> vars;
  std::vector<std::string> param_names;
  Eigen::VectorXd cost;
  double a = -1.0, b = 1.0;
  std::vector<Term> terms;
  Eigen::MatrixXd bc_matrix;  // p x bnd_size, columns by CoefficientLayout::bnd_index

  int q() const { return static_cast<int>(vars.size()); }
  int s() const { return static_cast<int>(param_names.size()); }
  int p() const { return static_cast<int>(bc_matrix.rows()); }
  std::vector<int> k() const;
  std::vector<int> l() const;
  int k_max() const;
  int d_F() const;
  CoefficientLayout layout(int M = 0) const { return CoefficientLayout(k(), l(), M); }
  bool on_reference_interval() const { return a == -1.0 && b == 1.0; }

  AffinePolyMatrix integrand_int() const;  // over D^k w
  AffinePolyMatrix integrand_mix() const;  // rows B^l w, cols D^k w
  AffinePolyMatrix integrand_bnd() const;  // over B^l w

  // Throws InconsistencyError on malformed content.
  void validate() const;
};

// JSON problem document. Parameters listed in `fixed` are substituted; a
// parameter key "a*b" denotes a product and must become affine after
// substitution.
Problem parse_problem(const std::string& text, const std::map<std::string, double>& fixed = {});
Problem load_problem(const std::string& path, const std::map<std::string, double>& fixed = {});

// Removes dependent BC rows (column-pivoted QR, tolerance 1e-10 relative).
Eigen::MatrixXd reduce_bc_rows(const Eigen::MatrixXd& A);

Problem rescale_domain(const Problem& p);
Problem integrate_by_parts(const Problem& p);
// rescale_domain followed by integrate_by_parts.
Problem prepare(const Problem& p);

// Rows/columns of integrand_int at each variable's highest derivative.
AffinePolyMatrix highest_derivative_block(const Problem& p);

// Functional value by Gauss quadrature on the problem's own domain; w[i] is
// the polynomial for variable i in the domain coordinate.
double evaluate_functional(const Problem& p, const std::vector<LegendrePoly>& w, const Eigen::VectorXd& gamma);

}  // namespace quadint
