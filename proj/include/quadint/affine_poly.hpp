#pragma once

#include <Eigen/Dense>
#include <vector>

#include "quadint/legendre.hpp"

namespace quadint {

// Polynomial in x whose Legendre coefficients are affine in a parameter
// vector gamma of length s: p(x; gamma) = p_0(x) + sum_i gamma_i p_{i+1}(x).
class AffinePoly {
 public:
  AffinePoly() = default;
  explicit AffinePoly(int nparams) : parts_(nparams + 1) {}
  AffinePoly(const LegendrePoly& base, int nparams);

  int nparams() const { return static_cast<int>(parts_.size()) - 1; }
  const LegendrePoly& part(int j) const { return parts_[j]; }  // 0 = constant, 1+i = parameter i
  LegendrePoly& part(int j) { return parts_[j]; }

  int degree() const;
  bool is_zero() const { return degree() < 0; }
  bool depends_on_params() const;

  double operator()(double x, const Eigen::VectorXd& gamma) const;
  LegendrePoly at(const Eigen::VectorXd& gamma) const;

  // n-th Legendre coefficient as [constant, d/dgamma_1, ..., d/dgamma_s].
  Eigen::VectorXd coeff(int n) const;

  AffinePoly derivative() const;
  AffinePoly operator+(const AffinePoly& o) const;
  AffinePoly operator-(const AffinePoly& o) const { return *this + o * -1.0; }
  AffinePoly operator*(double s) const;
  AffinePoly& operator+=(const AffinePoly& o) { return *this = *this + o; }
  AffinePoly times(const LegendrePoly& p) const;
  // p(x) -> p(x) evaluated through a function of x, projected to given degree
  AffinePoly compose(const std::function<double(double)>& map, int degree) const;

 private:
  std::vector<LegendrePoly> parts_;
};

// rows x cols matrix of AffinePoly; square instances are kept symmetric by
// the symmetric update methods.
class AffinePolyMatrix {
 public:
  AffinePolyMatrix() = default;
  AffinePolyMatrix(int rows, int cols, int nparams);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nparams() const { return nparams_; }

  const AffinePoly& operator()(int i, int j) const { return e_[static_cast<size_t>(i) * cols_ + j]; }
  AffinePoly& operator()(int i, int j) { return e_[static_cast<size_t>(i) * cols_ + j]; }

  // Adds p to (i,j) and (j,i); for i == j adds once.
  void add_symmetric(int i, int j, const AffinePoly& p);

  int degree() const;
  bool is_zero() const { return degree() < 0; }
  bool is_symmetric(double tol = 0.0) const;

  Eigen::MatrixXd eval(double x, const Eigen::VectorXd& gamma) const;

  // Constant part F_0 and parameter coefficients F_i, entrywise.
  std::vector<std::vector<LegendrePoly>> base() const;
  std::vector<std::vector<LegendrePoly>> term(int i) const;

 private:
  int rows_ = 0, cols_ = 0, nparams_ = 0;
  std::vector<AffinePoly> e_;
};

}  // namespace quadint
