#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace quadint {

// Polynomial on [-1,1] stored by Legendre coefficients c_0..c_d.
class LegendrePoly {
 public:
  LegendrePoly() = default;
  explicit LegendrePoly(std::vector<double> coeffs);

  static LegendrePoly constant(double c);

  // Trailing coefficients below 1e-14 in magnitude are dropped.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<double>& coeffs() const { return c_; }
  double coeff(int n) const { return n >= 0 && n < static_cast<int>(c_.size()) ? c_[n] : 0.0; }

  double operator()(double x) const;

  LegendrePoly derivative() const;

  LegendrePoly operator+(const LegendrePoly& o) const;
  LegendrePoly operator-(const LegendrePoly& o) const;
  LegendrePoly operator*(double s) const;
  LegendrePoly operator-() const { return (*this) * -1.0; }
  LegendrePoly& operator+=(const LegendrePoly& o) { return *this = *this + o; }

  bool operator==(const LegendrePoly& o) const { return c_ == o.c_; }

 private:
  void trim();
  std::vector<double> c_;
};

LegendrePoly multiply(const LegendrePoly& a, const LegendrePoly& b);

namespace legendre {

inline constexpr double kDegreeTol = 1e-14;

// L_n(x) by the three-term recurrence; throws std::domain_error for |x| > 1.
double eval(int n, double x);

// Values L_0(x)..L_nmax(x). No domain check (used at quadrature nodes).
void eval_all(int nmax, double x, double* out);

// Integral of L_m L_n over [-1,1].
double pair_integral(int m, int n);

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
GaussRule gauss_rule(int n);

// Exact change of basis from ascending monomial coefficients.
LegendrePoly project(const std::vector<double>& monomial);

// Inverse of project.
std::vector<double> to_monomial(const LegendrePoly& p);

// Legendre coefficients 0..degree of a function, by Gauss quadrature.
// Exact when fn is a polynomial of degree <= degree.
LegendrePoly project_function(const std::function<double(double)>& fn, int degree);

// (i,j) entry = integral of f L_{a+i} L_{c+j} over [-1,1].
Eigen::MatrixXd triple_product_matrix(const LegendrePoly& f, int a, int b, int c, int d);

}  // namespace legendre
}  // namespace quadint
