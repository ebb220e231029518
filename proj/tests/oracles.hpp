#pragma once

// Reference computations sharing no code with the library: monomial-basis
// polynomial arithmetic, explicit Legendre formulas, and Golub-Welsch
// Gauss-Legendre nodes.

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Mono = std::vector<double>;  // ascending coefficients

double eval(const Mono& p, double x);
Mono mul(const Mono& a, const Mono& b);
Mono add(const Mono& a, const Mono& b, double sb = 1.0);
Mono deriv(const Mono& p, int times = 1);
Mono scale(const Mono& p, double s);
// p(alpha * x + beta)
Mono affine_compose(const Mono& p, double alpha, double beta);

// L_n(x) from the Laplace integral, |x| <= 1.
double legendre_laplace(int n, double x);

// Explicit closed-form monomial coefficients of L_n (ill-conditioned for large n).
Mono legendre_mono(int n);

struct Rule {
  std::vector<double> x, w;
};
// n-point Gauss-Legendre rule from the Jacobi matrix eigenproblem.
Rule golub_welsch(int n);

double integrate(const std::function<double(double)>& f, double a, double b, int npts);
double integrate(const Mono& p, double a = -1.0, double b = 1.0);

// n-th Legendre coefficient of a monomial polynomial.
double legendre_coeff(const Mono& p, int n);
std::vector<double> legendre_coeffs(const Mono& p);

// Legendre coefficients -> monomial, via the closed form.
Mono from_legendre(const std::vector<double>& c);

Mono random_poly(std::mt19937& rng, int degree, double amp = 1.0);

}  // namespace oracle
