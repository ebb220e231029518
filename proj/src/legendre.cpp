#include "quadint/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quadint {

LegendrePoly::LegendrePoly(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

LegendrePoly LegendrePoly::constant(double c) { return LegendrePoly({c}); }

void LegendrePoly::trim() {
  while (!c_.empty() && std::abs(c_.back()) < legendre::kDegreeTol) c_.pop_back();
}

double LegendrePoly::operator()(double x) const {
  if (c_.empty()) return 0.0;
  // Clenshaw with the Legendre recurrence
  double b1 = 0.0, b2 = 0.0;
  for (int n = degree(); n >= 0; --n) {
    const double alpha = (2.0 * n + 1.0) / (n + 1.0) * x;
    const double beta = -(n + 1.0) / (n + 2.0);
    const double b0 = c_[n] + alpha * b1 + beta * b2;
    b2 = b1;
    b1 = b0;
  }
  return b1;
}

LegendrePoly LegendrePoly::derivative() const {
  const int d = degree();
  if (d <= 0) return {};
  std::vector<double> out(d, 0.0);
  // (2n+1) L_n = (L_{n+1} - L_{n-1})'
  double odd = 0.0, even = 0.0;  // running sums of c_j with j of given parity, j > n
  for (int n = d - 1; n >= 0; --n) {
    if ((n + 1) % 2 == 0)
      even += c_[n + 1];
    else
      odd += c_[n + 1];
    out[n] = (2.0 * n + 1.0) * (n % 2 == 0 ? odd : even);
  }
  return LegendrePoly(std::move(out));
}

LegendrePoly LegendrePoly::operator+(const LegendrePoly& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return LegendrePoly(std::move(r));
}

LegendrePoly LegendrePoly::operator-(const LegendrePoly& o) const { return *this + o * -1.0; }

LegendrePoly LegendrePoly::operator*(double s) const {
  std::vector<double> r(c_);
  for (double& v : r) v *= s;
  return LegendrePoly(std::move(r));
}

LegendrePoly multiply(const LegendrePoly& a, const LegendrePoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  return legendre::project_function([&](double x) { return a(x) * b(x); }, a.degree() + b.degree());
}

namespace legendre {

double eval(int n, double x) {
  if (n < 0) throw std::invalid_argument("legendre::eval: negative degree");
  if (!(std::abs(x) <= 1.0)) throw std::domain_error("legendre::eval: x outside [-1,1]");
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

void eval_all(int nmax, double x, double* out) {
  if (nmax < 0) return;
  out[0] = 1.0;
  if (nmax == 0) return;
  out[1] = x;
  for (int k = 2; k <= nmax; ++k) out[k] = ((2.0 * k - 1.0) * x * out[k - 1] - (k - 1.0) * out[k - 2]) / k;
}

double pair_integral(int m, int n) { return m == n ? 2.0 / (2.0 * n + 1.0) : 0.0; }

GaussRule gauss_rule(int n) {
  GaussRule g;
  if (n <= 0) return g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = w;
    g.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  return g;
}

LegendrePoly project(const std::vector<double>& monomial) {
  // xp holds x^j in the Legendre basis; x L_n = ((n+1) L_{n+1} + n L_{n-1}) / (2n+1)
  const int d = static_cast<int>(monomial.size()) - 1;
  if (d < 0) return {};
  std::vector<double> out(d + 1, 0.0);
  std::vector<double> xp(d + 2, 0.0), next(d + 2, 0.0);
  xp[0] = 1.0;
  for (int j = 0; j <= d; ++j) {
    for (int n = 0; n <= j; ++n) out[n] += monomial[j] * xp[n];
    std::fill(next.begin(), next.end(), 0.0);
    for (int n = 0; n <= j; ++n) {
      if (xp[n] == 0.0) continue;
      next[n + 1] += xp[n] * (n + 1.0) / (2.0 * n + 1.0);
      if (n > 0) next[n - 1] += xp[n] * n / (2.0 * n + 1.0);
    }
    std::swap(xp, next);
  }
  return LegendrePoly(std::move(out));
}

std::vector<double> to_monomial(const LegendrePoly& p) {
  const int d = p.degree();
  if (d < 0) return {};
  std::vector<double> out(d + 1, 0.0);
  std::vector<double> a(d + 1, 0.0), b(d + 1, 0.0), c(d + 1, 0.0);  // L_{n-2}, L_{n-1}, L_n
  b[0] = 1.0;                                                           // L_0
  out[0] += p.coeff(0);
  if (d >= 1) {
    std::swap(a, b);
    b.assign(d + 1, 0.0);
    b[1] = 1.0;  // L_1
    out[1] += p.coeff(1);
  }
  for (int n = 2; n <= d; ++n) {
    std::fill(c.begin(), c.end(), 0.0);
    for (int j = 0; j < n; ++j) c[j + 1] += (2.0 * n - 1.0) / n * b[j];
    for (int j = 0; j <= n - 2; ++j) c[j] -= (n - 1.0) / n * a[j];
    for (int j = 0; j <= n; ++j) out[j] += p.coeff(n) * c[j];
    std::swap(a, b);
    std::swap(b, c);
  }
  return out;
}

LegendrePoly project_function(const std::function<double(double)>& fn, int degree) {
  if (degree < 0) return {};
  const GaussRule g = gauss_rule(degree + 1);
  std::vector<double> out(degree + 1, 0.0), L(degree + 1);
  for (size_t q = 0; q < g.nodes.size(); ++q) {
    const double fx = fn(g.nodes[q]) * g.weights[q];
    eval_all(degree, g.nodes[q], L.data());
    for (int n = 0; n <= degree; ++n) out[n] += fx * L[n];
  }
  for (int n = 0; n <= degree; ++n) out[n] *= (2.0 * n + 1.0) / 2.0;
  return LegendrePoly(std::move(out));
}

Eigen::MatrixXd triple_product_matrix(const LegendrePoly& f, int a, int b, int c, int d) {
  if (a < 0 || c < 0 || b < a || d < c) throw std::invalid_argument("triple_product_matrix: bad index range");
  const int rows = b - a + 1, cols = d - c + 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  if (f.is_zero()) return out;
  const int df = f.degree();
  const int npts = (b + d + df + 2 + 1) / 2;
  const GaussRule g = gauss_rule(npts);
  const int nmax = std::max(b, d);
  std::vector<double> L(nmax + 1);
  Eigen::MatrixXd Lr(npts, rows), Lc(npts, cols);
  Eigen::VectorXd w(npts);
  for (int q = 0; q < npts; ++q) {
    eval_all(nmax, g.nodes[q], L.data());
    w(q) = g.weights[q] * f(g.nodes[q]);
    for (int i = 0; i < rows; ++i) Lr(q, i) = L[a + i];
    for (int j = 0; j < cols; ++j) Lc(q, j) = L[c + j];
  }
  // explicit sums with L_m L_n formed first: swapping ranges gives the exact transpose
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (std::abs((a + i) - (c + j)) > df) continue;
      double s = 0.0;
      for (int q = 0; q < npts; ++q) s += w(q) * (Lr(q, i) * Lc(q, j));
      out(i, j) = s;
    }
  return out;
}

}  // namespace legendre
}  // namespace quadint
