#include "quadint/affine_poly.hpp"

#include <algorithm>
#include <stdexcept>

namespace quadint {

AffinePoly::AffinePoly(const LegendrePoly& base, int nparams) : parts_(nparams + 1) { parts_[0] = base; }

int AffinePoly::degree() const {
  int d = -1;
  for (const auto& p : parts_) d = std::max(d, p.degree());
  return d;
}

bool AffinePoly::depends_on_params() const {
  for (size_t j = 1; j < parts_.size(); ++j)
    if (!parts_[j].is_zero()) return true;
  return false;
}

double AffinePoly::operator()(double x, const Eigen::VectorXd& gamma) const {
  double v = parts_.empty() ? 0.0 : parts_[0](x);
  for (int i = 0; i < nparams(); ++i)
    if (!parts_[i + 1].is_zero()) v += gamma(i) * parts_[i + 1](x);
  return v;
}

LegendrePoly AffinePoly::at(const Eigen::VectorXd& gamma) const {
  LegendrePoly r = parts_.empty() ? LegendrePoly() : parts_[0];
  for (int i = 0; i < nparams(); ++i)
    if (!parts_[i + 1].is_zero()) r += parts_[i + 1] * gamma(i);
  return r;
}

Eigen::VectorXd AffinePoly::coeff(int n) const {
  Eigen::VectorXd v(parts_.size());
  for (size_t j = 0; j < parts_.size(); ++j) v(j) = parts_[j].coeff(n);
  return v;
}

AffinePoly AffinePoly::derivative() const {
  AffinePoly r(nparams());
  for (size_t j = 0; j < parts_.size(); ++j) r.parts_[j] = parts_[j].derivative();
  return r;
}

AffinePoly AffinePoly::operator+(const AffinePoly& o) const {
  if (parts_.empty()) return o;
  if (o.parts_.empty()) return *this;
  if (o.nparams() != nparams()) throw std::invalid_argument("AffinePoly: parameter count mismatch");
  AffinePoly r(nparams());
  for (size_t j = 0; j < parts_.size(); ++j) r.parts_[j] = parts_[j] + o.parts_[j];
  return r;
}

AffinePoly AffinePoly::operator*(double s) const {
  AffinePoly r = *this;
  for (auto& p : r.parts_) p = p * s;
  return r;
}

AffinePoly AffinePoly::times(const LegendrePoly& q) const {
  AffinePoly r = *this;
  for (auto& p : r.parts_) p = multiply(p, q);
  return r;
}

AffinePoly AffinePoly::compose(const std::function<double(double)>& map, int degree) const {
  AffinePoly r = *this;
  for (auto& p : r.parts_) {
    if (p.is_zero()) continue;
    const LegendrePoly src = p;
    p = legendre::project_function([&](double x) { return src(map(x)); }, degree);
  }
  return r;
}

AffinePolyMatrix::AffinePolyMatrix(int rows, int cols, int nparams)
    : rows_(rows), cols_(cols), nparams_(nparams), e_(static_cast<size_t>(rows) * cols, AffinePoly(nparams)) {}

void AffinePolyMatrix::add_symmetric(int i, int j, const AffinePoly& p) {
  (*this)(i, j) += p;
  if (i != j) (*this)(j, i) += p;
}

int AffinePolyMatrix::degree() const {
  int d = -1;
  for (const auto& p : e_) d = std::max(d, p.degree());
  return d;
}

bool AffinePolyMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j)
      for (int p = 0; p <= nparams_; ++p) {
        const auto& a = (*this)(i, j).part(p);
        const auto& b = (*this)(j, i).part(p);
        const int d = std::max(a.degree(), b.degree());
        for (int n = 0; n <= d; ++n)
          if (std::abs(a.coeff(n) - b.coeff(n)) > tol) return false;
      }
  return true;
}

Eigen::MatrixXd AffinePolyMatrix::eval(double x, const Eigen::VectorXd& gamma) const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j)(x, gamma);
  return m;
}

std::vector<std::vector<LegendrePoly>> AffinePolyMatrix::base() const { return term(-1); }

std::vector<std::vector<LegendrePoly>> AffinePolyMatrix::term(int i) const {
  std::vector<std::vector<LegendrePoly>> out(rows_, std::vector<LegendrePoly>(cols_));
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out[r][c] = (*this)(r, c).part(i + 1);
  return out;
}

}  // namespace quadint
