#include "quadint/sos.hpp"

#include <algorithm>
#include <cmath>

namespace quadint {

namespace {

bool is_trivial(const LinearForm& f) {
  if (f.constant != 0.0) return false;
  for (const auto& [v, a] : f.coeff) {
    (void)v;
    if (a != 0.0) return false;
  }
  return true;
}

void accumulate(LinearForm& dst, const LinearForm& src, double scale) {
  dst.constant += scale * src.constant;
  for (const auto& [v, a] : src.coeff) dst.add(v, scale * a);
}

// lin[n](j, j') = (2n+1)/2 * integral L_j L_j' L_n
std::vector<Eigen::MatrixXd> linearization(int h) {
  std::vector<Eigen::MatrixXd> out;
  for (int n = 0; n <= 2 * h; ++n) {
    std::vector<double> e(n + 1, 0.0);
    e[n] = 1.0;
    out.push_back(legendre::triple_product_matrix(LegendrePoly(e), 0, h, 0, h) * ((2 * n + 1) / 2.0));
  }
  return out;
}

}  // namespace

int PolyForm::degree() const {
  for (int n = static_cast<int>(c.size()) - 1; n >= 0; --n)
    if (!is_trivial(c[n])) return n;
  return -1;
}

void PolyForm::add(int n, const LinearForm& f, double scale) {
  if (static_cast<int>(c.size()) <= n) c.resize(n + 1);
  accumulate(c[n], f, scale);
}

PolyMatrixForm PolyMatrixForm::from_affine(const AffinePolyMatrix& m, int var_offset) {
  PolyMatrixForm r(m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j) {
      const AffinePoly& a = m(i, j);
      for (int n = 0; n <= a.degree(); ++n) {
        LinearForm f;
        f.constant = a.part(0).coeff(n);
        for (int s = 0; s < a.nparams(); ++s) f.add(var_offset + s, a.part(s + 1).coeff(n));
        r.add_symmetric(i, j, n, f);
      }
    }
  return r;
}

int PolyMatrixForm::degree() const {
  int d = -1;
  for (const auto& p : e_) d = std::max(d, p.degree());
  return d;
}

void PolyMatrixForm::add_symmetric(int i, int j, int n, const LinearForm& f, double scale) {
  e_[static_cast<size_t>(i) * q_ + j].add(n, f, scale);
  if (i != j) e_[static_cast<size_t>(j) * q_ + i].add(n, f, scale);
}

Eigen::MatrixXd PolyMatrixForm::evaluate(double x, const Eigen::VectorXd& vars) const {
  Eigen::MatrixXd m(q_, q_);
  for (int i = 0; i < q_; ++i)
    for (int j = 0; j < q_; ++j) {
      const PolyForm& p = (*this)(i, j);
      std::vector<double> c;
      for (const auto& f : p.c) c.push_back(f.evaluate(vars));
      m(i, j) = LegendrePoly(c)(x);
    }
  return m;
}

Eigen::MatrixXd SosConstraint::gram(const Eigen::VectorXd& x) const {
  const int n = static_cast<int>(basis.size());
  Eigen::MatrixXd G(n, n);
  int v = first_var;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) G(a, b) = G(b, a) = x(v++);
  return G;
}

SosConstraint gram_parameterize(ConicProgram& prog, const PolyMatrixForm& poly, int max_x_degree) {
  if (max_x_degree < 0 || max_x_degree % 2 != 0)
    throw DegreeParityError("Gram parameterization needs an even x-degree bound");
  if (poly.degree() > max_x_degree)
    throw DegreeParityError("x-degree bound " + std::to_string(max_x_degree) + " below polynomial degree " +
                            std::to_string(poly.degree()));
  const int q = poly.q();
  SosConstraint c;
  c.half_degree = max_x_degree / 2;
  const int h = c.half_degree;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j <= h; ++j) c.basis.emplace_back(i, j);
  const int nb = static_cast<int>(c.basis.size());
  c.first_var = prog.add_variables(nb * (nb + 1) / 2, "gram");
  std::vector<std::vector<int>> var(nb, std::vector<int>(nb));
  {
    int v = c.first_var;
    for (int a = 0; a < nb; ++a)
      for (int b = a; b < nb; ++b) var[a][b] = var[b][a] = v++;
  }
  SymAffineMatrix blk(nb);
  for (int a = 0; a < nb; ++a)
    for (int b = a; b < nb; ++b) blk.add(var[a][b], a, b, 1.0);
  c.gram_block = static_cast<int>(prog.psd_blocks.size());
  prog.psd_blocks.push_back(std::move(blk));

  const auto lin = linearization(h);
  c.first_eq = static_cast<int>(prog.lin_eqs.size());
  auto idx = [h](int i, int j) { return i * (h + 1) + j; };
  for (int i = 0; i < q; ++i)
    for (int i2 = i; i2 < q; ++i2)
      for (int n = 0; n <= 2 * h; ++n) {
        // coefficient of z_i z_i2 L_n: Gram side minus polynomial side
        LinearForm eq;
        const double sym = (i == i2) ? 1.0 : 2.0;
        for (int j = 0; j <= h; ++j)
          for (int j2 = 0; j2 <= h; ++j2) {
            const double w = lin[n](j, j2);
            if (std::abs(w) < 1e-15) continue;
            eq.add(var[idx(i, j)][idx(i2, j2)], sym * w);
          }
        accumulate(eq, poly(i, i2).coeff(n), -sym);
        prog.lin_eqs.push_back(std::move(eq));
      }
  c.num_eqs = static_cast<int>(prog.lin_eqs.size()) - c.first_eq;
  return c;
}

SProcedure s_procedure_interval(ConicProgram& prog, const PolyMatrixForm& Smat, int degT) {
  if (degT < 0) throw std::invalid_argument("s_procedure_interval: degT must be nonnegative");
  const int q = Smat.q();
  SProcedure sp;
  sp.degT = degT;
  sp.T = PolyMatrixForm(q);
  const int nT = (degT + 1) * q * (q + 1) / 2;
  sp.T_first_var = prog.add_variables(nT, "T");
  PolyMatrixForm p1 = Smat;
  const LegendrePoly bump({2.0 / 3.0, 0.0, -2.0 / 3.0});  // 1 - x^2
  int v = sp.T_first_var;
  for (int n = 0; n <= degT; ++n) {
    std::vector<double> e(n + 1, 0.0);
    e[n] = 1.0;
    const LegendrePoly weighted = multiply(bump, LegendrePoly(e));
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j, ++v) {
        LinearForm t;
        t.add(v, 1.0);
        sp.T.add_symmetric(i, j, n, t);
        for (int m = 0; m <= weighted.degree(); ++m)
          if (weighted.coeff(m) != 0.0) p1.add_symmetric(i, j, m, t, -weighted.coeff(m));
      }
  }
  const int d1 = std::max(Smat.degree(), degT + 2);
  sp.p1 = gram_parameterize(prog, p1, d1 + (d1 % 2));
  sp.p2 = gram_parameterize(prog, sp.T, degT + (degT % 2));
  return sp;
}

}  // namespace quadint
