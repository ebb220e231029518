#include "quadint/outer.hpp"

#include <algorithm>
#include <cmath>

namespace quadint {

using Eigen::MatrixXd;
using Eigen::VectorXd;

PolySpaceMaps::PolySpaceMaps(int N_, int max_order) : N(N_) {
  MatrixXd D = MatrixXd::Zero(N + 1, N + 1);
  for (int n = 0; n <= N; ++n) {
    std::vector<double> e(n + 1, 0.0);
    e[n] = 1.0;
    const LegendrePoly d = LegendrePoly(e).derivative();
    for (int m = 0; m <= d.degree(); ++m) D(m, n) = d.coeff(m);
  }
  deriv.push_back(MatrixXd::Identity(N + 1, N + 1));
  for (int a = 1; a <= max_order; ++a) deriv.push_back(D * deriv.back());
}

Eigen::RowVectorXd PolySpaceMaps::boundary(int alpha, Where end) const {
  Eigen::RowVectorXd ev(N + 1);
  for (int n = 0; n <= N; ++n) ev(n) = (end == Where::Minus && n % 2 == 1) ? -1.0 : 1.0;
  return ev * deriv.at(alpha);
}

MatrixXd OuterRelaxation::Q_at(const VectorXd& gamma) const {
  MatrixXd m = Q[0];
  for (int i = 0; i < nparams; ++i) m += gamma(i) * Q[i + 1];
  return m;
}

std::vector<LegendrePoly> OuterRelaxation::functions(const VectorXd& phi) const {
  std::vector<LegendrePoly> out;
  for (int v = 0; v < q; ++v) {
    std::vector<double> c(N + 1);
    for (int n = 0; n <= N; ++n) c[n] = phi(CoefficientLayout::phi_index(v, n, N));
    out.emplace_back(c);
  }
  return out;
}

MatrixXd null_space(const MatrixXd& A) {
  const int n = static_cast<int>(A.cols());
  if (A.rows() == 0) return MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  int rank = 0;
  const double smax = sv.size() ? sv(0) : 0.0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * smax) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

OuterRelaxation build_outer(const Problem& p, int N) {
  if (!p.on_reference_interval()) throw std::invalid_argument("build_outer: problem must be on (-1,1)");
  int lmax = 0, kmax = 0;
  for (const auto& v : p.vars) {
    lmax = std::max(lmax, v.l);
    kmax = std::max(kmax, v.k);
  }
  if (N < lmax) throw DegreeError("N = " + std::to_string(N) + " cannot express boundary derivatives up to order " +
                                  std::to_string(lmax));
  OuterRelaxation r;
  r.N = N;
  r.q = p.q();
  r.nparams = p.s();
  const int dim = p.q() * (N + 1);
  r.Q.assign(p.s() + 1, MatrixXd::Zero(dim, dim));
  const PolySpaceMaps maps(N, std::max(lmax, kmax));

  // factor -> linear functional(s) on phi: interior gives (N+1) x dim coefficient map
  auto interior_map = [&](const Factor& f) {
    MatrixXd m = MatrixXd::Zero(N + 1, dim);
    m.middleCols(f.var * (N + 1), N + 1) = maps.deriv[f.deriv];
    return m;
  };
  auto boundary_map = [&](const Factor& f) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
    r.segment(f.var * (N + 1), N + 1) = maps.boundary(f.deriv, f.where);
    return r;
  };

  for (const auto& t : p.terms) {
    const bool i1 = t.first.where == Where::Interior, i2 = t.second.where == Where::Interior;
    for (int j = 0; j <= p.s(); ++j) {
      const LegendrePoly& f = t.coeff.part(j);
      if (f.is_zero()) continue;
      MatrixXd contrib;
      if (i1 && i2) {
        const MatrixXd Phi = legendre::triple_product_matrix(f, 0, N, 0, N);
        contrib = interior_map(t.first).transpose() * Phi * interior_map(t.second);
      } else if (!i1 && !i2) {
        contrib = 2.0 * f.coeff(0) * boundary_map(t.first).transpose() * boundary_map(t.second);
      } else {
        const Factor& fb = i1 ? t.second : t.first;
        const Factor& fi = i1 ? t.first : t.second;
        Eigen::RowVectorXd w(N + 1);
        for (int n = 0; n <= N; ++n) w(n) = 2.0 * f.coeff(n) / (2 * n + 1);
        contrib = boundary_map(fb).transpose() * (w * interior_map(fi));
      }
      r.Q[j] += 0.5 * (contrib + contrib.transpose());
    }
  }

  const CoefficientLayout L = p.layout();
  MatrixXd B = MatrixXd::Zero(L.bnd_size(), dim);
  for (int v = 0; v < p.q(); ++v)
    for (int a = 0; a <= p.vars[v].l; ++a)
      for (Where e : {Where::Minus, Where::Plus}) B.row(L.bnd_index(v, a, e)) = boundary_map(Factor{v, a, e});
  r.A = p.bc_matrix * B;
  r.Pi = null_space(r.A);
  return r;
}

ConicProgram outer_program(const Problem& p, const OuterRelaxation& r, bool feasibility) {
  ConicProgram prog;
  prog.add_variables(p.s(), "gamma");
  for (int i = 0; i < p.s(); ++i) prog.var_names[i] = p.param_names[i];
  prog.objective = feasibility ? VectorXd::Zero(p.s()) : VectorXd(p.cost);
  const int m = static_cast<int>(r.Pi.cols());
  if (m > 0) {
    SymAffineMatrix blk(m);
    blk.add_constant(r.Pi.transpose() * r.Q[0] * r.Pi);
    for (int i = 0; i < p.s(); ++i) {
      MatrixXd Qi = r.Pi.transpose() * r.Q[i + 1] * r.Pi;
      // roundoff from cancelling terms would otherwise pin gamma at ~1e17
      const double tiny = 1e-12 * std::max(1.0, r.Q[i + 1].cwiseAbs().maxCoeff());
      if (Qi.cwiseAbs().maxCoeff() > tiny) blk.add(i, Qi);
    }
    prog.psd_blocks.push_back(std::move(blk));
  }
  return prog;
}

RelaxationResult solve_outer(const Problem& p, int N, const SolverOptions& opts, bool feasibility) {
  const OuterRelaxation r = build_outer(p, N);
  if (r.Pi.cols() == 0) {
    RelaxationResult res;
    res.gamma = VectorXd::Zero(p.s());
    const bool costly = !feasibility && p.cost.size() > 0 && p.cost.cwiseAbs().maxCoeff() > 0.0;
    res.status = costly ? Status::Unbounded : Status::Optimal;
    res.bound = costly ? -std::numeric_limits<double>::infinity() : 0.0;
    res.certificate = res.gamma;
    return res;
  }
  SolverOptions o = opts;
  if (feasibility && o.margin == 0.0) o.margin = 1e-9;
  return to_relaxation_result(solve(outer_program(p, r, feasibility), o), p.s());
}

}  // namespace quadint
