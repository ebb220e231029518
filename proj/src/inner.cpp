#include "quadint/inner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace quadint {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

CoefficientMaps::CoefficientMaps(int k, int M) : k_(k), M_(M), C_(k + 1) {
  if (M < k) throw std::invalid_argument("CoefficientMaps: need M >= k");
  const int w = k + M + 1;
  C_[k] = MatrixXd::Zero(M + 1, w);
  C_[k].rightCols(M + 1).setIdentity();
  for (int a = k - 1; a >= 0; --a) {
    const MatrixXd& up = C_[a + 1];
    MatrixXd& C = C_[a];
    C = MatrixXd::Zero(top(a) + 1, w);
    C.row(0) = up.row(0) - up.row(1) / 3.0;
    C(0, a) += 1.0;
    for (int n = 1; n <= top(a); ++n) C.row(n) = up.row(n - 1) / (2.0 * n - 1) - up.row(n + 1) / (2.0 * n + 3);
  }
}

RowVectorXd CoefficientMaps::boundary(int alpha, Where end) const {
  if (alpha >= k_) throw std::out_of_range("CoefficientMaps::boundary: order must be below k");
  RowVectorXd r = RowVectorXd::Zero(block_size());
  r(alpha) = 1.0;
  if (end == Where::Plus) r += 2.0 * C_[alpha + 1].row(0);
  return r;
}

IntegrationMatrices integration_matrices(int alpha, int r, int s, int k, int M) {
  if (alpha < 0 || alpha > k || r < 0 || r > s) throw std::out_of_range("integration_matrices: bad index range");
  if (s > M + alpha - k) throw std::out_of_range("integration_matrices: s exceeds M + alpha - k");
  const CoefficientMaps maps(k, M);
  const MatrixXd rows = maps.all(alpha).middleRows(r, s - r + 1);
  return {rows.leftCols(k), rows.rightCols(M + 1)};
}

MatrixXd boundary_matrix(int k, int M) {
  const CoefficientMaps maps(k, M);
  MatrixXd G(2 * k, k + M + 1);
  for (int a = 0; a < k; ++a) {
    G.row(a) = maps.boundary(a, Where::Minus);
    G.row(k + a) = maps.boundary(a, Where::Plus);
  }
  return G;
}

VectorXd xi_from_functions(const Problem& p, const CoefficientLayout& L, const std::vector<LegendrePoly>& w) {
  VectorXd xi = VectorXd::Zero(L.xi_size());
  for (int v = 0; v < p.q(); ++v) {
    std::vector<LegendrePoly> d{w[v]};
    for (int a = 1; a <= std::max(p.vars[v].l, L.k()[v]); ++a) d.push_back(d.back().derivative());
    const int k = L.k()[v];
    for (int a = 0; a < k; ++a) xi(L.psi_bv(v, a)) = d[a](-1.0);
    for (int n = 0; n <= L.M(); ++n) xi(L.psi_coef(v, n)) = d[k].coeff(n);
    for (int a = k; a <= p.vars[v].l; ++a) {
      xi(L.ext_index(v, a, Where::Minus)) = d[a](-1.0);
      xi(L.ext_index(v, a, Where::Plus)) = d[a](1.0);
    }
  }
  return xi;
}

namespace {

// Quadratic form accumulator affine in program variables; key -1 is the constant.
struct FormAccumulator {
  int dim;
  std::map<int, MatrixXd> parts;

  explicit FormAccumulator(int d) : dim(d) {}
  MatrixXd& at(int key) {
    auto it = parts.find(key);
    if (it == parts.end()) it = parts.emplace(key, MatrixXd::Zero(dim, dim)).first;
    return it->second;
  }
  // x^T C x, C need not be symmetric
  void add_form(int key, const MatrixXd& C, double scale = 1.0) {
    if (scale == 0.0) return;
    at(key) += (0.5 * scale) * (C + C.transpose());
  }
};

double omega(int M, int k, int eta) {
  const double a = 2.0 * (M - k + eta);
  return 4.0 / ((a + 1.0) * (a + 5.0));
}

}  // namespace

TailBound tail_norm_bound(int k, int alpha, int N, int M) {
  if (alpha < 0 || alpha > k || N > M - k) throw std::out_of_range("tail_norm_bound: bad orders");
  const CoefficientMaps maps(k, M);
  TailBound t;
  t.Z = MatrixXd::Zero(maps.block_size(), maps.block_size());
  const MatrixXd& rows = maps.all(alpha);
  for (int n = N + alpha + 1; n <= maps.top(alpha); ++n) t.Z += rows.row(n).transpose() * rows.row(n) / (2.0 * n + 1);
  double prod = 1.0;
  for (int j = alpha; j < k; ++j) {
    if (j > alpha) prod *= omega(M, k, j);
    const MatrixXd& up = maps.all(j + 1);
    for (int m = M - k + j; m <= M - k + j + 1; ++m)
      t.Z += prod * 2.0 / ((2.0 * m + 3) * (2.0 * m + 1) * (2.0 * m + 1)) * up.row(m).transpose() * up.row(m);
  }
  t.lambda = 0.5;
  for (int i = alpha + 1; i <= k; ++i) t.lambda *= omega(M, k, i);
  return t;
}

namespace {
// Margin on the relaxation's own LMIs only: Gram and auxiliary blocks may be
// singular at every feasible point.
constexpr double kFeasibilityMargin = 1e-9;
}  // namespace

InnerAssembly build_inner_sdp(const Problem& p, int N, const InnerOptions& opts, bool feasibility) {
  if (!p.on_reference_interval()) throw std::invalid_argument("build_inner_sdp: problem must be on (-1,1)");
  const int kmax = p.k_max();
  const int dF = std::max(p.d_F(), 0);
  if (N < dF + kmax - 1)
    throw DegreeError("N = " + std::to_string(N) + " is below d_F + k_max - 1 = " + std::to_string(dF + kmax - 1));
  InnerAssembly A;
  A.N = N;
  A.d_F = dF;
  A.M = N + 2 * kmax + dF;
  A.degT = opts.degT >= 0 ? opts.degT : std::max(0, std::min(N - 2, 6));
  const int M = A.M;
  A.layout = p.layout(M);
  const CoefficientLayout& L = A.layout;
  const int q = p.q(), s = p.s();
  const int xs = L.xi_size();

  ConicProgram& prog = A.prog;
  prog.add_variables(s, "gamma");
  for (int i = 0; i < s; ++i) prog.var_names[i] = p.param_names[i];
  if (!feasibility)
    for (int i = 0; i < s; ++i) prog.objective(i) = p.cost(i);

  std::vector<CoefficientMaps> maps;
  for (int v = 0; v < q; ++v) maps.emplace_back(L.k()[v], M);

  // coefficient rows of d^alpha w_v placed in xi
  auto coef_rows = [&](int v, int alpha, int upto) {
    MatrixXd r = MatrixXd::Zero(upto + 1, xs);
    r.middleCols(L.psi_block(v), L.psi_block_size(v)) = maps[v].all(alpha).topRows(upto + 1);
    return r;
  };

  FormAccumulator Q(xs);
  A.Sigma.assign(q, LinearForm{});

  // gamma-affine helper: key -1 for the constant part, i for gamma_i
  auto for_parts = [&](const AffinePoly& g, auto&& fn) {
    for (int j = 0; j <= g.nparams(); ++j)
      if (!g.part(j).is_zero()) fn(j - 1, g.part(j));
  };

  auto tail_bound = [&](int v, int alpha, MatrixXd& Z, double& lambda) {
    const TailBound tb = tail_norm_bound(L.k()[v], alpha, N, M);
    const int b = L.psi_block(v), n = L.psi_block_size(v);
    Z = MatrixXd::Zero(xs, xs);
    Z.block(b, b, n, n) = tb.Z;
    lambda = tb.lambda;
  };

  // interior terms, from the merged integrand over D^k w
  const AffinePolyMatrix F = p.integrand_int();
  std::vector<std::pair<int, int>> dk;  // (var, order) by dk index
  for (int v = 0; v < q; ++v)
    for (int a = 0; a <= L.k()[v]; ++a) dk.emplace_back(v, a);

  for (size_t ia = 0; ia < dk.size(); ++ia)
    for (size_t ib = ia; ib < dk.size(); ++ib) {
      const AffinePoly g = ia == ib ? F(ia, ib) : F(ia, ib) * 2.0;
      if (g.is_zero()) continue;
      const auto [pv, al] = dk[ia];
      const auto [rv, be] = dk[ib];
      const int kp = L.k()[pv], kr = L.k()[rv];
      const int dg = g.degree();

      if (al == kp && be == kr) {
        const MatrixXd Cu = coef_rows(pv, kp, M), Cv = coef_rows(rv, kr, M);
        for_parts(g, [&](int key, const LegendrePoly& f) {
          Q.add_form(key, Cu.transpose() * legendre::triple_product_matrix(f, 0, M, 0, M) * Cv);
        });
        if (dg < 1) continue;
        // mode/tail coupling bound with auxiliary LMI
        const int d = dF, Mbar = M + 1 - d;
        const bool same = pv == rv;
        const int na = same ? d : 2 * d;
        OmegaInfo om;
        om.var_p = pv;
        om.var_r = rv;
        om.dim = 2 * na;
        om.first_Q = prog.add_variables(na * (na + 1) / 2, "Qkk");
        om.first_Sigma = prog.add_variables(same ? 1 : 2, "Sigmakk");
        SymAffineMatrix blk(om.dim);
        std::vector<int> arow;  // xi index of each entry of a
        for (int n = Mbar; n <= M; ++n) arow.push_back(L.psi_coef(pv, n));
        if (!same)
          for (int n = Mbar; n <= M; ++n) arow.push_back(L.psi_coef(rv, n));
        int var = om.first_Q;
        for (int i = 0; i < na; ++i)
          for (int j = i; j < na; ++j, ++var) {
            blk.add(var, i, j, 1.0);
            Q.at(var)(arow[i], arow[j]) -= 1.0;
            if (i != j) Q.at(var)(arow[j], arow[i]) -= 1.0;
          }
        for_parts(g, [&](int key, const LegendrePoly& f) {
          const MatrixXd Phi = legendre::triple_product_matrix(f, Mbar, M, M + 1, M + d);
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
              if (Phi(i, j) == 0.0) continue;
              if (same) {
                if (key < 0)
                  blk.add_constant(i, na + j, Phi(i, j));
                else
                  blk.add(key, i, na + j, Phi(i, j));
              } else {
                const double h = 0.5 * Phi(i, j);
                for (auto [r0, c0] : {std::pair{0, d}, std::pair{d, 0}}) {
                  if (key < 0)
                    blk.add_constant(r0 + i, na + c0 + j, h);
                  else
                    blk.add(key, r0 + i, na + c0 + j, h);
                }
              }
            }
        });
        for (int j = 0; j < d; ++j) {
          const double delta = 2.0 / (2.0 * (M + j + 1) + 1.0);
          blk.add(om.first_Sigma, na + j, na + j, delta);
          if (!same) blk.add(om.first_Sigma + 1, na + d + j, na + d + j, delta);
        }
        A.Sigma[pv].add(om.first_Sigma, 1.0);
        if (!same) A.Sigma[rv].add(om.first_Sigma + 1, 1.0);
        om.block = static_cast<int>(prog.psd_blocks.size());
        prog.psd_blocks.push_back(std::move(blk));
        A.omegas.push_back(om);
        continue;
      }

      // exact modes: every (m, n) pair except both in the tails
      const int Na = N + al, Nb = N + be;
      const int mmax = std::max(Na, Nb + dg), nmax = std::max(Nb, Na + dg);
      if (mmax > maps[pv].top(al) || nmax > maps[rv].top(be))
        throw std::logic_error("build_inner_sdp: coefficient range exceeds the extended decomposition");
      const MatrixXd Cu = coef_rows(pv, al, mmax), Cv = coef_rows(rv, be, nmax);
      for_parts(g, [&](int key, const LegendrePoly& f) {
        MatrixXd Phi = legendre::triple_product_matrix(f, 0, mmax, 0, nmax);
        for (int m = Na + 1; m <= mmax; ++m)
          for (int n = Nb + 1; n <= nmax; ++n) Phi(m, n) = 0.0;
        Q.add_form(key, Cu.transpose() * Phi * Cv);
      });

      // tail-tail remainder estimate
      if (opts.skip_nonnegative_diagonal && ia == ib && !g.depends_on_params() && dg == 0 &&
          g.part(0).coeff(0) >= 0.0)
        continue;
      MatrixXd Za, Zb;
      double la, lb;
      tail_bound(pv, al, Za, la);
      tail_bound(rv, be, Zb, lb);
      const double eps = std::pow(N + 1.0, be - al);
      const MatrixXd R = eps * Za + Zb / eps;
      double tconst = 0.0;
      std::vector<int> slacks;
      for (int n = 0; n <= dg; ++n) {
        const VectorXd c = g.coeff(n);
        if (c.tail(s).cwiseAbs().maxCoeff() == 0.0 || s == 0) {
          tconst += std::abs(c(0));
          continue;
        }
        AbsLift lift;
        lift.value.constant = c(0);
        for (int i = 0; i < s; ++i) lift.value.add(i, c(i + 1));
        lift.slack = prog.add_variables(1, "t");
        LinearForm up = lift.value, lo = lift.value;  // t - f >= 0, t + f >= 0
        up.constant = -up.constant;
        for (auto& [v, a] : up.coeff) a = -a;
        up.add(lift.slack, 1.0);
        lo.add(lift.slack, 1.0);
        prog.lin_ineqs.push_back(up);
        prog.lin_ineqs.push_back(lo);
        slacks.push_back(lift.slack);
        A.lifts.push_back(lift);
      }
      if (tconst > 0.0) {
        Q.add_form(-1, R, -tconst);
        A.Sigma[pv].constant += tconst * eps * la;
        A.Sigma[rv].constant += tconst * lb / eps;
      }
      for (int t : slacks) {
        Q.add_form(t, R, -1.0);
        A.Sigma[pv].add(t, eps * la);
        A.Sigma[rv].add(t, lb / eps);
      }
    }

  // boundary values over xi
  MatrixXd Bmap = MatrixXd::Zero(L.bnd_size(), xs);
  for (int v = 0; v < q; ++v)
    for (int a = 0; a <= p.vars[v].l; ++a)
      for (Where e : {Where::Minus, Where::Plus}) {
        const int row = L.bnd_index(v, a, e);
        if (a < L.k()[v])
          Bmap.row(row).segment(L.psi_block(v), L.psi_block_size(v)) = maps[v].boundary(a, e);
        else
          Bmap(row, L.ext_index(v, a, e)) = 1.0;
      }

  const AffinePolyMatrix Fb = p.integrand_bnd();
  for (int j = 0; j <= s; ++j) {
    MatrixXd W = MatrixXd::Zero(Fb.rows(), Fb.cols());
    for (int a = 0; a < Fb.rows(); ++a)
      for (int b = 0; b < Fb.cols(); ++b) W(a, b) = 2.0 * Fb(a, b).part(j).coeff(0);
    if (W.cwiseAbs().maxCoeff() > 0.0) Q.add_form(j - 1, Bmap.transpose() * W * Bmap);
  }
  const AffinePolyMatrix Fm = p.integrand_mix();
  for (int a = 0; a < Fm.rows(); ++a)
    for (int b = 0; b < Fm.cols(); ++b) {
      const AffinePoly& g = Fm(a, b);
      if (g.is_zero()) continue;
      const auto [rv, be] = dk[b];
      const MatrixXd Cv = coef_rows(rv, be, g.degree());
      for_parts(g, [&](int key, const LegendrePoly& f) {
        RowVectorXd w = RowVectorXd::Zero(xs);
        for (int n = 0; n <= f.degree(); ++n) w += 2.0 * f.coeff(n) / (2.0 * n + 1) * Cv.row(n);
        Q.add_form(key, Bmap.row(a).transpose() * w);
      });
    }

  // BC projection
  A.K = p.bc_matrix * Bmap;
  MatrixXd Lam = null_space(A.K);
  if (Lam.cols() > 0) {
    // drop directions on which every part of the projected form vanishes
    std::vector<MatrixXd> pieces;
    Eigen::Index rows = 0;
    for (const auto& [key, m] : Q.parts) {
      MatrixXd pm = Lam.transpose() * m * Lam;
      const double mx = pm.cwiseAbs().maxCoeff();
      if (mx == 0.0) continue;
      pieces.push_back(pm / mx);
      rows += pm.rows();
    }
    MatrixXd stack(rows, Lam.cols());
    rows = 0;
    for (const auto& pc : pieces) {
      stack.middleRows(rows, pc.rows()) = pc;
      rows += pc.rows();
    }
    if (rows == 0)
      Lam.resize(Lam.rows(), 0);
    else
      Lam = Lam * null_space(null_space(stack).transpose());
  }
  A.Lambda = Lam;

  A.Q = SymAffineMatrix(xs);
  for (const auto& [key, m] : Q.parts) {
    if (key < 0)
      A.Q.add_constant(m);
    else
      A.Q.add(key, m);
  }
  if (Lam.cols() > 0) {
    SymAffineMatrix main(Lam.cols());
    for (const auto& [key, m] : Q.parts) {
      const MatrixXd pm = Lam.transpose() * m * Lam;
      if (pm.cwiseAbs().maxCoeff() == 0.0) continue;
      if (key < 0)
        main.add_constant(pm);
      else
        main.add(key, pm);
    }
    if (feasibility) main.add_constant(-kFeasibilityMargin * MatrixXd::Identity(Lam.cols(), Lam.cols()));
    A.main_block = static_cast<int>(prog.psd_blocks.size());
    prog.psd_blocks.push_back(std::move(main));
  }

  // S(x) - Sigma_M >= 0 on [-1,1]
  A.S = highest_derivative_block(p);
  PolyMatrixForm Smat = PolyMatrixForm::from_affine(A.S, 0);
  std::vector<int> active;
  for (int v = 0; v < q; ++v) {
    bool used = !A.Sigma[v].coeff.empty() || A.Sigma[v].constant != 0.0;
    for (int r = 0; r < q && !used; ++r) used = Smat(v, r).degree() >= 0;
    if (used) active.push_back(v);
  }
  if (!active.empty()) {
    const int qa = static_cast<int>(active.size());
    PolyMatrixForm Sa(qa);
    for (int i = 0; i < qa; ++i) {
      for (int j = i; j < qa; ++j) {
        const PolyForm& e = Smat(active[i], active[j]);
        for (int n = 0; n < static_cast<int>(e.c.size()); ++n) Sa.add_symmetric(i, j, n, e.c[n]);
      }
      Sa.add_symmetric(i, i, 0, A.Sigma[active[i]], -1.0);
      if (feasibility) {
        LinearForm mu;
        mu.constant = -kFeasibilityMargin;
        Sa.add_symmetric(i, i, 0, mu);
      }
    }
    if (Sa.degree() <= 0) {
      SymAffineMatrix blk(qa);
      for (int i = 0; i < qa; ++i)
        for (int j = i; j < qa; ++j) {
          const LinearForm f = Sa(i, j).coeff(0);
          blk.add_constant(i, j, f.constant);
          for (const auto& [v, a] : f.coeff) blk.add(v, i, j, a);
        }
      prog.psd_blocks.push_back(std::move(blk));
    } else {
      s_procedure_interval(prog, Sa, A.degT);
      A.sos_used = true;
    }
  }
  return A;
}

RelaxationResult solve_inner(const Problem& p, int N, const InnerOptions& opts, const SolverOptions& sopts,
                             bool feasibility) {
  const InnerAssembly A = build_inner_sdp(p, N, opts, feasibility);
  return to_relaxation_result(solve(A.prog, sopts), p.s());
}

}  // namespace quadint
