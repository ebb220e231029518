// Primal-dual interior-point method on the homogeneous self-dual embedding
//   min c'x  s.t.  Gx + s = h,  Ax = b,  s in (PSD blocks) x (nonnegative orthant)
// with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
#include "quadint/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace quadint {

double LinearForm::evaluate(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [i, a] : coeff) v += a * x(i);
  return v;
}

void SymAffineMatrix::add_constant(int i, int j, double v) {
  constant_(i, j) += v;
  if (i != j) constant_(j, i) += v;
}

void SymAffineMatrix::add(int var, int i, int j, double v) {
  if (v == 0.0) return;
  auto it = coeff_.find(var);
  if (it == coeff_.end()) it = coeff_.emplace(var, Eigen::MatrixXd::Zero(dim_, dim_)).first;
  it->second(i, j) += v;
  if (i != j) it->second(j, i) += v;
}

void SymAffineMatrix::add_constant(const Eigen::MatrixXd& m) { constant_ += 0.5 * (m + m.transpose()); }

void SymAffineMatrix::add(int var, const Eigen::MatrixXd& m) {
  if (m.isZero(0.0)) return;
  auto it = coeff_.find(var);
  if (it == coeff_.end()) it = coeff_.emplace(var, Eigen::MatrixXd::Zero(dim_, dim_)).first;
  it->second += 0.5 * (m + m.transpose());
}

Eigen::MatrixXd SymAffineMatrix::evaluate(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = constant_;
  for (const auto& [v, m] : coeff_) out += x(v) * m;
  return out;
}

int ConicProgram::add_variables(int n, const std::string& name) {
  const int first = nvars;
  nvars += n;
  objective.conservativeResize(nvars);
  for (int i = first; i < nvars; ++i) objective(i) = 0.0;
  for (int i = 0; i < n; ++i) var_names.push_back(n == 1 ? name : name + "[" + std::to_string(i) + "]");
  return first;
}

void ConicProgram::validate() const {
  if (objective.size() != nvars) throw std::invalid_argument("ConicProgram: objective size mismatch");
  auto check_var = [&](int v) {
    if (v < 0 || v >= nvars) throw std::invalid_argument("ConicProgram: undeclared variable");
  };
  for (const auto& b : psd_blocks) {
    if (b.dim() <= 0) throw std::invalid_argument("ConicProgram: empty PSD block");
    for (const auto& [v, m] : b.coefficients()) {
      (void)m;
      check_var(v);
    }
  }
  for (const auto& f : lin_ineqs)
    for (const auto& [v, a] : f.coeff) {
      (void)a;
      check_var(v);
    }
  for (const auto& f : lin_eqs)
    for (const auto& [v, a] : f.coeff) {
      (void)a;
      check_var(v);
    }
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::Inaccurate: return "inaccurate";
  }
  return "unknown";
}

RelaxationResult to_relaxation_result(const SolveResult& r, int nparams, double offset) {
  RelaxationResult out;
  out.status = r.status;
  out.primal_residual = r.primal_residual;
  out.dual_residual = r.dual_residual;
  out.gap = r.gap;
  out.iterations = r.iterations;
  out.certificate = r.x;
  if (r.x.size() >= nparams) out.gamma = r.x.head(nparams);
  switch (r.status) {
    case Status::Optimal:
    case Status::Inaccurate: out.bound = r.primal_objective + offset; break;
    case Status::Unbounded: out.bound = -std::numeric_limits<double>::infinity(); break;
    case Status::Infeasible: out.bound = std::numeric_limits<double>::infinity(); break;
  }
  return out;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct VarMat {
  int var = 0;
  bool dense = true;
  MatrixXd D;
  std::vector<std::tuple<int, int, double>> sp;  // i <= j
};

struct Block {
  int n = 0;
  MatrixXd h;
  std::vector<VarMat> vars;
};

struct StdForm {
  int n = 0;
  VectorXd c;
  std::vector<Block> blocks;
  MatrixXd Gl;
  VectorXd hl;
  MatrixXd A;
  VectorXd b;
  int degree() const {
    int d = static_cast<int>(hl.size());
    for (const auto& bl : blocks) d += bl.n;
    return d;
  }
};

struct ConeVec {
  std::vector<MatrixXd> s;
  VectorXd l;
};

double dot(const ConeVec& a, const ConeVec& b) {
  double v = a.l.dot(b.l);
  for (size_t i = 0; i < a.s.size(); ++i) v += a.s[i].cwiseProduct(b.s[i]).sum();
  return v;
}

double norm(const ConeVec& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const ConeVec& x, ConeVec& y) {
  y.l += alpha * x.l;
  for (size_t i = 0; i < x.s.size(); ++i) y.s[i] += alpha * x.s[i];
}

ConeVec scaled(const ConeVec& a, double alpha) {
  ConeVec r = a;
  r.l *= alpha;
  for (auto& m : r.s) m *= alpha;
  return r;
}

ConeVec cone_h(const StdForm& f) {
  ConeVec h;
  for (const auto& b : f.blocks) h.s.push_back(b.h);
  h.l = f.hl;
  return h;
}

ConeVec identity_like(const StdForm& f) {
  ConeVec e;
  for (const auto& b : f.blocks) e.s.push_back(MatrixXd::Identity(b.n, b.n));
  e.l = VectorXd::Ones(f.hl.size());
  return e;
}

ConeVec apply_G(const StdForm& f, const VectorXd& x) {
  ConeVec out;
  for (const auto& b : f.blocks) {
    MatrixXd S = MatrixXd::Zero(b.n, b.n);
    for (const auto& vm : b.vars) {
      const double xv = x(vm.var);
      if (xv == 0.0) continue;
      if (vm.dense) {
        S += xv * vm.D;
      } else {
        for (const auto& [i, j, v] : vm.sp) {
          S(i, j) += xv * v;
          if (i != j) S(j, i) += xv * v;
        }
      }
    }
    out.s.push_back(std::move(S));
  }
  out.l = f.Gl * x;
  return out;
}

VectorXd apply_Gt(const StdForm& f, const ConeVec& z) {
  VectorXd out = f.Gl.transpose() * z.l;
  for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
    const auto& b = f.blocks[bi];
    const MatrixXd& Z = z.s[bi];
    for (const auto& vm : b.vars) {
      double v = 0.0;
      if (vm.dense) {
        v = vm.D.cwiseProduct(Z).sum();
      } else {
        for (const auto& [i, j, a] : vm.sp) v += a * (i == j ? Z(i, i) : Z(i, j) + Z(j, i));
      }
      out(vm.var) += v;
    }
  }
  return out;
}

// Smallest eigenvalue over all cone components.
double min_eig(const ConeVec& a) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : a.s) {
    if (s.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues()(0));
  }
  if (a.l.size() > 0) m = std::min(m, a.l.minCoeff());
  return m;
}

struct Scaling {
  std::vector<MatrixXd> R, Rinv;
  std::vector<VectorXd> lam;
  VectorXd w, laml;  // LP: W = diag(w), lambda = sqrt(s z)
};

Scaling identity_scaling(const StdForm& f) {
  Scaling W;
  for (const auto& b : f.blocks) {
    W.R.push_back(MatrixXd::Identity(b.n, b.n));
    W.Rinv.push_back(MatrixXd::Identity(b.n, b.n));
    W.lam.push_back(VectorXd::Ones(b.n));
  }
  W.w = VectorXd::Ones(f.hl.size());
  W.laml = VectorXd::Ones(f.hl.size());
  return W;
}

bool nt_scaling(const ConeVec& s, const ConeVec& z, Scaling& W) {
  W.R.clear();
  W.Rinv.clear();
  W.lam.clear();
  for (size_t i = 0; i < s.s.size(); ++i) {
    Eigen::LLT<MatrixXd> ls(s.s[i]), lz(z.s[i]);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    const MatrixXd Ls = ls.matrixL(), Lz = lz.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd lam = svd.singularValues();
    if (lam.minCoeff() <= 0.0) return false;
    const VectorXd isq = lam.cwiseSqrt().cwiseInverse();
    MatrixXd R = Ls * svd.matrixV() * isq.asDiagonal();
    // R^{-1} = Lambda^{1/2} V^T Ls^{-1}
    MatrixXd LsInvT = Ls.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(Ls.rows(), Ls.cols()));
    MatrixXd Rinv = lam.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * LsInvT;
    W.R.push_back(std::move(R));
    W.Rinv.push_back(std::move(Rinv));
    W.lam.push_back(lam);
  }
  if (s.l.size() > 0) {
    if (s.l.minCoeff() <= 0.0 || z.l.minCoeff() <= 0.0) return false;
    W.w = (s.l.array() / z.l.array()).sqrt().matrix();
    W.laml = (s.l.array() * z.l.array()).sqrt().matrix();
  } else {
    W.w.resize(0);
    W.laml.resize(0);
  }
  return true;
}

// W z  (z -> scaled)
ConeVec apply_W(const Scaling& W, const ConeVec& z) {
  ConeVec r;
  for (size_t i = 0; i < z.s.size(); ++i) r.s.push_back(W.R[i].transpose() * z.s[i] * W.R[i]);
  r.l = W.w.cwiseProduct(z.l);
  return r;
}

// W^T x
ConeVec apply_Wt(const Scaling& W, const ConeVec& x) {
  ConeVec r;
  for (size_t i = 0; i < x.s.size(); ++i) r.s.push_back(W.R[i] * x.s[i] * W.R[i].transpose());
  r.l = W.w.cwiseProduct(x.l);
  return r;
}

ConeVec lambda_vec(const Scaling& W) {
  ConeVec r;
  for (const auto& l : W.lam) r.s.push_back(l.asDiagonal());
  r.l = W.laml;
  return r;
}

// Jordan product a o b = (ab + ba)/2
ConeVec jordan(const ConeVec& a, const ConeVec& b) {
  ConeVec r;
  for (size_t i = 0; i < a.s.size(); ++i) r.s.push_back(0.5 * (a.s[i] * b.s[i] + b.s[i] * a.s[i]));
  r.l = a.l.cwiseProduct(b.l);
  return r;
}

// Solve lambda o X = r for X, lambda diagonal.
ConeVec jordan_div(const Scaling& W, const ConeVec& r) {
  ConeVec x;
  for (size_t b = 0; b < r.s.size(); ++b) {
    const VectorXd& l = W.lam[b];
    const int n = static_cast<int>(l.size());
    MatrixXd X(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) X(i, j) = 2.0 * r.s[b](i, j) / (l(i) + l(j));
    x.s.push_back(std::move(X));
  }
  x.l = r.l.cwiseQuotient(W.laml);
  return x;
}

// Largest alpha in (0, inf] with lambda + alpha*d in the cone (lambda diagonal).
double max_step(const Scaling& W, const ConeVec& d) {
  double worst = 0.0;  // max of -eig(Lambda^{-1/2} d Lambda^{-1/2})
  for (size_t b = 0; b < d.s.size(); ++b) {
    const VectorXd is = W.lam[b].cwiseSqrt().cwiseInverse();
    MatrixXd T = is.asDiagonal() * d.s[b] * is.asDiagonal();
    T = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
    worst = std::max(worst, -es.eigenvalues()(0));
  }
  for (int i = 0; i < d.l.size(); ++i) worst = std::max(worst, -d.l(i) / W.laml(i));
  return worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
}

// Factorization of [0 A' G'; A 0 0; G 0 -W'W].
class KKTSolver {
 public:
  KKTSolver(const StdForm& f, const Scaling& W) : f_(f), W_(W) { factor(); }

  bool ok() const { return ok_; }

  // Solve with iterative refinement against the unfactored system.
  void solve(const VectorXd& bx, const VectorXd& by, const ConeVec& bz, VectorXd& x, VectorXd& y,
             ConeVec& z) const {
    solve_once(bx, by, bz, x, y, z);
    for (int it = 0; it < kRefineSteps; ++it) {
      VectorXd rx = bx - apply_Gt(f_, z);
      if (f_.A.rows() > 0) rx -= f_.A.transpose() * y;
      const VectorXd ry = f_.A.rows() > 0 ? VectorXd(by - f_.A * x) : VectorXd(0);
      ConeVec rz = bz;
      axpy(-1.0, apply_G(f_, x), rz);
      axpy(1.0, apply_Wt(W_, apply_W(W_, z)), rz);
      VectorXd dx, dy;
      ConeVec dz;
      solve_once(rx, ry, rz, dx, dy, dz);
      x += dx;
      if (y.size() > 0) y += dy;
      axpy(1.0, dz, z);
    }
  }

 private:
  static constexpr int kRefineSteps = 2;

  void solve_once(const VectorXd& bx, const VectorXd& by, const ConeVec& bz, VectorXd& x, VectorXd& y,
                  ConeVec& z) const {
    // Bhat = W^{-T} bz
    std::vector<MatrixXd> Bh(f_.blocks.size());
    VectorXd r = bx;
    for (size_t bi = 0; bi < f_.blocks.size(); ++bi) {
      Bh[bi] = W_.Rinv[bi] * bz.s[bi] * W_.Rinv[bi].transpose();
      const auto& blk = f_.blocks[bi];
      const int n = blk.n;
      Eigen::Map<const VectorXd> vb(Bh[bi].data(), n * n);
      VectorXd loc = V_[bi].transpose() * vb;
      for (size_t k = 0; k < blk.vars.size(); ++k) r(blk.vars[k].var) += loc(k);
    }
    VectorXd bl_scaled;
    if (f_.hl.size() > 0) {
      bl_scaled = bz.l.cwiseQuotient(W_.w);  // W^{-T} bz for LP
      r += Glh_.transpose() * bl_scaled;
    }
    if (f_.A.rows() > 0) {
      r += f_.A.transpose() * by;
      const VectorXd t = Hr_.solve(r);
      y = S_.solve(f_.A * t - by);
      x = Hr_.solve(r - f_.A.transpose() * y);
    } else {
      y.resize(0);
      x = Hr_.solve(r);
    }
    // z = W^{-1} (Ghat x - Bhat)
    z.s.resize(f_.blocks.size());
    for (size_t bi = 0; bi < f_.blocks.size(); ++bi) {
      const auto& blk = f_.blocks[bi];
      const int n = blk.n;
      VectorXd xl(blk.vars.size());
      for (size_t k = 0; k < blk.vars.size(); ++k) xl(k) = x(blk.vars[k].var);
      VectorXd gx = V_[bi] * xl;
      Eigen::Map<MatrixXd> Gx(gx.data(), n, n);
      MatrixXd T = Gx - Bh[bi];
      z.s[bi] = W_.Rinv[bi].transpose() * T * W_.Rinv[bi];
    }
    if (f_.hl.size() > 0)
      z.l = (Glh_ * x - bl_scaled).cwiseQuotient(W_.w);
    else
      z.l.resize(0);
  }

  void factor() {
    const int n = f_.n;
    MatrixXd H = MatrixXd::Zero(n, n);
    V_.resize(f_.blocks.size());
    for (size_t bi = 0; bi < f_.blocks.size(); ++bi) {
      const auto& blk = f_.blocks[bi];
      const int nb = blk.n;
      const MatrixXd& Ri = W_.Rinv[bi];
      MatrixXd& V = V_[bi];
      V.resize(static_cast<Eigen::Index>(nb) * nb, blk.vars.size());
      for (size_t k = 0; k < blk.vars.size(); ++k) {
        const auto& vm = blk.vars[k];
        MatrixXd Gh;
        if (vm.dense) {
          Gh = Ri * vm.D * Ri.transpose();
        } else {
          Gh = MatrixXd::Zero(nb, nb);
          for (const auto& [i, j, v] : vm.sp) {
            if (i == j) {
              Gh.noalias() += v * Ri.col(i) * Ri.col(i).transpose();
            } else {
              MatrixXd t = v * Ri.col(i) * Ri.col(j).transpose();
              Gh += t + t.transpose();
            }
          }
        }
        V.col(k) = Eigen::Map<const VectorXd>(Gh.data(), static_cast<Eigen::Index>(nb) * nb);
      }
      MatrixXd Hb = MatrixXd::Zero(blk.vars.size(), blk.vars.size());
      Hb.selfadjointView<Eigen::Lower>().rankUpdate(V.transpose());
      Hb.triangularView<Eigen::StrictlyUpper>() = Hb.transpose();
      for (size_t a = 0; a < blk.vars.size(); ++a)
        for (size_t c = 0; c < blk.vars.size(); ++c) H(blk.vars[a].var, blk.vars[c].var) += Hb(a, c);
    }
    if (f_.hl.size() > 0) {
      Glh_ = W_.w.cwiseInverse().asDiagonal() * f_.Gl;
      H.noalias() += Glh_.transpose() * Glh_;
    }
    if (f_.A.rows() > 0) H.noalias() += f_.A.transpose() * f_.A;
    Hr_.compute(H);
    if (Hr_.info() != Eigen::Success) {
      const double reg = 1e-13 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      H.diagonal().array() += reg;
      Hr_.compute(H);
      if (Hr_.info() != Eigen::Success) {
        ok_ = false;
        return;
      }
    }
    if (f_.A.rows() > 0) {
      const MatrixXd HiAt = Hr_.solve(f_.A.transpose());
      S_.compute(f_.A * HiAt);
      if (S_.info() != Eigen::Success) {
        ok_ = false;
        return;
      }
    }
    ok_ = true;
  }

  const StdForm& f_;
  const Scaling& W_;
  std::vector<MatrixXd> V_;
  MatrixXd Glh_;
  Eigen::LLT<MatrixXd> Hr_, S_;
  bool ok_ = false;
};

struct HsdResult {
  Status status = Status::Inaccurate;
  VectorXd x, y;
  double pcost = 0, dcost = 0, pres = 0, dres = 0, gap = 0;
  int iters = 0;
};

constexpr double kReducedAccuracy = 100.0;

HsdResult hsd_solve(const StdForm& f, const SolverOptions& opt) {
  const int nu = f.degree();
  const ConeVec h = cone_h(f);
  const double resx0 = std::max(1.0, f.c.norm());
  const double resy0 = std::max(1.0, f.b.norm());
  const double resz0 = std::max(1.0, norm(h));
  const double feastol = opt.tol, abstol = 10.0 * opt.tol, reltol = 10.0 * opt.tol;

  HsdResult out, best;
  double best_merit = std::numeric_limits<double>::infinity();
  const ConeVec e = identity_like(f);

  // starting point from two least-squares problems with W = I
  VectorXd x, y;
  ConeVec s, z;
  {
    Scaling W0 = identity_scaling(f);
    KKTSolver kkt(f, W0);
    if (!kkt.ok()) return out;
    ConeVec zz;
    kkt.solve(VectorXd::Zero(f.n), f.b, h, x, y, zz);
    s = scaled(zz, -1.0);
    VectorXd xd;
    kkt.solve(-f.c, VectorXd::Zero(f.b.size()), scaled(h, 0.0), xd, y, z);
    const double ap = -min_eig(s);
    if (ap >= -1e-8 * std::max(1.0, norm(s))) axpy(1.0 + std::max(ap, 0.0), e, s);
    const double ad = -min_eig(z);
    if (ad >= -1e-8 * std::max(1.0, norm(z))) axpy(1.0 + std::max(ad, 0.0), e, z);
  }
  double tau = 1.0, kappa = 1.0;

  for (int it = 0; it <= opt.max_iter; ++it) {
    out.iters = it;
    const VectorXd hrx = -(f.A.transpose() * y) - apply_Gt(f, z);
    const double hresx = hrx.norm();
    const VectorXd rx = -hrx + f.c * tau;  // A'y + G'z + c tau
    const double resx = rx.norm() / tau;
    const VectorXd hry = f.A * x;
    const double hresy = hry.norm();
    const VectorXd ry = hry - f.b * tau;
    const double resy = ry.norm() / tau;
    ConeVec hrz = apply_G(f, x);
    axpy(1.0, s, hrz);
    const double hresz = norm(hrz);
    ConeVec rz = hrz;
    axpy(-tau, h, rz);
    const double resz = norm(rz) / tau;
    const double cx = f.c.dot(x), by = f.b.dot(y), hz = dot(h, z);
    const double rt = kappa + cx + by + hz;
    const double gap = dot(s, z);
    const double mu = (gap + tau * kappa) / (nu + 1);
    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0)
      relgap = gap / (tau * tau) / -pcost;
    else if (dcost > 0.0)
      relgap = gap / (tau * tau) / dcost;
    const double pres = std::max(resy / resy0, resz / resz0);
    const double dres = resx / resx0;
    const double pinfres = (hz + by < 0.0) ? hresx / resx0 / (-hz - by) : std::numeric_limits<double>::infinity();
    const double dinfres = (cx < 0.0) ? std::max(hresy / resy0, hresz / resz0) / (-cx)
                                      : std::numeric_limits<double>::infinity();
    if (opt.verbose)
      std::fprintf(stderr, "%3d pcost % .8e dcost % .8e gap %.2e pres %.2e dres %.2e k/t %.2e\n", it, pcost, dcost,
                   gap / (tau * tau), pres, dres, kappa / tau);

    out.x = x / tau;
    out.y = y / tau;
    out.pcost = pcost;
    out.dcost = dcost;
    out.pres = pres;
    out.dres = dres;
    out.gap = gap / (tau * tau);
    // absolute gap criterion is relative to the objective scale
    const double gscale = std::max(1.0, std::min(std::abs(pcost), std::abs(dcost)));
    {
      const double merit = std::max({pres, dres, std::min(out.gap / gscale, relgap)});
      if (merit < best_merit) {
        best_merit = merit;
        best = out;
      } else if (best_merit <= kReducedAccuracy * feastol && merit > 1e3 * best_merit) {
        break;  // diverging from an acceptable point
      }
    }
    if (pres <= feastol && dres <= feastol &&
        (gap / (tau * tau) <= abstol * gscale || relgap <= reltol)) {
      out.status = Status::Optimal;
      return out;
    }
    if (pinfres <= feastol) {
      out.status = Status::Infeasible;
      out.y = y / (-hz - by);
      return out;
    }
    if (dinfres <= feastol) {
      out.status = Status::Unbounded;
      out.x = x / (-cx);
      return out;
    }
    if (it == opt.max_iter) break;

    Scaling W;
    if (!nt_scaling(s, z, W)) break;
    KKTSolver kkt(f, W);
    if (!kkt.ok()) break;
    const ConeVec lam = lambda_vec(W);
    const ConeVec lamsq = jordan(lam, lam);

    VectorXd x1, y1;
    ConeVec z1;
    kkt.solve(-f.c, f.b, h, x1, y1, z1);
    const ConeVec Wz1 = apply_W(W, z1);
    const double denom_base = -dot(Wz1, Wz1);

    ConeVec dsa, dza;
    double dtaua = 0.0, dkappaa = 0.0, alpha_aff = 0.0;
    VectorXd dx, dy;
    ConeVec dz, dsw;
    double dtau = 0.0, dkappa = 0.0, step = 0.0;
    bool fail = false;
    for (int pass = 0; pass < 2; ++pass) {
      double sigma = 0.0;
      ConeVec rc = scaled(lamsq, -1.0);
      double rtau = -tau * kappa;
      if (pass == 1) {
        sigma = std::pow(1.0 - alpha_aff, 3);
        axpy(-1.0, jordan(dsa, dza), rc);
        axpy(sigma * mu, e, rc);
        rtau += -dtaua * dkappaa + sigma * mu;
      }
      const double eta = 1.0 - sigma;
      const ConeVec dsz = jordan_div(W, rc);
      ConeVec bz = scaled(rz, -eta);
      axpy(-1.0, apply_Wt(W, dsz), bz);
      VectorXd x2, y2;
      ConeVec z2;
      kkt.solve(-eta * rx, -eta * ry, bz, x2, y2, z2);
      const double d4 = -eta * rt - rtau / tau;
      const double num = d4 - f.c.dot(x2) - f.b.dot(y2) - dot(h, z2);
      const double den = denom_base - kappa / tau;
      dtau = num / den;
      dx = x2 + dtau * x1;
      dy = y2 + dtau * y1;
      dz = z2;
      axpy(dtau, z1, dz);
      const ConeVec dzw = apply_W(W, dz);
      dsw = dsz;
      axpy(-1.0, dzw, dsw);
      dkappa = (rtau - kappa * dtau) / tau;
      double amax = std::min(max_step(W, dsw), max_step(W, dzw));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
      if (!std::isfinite(dtau)) {
        fail = true;
        break;
      }
      if (pass == 0) {
        alpha_aff = std::min(1.0, amax);
        dsa = dsw;
        dza = dzw;
        dtaua = dtau;
        dkappaa = dkappa;
      } else {
        step = std::min(1.0, 0.99 * amax);
      }
    }
    if (fail || step < 1e-12) break;
    x += step * dx;
    y += step * dy;
    axpy(step, dz, z);
    axpy(step, apply_Wt(W, dsw), s);
    tau += step * dtau;
    kappa += step * dkappa;
    // keep iterates symmetric
    for (auto& m : s.s) m = 0.5 * (m + m.transpose()).eval();
    for (auto& m : z.s) m = 0.5 * (m + m.transpose()).eval();
  }
  // stalled: report the best iterate
  best.iters = out.iters;
  best.status = Status::Inaccurate;
  return best;
}

// Pivoted Cholesky on a PSD matrix with unit diagonal (or zero diagonal
// entries). Returns the pivot set in elimination order.
std::vector<int> pivoted_rank(MatrixXd M, double tol) {
  const int n = static_cast<int>(M.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> piv;
  for (int k = 0; k < n; ++k) {
    int best = -1;
    double bv = tol;
    for (int i = k; i < n; ++i)
      if (M(perm[i], perm[i]) > bv) {
        bv = M(perm[i], perm[i]);
        best = i;
      }
    if (best < 0) break;
    std::swap(perm[k], perm[best]);
    const int p = perm[k];
    piv.push_back(p);
    const double d = std::sqrt(M(p, p));
    VectorXd col(n);
    for (int i = 0; i < n; ++i) col(i) = M(i, p) / d;
    for (int i = k + 1; i < n; ++i) {
      const int a = perm[i];
      for (int j = k + 1; j < n; ++j) {
        const int b2 = perm[j];
        M(a, b2) -= col(a) * col(b2);
      }
    }
    for (int i = 0; i < n; ++i) {
      M(p, i) = 0.0;
      M(i, p) = 0.0;
    }
  }
  return piv;
}

}  // namespace

SolveResult solve(const ConicProgram& prog, const SolverOptions& opts) {
  prog.validate();
  const int n = prog.nvars;
  SolveResult res;
  res.x = VectorXd::Zero(n);

  // full standard form; G = -F so that s = F(x)
  StdForm full;
  full.n = n;
  full.c = prog.objective;
  for (const auto& pb : prog.psd_blocks) {
    Block b;
    b.n = pb.dim();
    b.h = pb.constant() - opts.margin * MatrixXd::Identity(b.n, b.n);
    for (const auto& [v, m] : pb.coefficients()) {
      VarMat vm;
      vm.var = v;
      int nnz = 0;
      for (int j = 0; j < b.n; ++j)
        for (int i = 0; i <= j; ++i)
          if (m(i, j) != 0.0) ++nnz;
      if (nnz == 0) continue;
      vm.dense = nnz > b.n / 2;
      if (vm.dense) {
        vm.D = -m;
      } else {
        for (int j = 0; j < b.n; ++j)
          for (int i = 0; i <= j; ++i)
            if (m(i, j) != 0.0) vm.sp.emplace_back(i, j, -m(i, j));
      }
      b.vars.push_back(std::move(vm));
    }
    full.blocks.push_back(std::move(b));
  }
  const int nl = static_cast<int>(prog.lin_ineqs.size());
  full.Gl = MatrixXd::Zero(nl, n);
  full.hl = VectorXd::Zero(nl);
  for (int i = 0; i < nl; ++i) {
    full.hl(i) = prog.lin_ineqs[i].constant;
    for (const auto& [v, a] : prog.lin_ineqs[i].coeff) full.Gl(i, v) -= a;
  }
  const int ne = static_cast<int>(prog.lin_eqs.size());
  full.A = MatrixXd::Zero(ne, n);
  full.b = VectorXd::Zero(ne);
  for (int i = 0; i < ne; ++i) {
    full.b(i) = -prog.lin_eqs[i].constant;
    for (const auto& [v, a] : prog.lin_eqs[i].coeff) full.A(i, v) += a;
  }

  // column presolve: directions d with G d = 0 and A d = 0
  MatrixXd M0;
  {
    Scaling I = identity_scaling(full);
    MatrixXd H = MatrixXd::Zero(n, n);
    for (const auto& blk : full.blocks) {
      std::vector<VectorXd> cols;
      const int nb = blk.n;
      MatrixXd V(static_cast<Eigen::Index>(nb) * nb, blk.vars.size());
      for (size_t k = 0; k < blk.vars.size(); ++k) {
        MatrixXd D = MatrixXd::Zero(nb, nb);
        const auto& vm = blk.vars[k];
        if (vm.dense)
          D = vm.D;
        else
          for (const auto& [i, j, v] : vm.sp) {
            D(i, j) += v;
            if (i != j) D(j, i) += v;
          }
        V.col(k) = Eigen::Map<const VectorXd>(D.data(), static_cast<Eigen::Index>(nb) * nb);
      }
      const MatrixXd Hb = V.transpose() * V;
      for (size_t a = 0; a < blk.vars.size(); ++a)
        for (size_t c = 0; c < blk.vars.size(); ++c) H(blk.vars[a].var, blk.vars[c].var) += Hb(a, c);
    }
    H += full.Gl.transpose() * full.Gl + full.A.transpose() * full.A;
    M0 = H;
  }
  VectorXd dscale = M0.diagonal().cwiseMax(0.0).cwiseSqrt();
  MatrixXd Mn = M0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Mn(i, j) = (dscale(i) > 0 && dscale(j) > 0) ? M0(i, j) / (dscale(i) * dscale(j)) : 0.0;
  std::vector<int> piv = pivoted_rank(Mn, 1e-12);
  std::sort(piv.begin(), piv.end());
  std::vector<int> nonpiv;
  {
    std::vector<bool> isp(n, false);
    for (int p : piv) isp[p] = true;
    for (int i = 0; i < n; ++i)
      if (!isp[i]) nonpiv.push_back(i);
  }
  const int np = static_cast<int>(piv.size());
  bool free_direction = false;
  if (!nonpiv.empty()) {
    MatrixXd Mpp(np, np), Mpn(np, nonpiv.size());
    for (int a = 0; a < np; ++a) {
      for (int b2 = 0; b2 < np; ++b2) Mpp(a, b2) = Mn(piv[a], piv[b2]);
      for (size_t b2 = 0; b2 < nonpiv.size(); ++b2) Mpn(a, b2) = Mn(piv[a], nonpiv[b2]);
    }
    MatrixXd D = np > 0 ? MatrixXd(-Eigen::LDLT<MatrixXd>(Mpp).solve(Mpn)) : MatrixXd(0, nonpiv.size());
    const double cn = std::max(prog.objective.norm(), 1e-300);
    for (size_t j = 0; j < nonpiv.size(); ++j) {
      // direction in unscaled coordinates: x_i = d_i / dscale_i (zero-column vars have dscale 0)
      const int jj = nonpiv[j];
      double ctd, dn2;
      if (dscale(jj) == 0.0) {
        ctd = prog.objective(jj);
        dn2 = 1.0;
      } else {
        ctd = prog.objective(jj) / dscale(jj);
        dn2 = 1.0 / (dscale(jj) * dscale(jj));
        for (int a = 0; a < np; ++a) {
          ctd += prog.objective(piv[a]) * D(a, j) / dscale(piv[a]);
          dn2 += std::pow(D(a, j) / dscale(piv[a]), 2);
        }
      }
      if (prog.objective.norm() > 0 && std::abs(ctd) > 1e-9 * cn * std::sqrt(dn2)) free_direction = true;
    }
  }

  // reduced, column-scaled problem on pivot variables
  StdForm red;
  red.n = np;
  std::vector<int> newidx(n, -1);
  for (int a = 0; a < np; ++a) newidx[piv[a]] = a;
  red.c.resize(np);
  for (int a = 0; a < np; ++a) red.c(a) = prog.objective(piv[a]) / dscale(piv[a]);
  for (const auto& blk : full.blocks) {
    Block b;
    b.n = blk.n;
    b.h = blk.h;
    for (const auto& vm : blk.vars) {
      if (newidx[vm.var] < 0) continue;
      VarMat r = vm;
      const double sc = 1.0 / dscale(vm.var);
      r.var = newidx[vm.var];
      if (r.dense)
        r.D *= sc;
      else
        for (auto& t : r.sp) std::get<2>(t) *= sc;
      b.vars.push_back(std::move(r));
    }
    red.blocks.push_back(std::move(b));
  }
  red.Gl = MatrixXd::Zero(nl, np);
  red.hl = full.hl;
  MatrixXd Ared = MatrixXd::Zero(ne, np);
  for (int a = 0; a < np; ++a) {
    red.Gl.col(a) = full.Gl.col(piv[a]) / dscale(piv[a]);
    Ared.col(a) = full.A.col(piv[a]) / dscale(piv[a]);
  }
  // equality row presolve
  {
    VectorXd bred = full.b;
    for (int i = 0; i < ne; ++i) {
      const double rn = Ared.row(i).norm();
      if (rn > 0) {
        Ared.row(i) /= rn;
        bred(i) /= rn;
      }
    }
    std::vector<int> keep;
    if (ne > 0 && np > 0) {
      Eigen::ColPivHouseholderQR<MatrixXd> qr(Ared.transpose());
      qr.setThreshold(1e-10);
      const int rk = static_cast<int>(qr.rank());
      for (int i = 0; i < rk; ++i) keep.push_back(static_cast<int>(qr.colsPermutation().indices()(i)));
      std::sort(keep.begin(), keep.end());
    }
    red.A.resize(keep.size(), np);
    red.b.resize(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
      red.A.row(i) = Ared.row(keep[i]);
      red.b(i) = bred(keep[i]);
    }
    if (static_cast<int>(keep.size()) < ne) {
      VectorXd xls = VectorXd::Zero(np);
      if (!keep.empty()) xls = red.A.transpose() * (red.A * red.A.transpose()).ldlt().solve(red.b);
      const double viol = (Ared * xls - bred).norm();
      if (viol > 1e-8 * (1.0 + bred.norm())) {
        res.status = Status::Infeasible;
        res.primal_residual = viol;
        return res;
      }
    }
  }

  auto expand = [&](const VectorXd& xr) {
    VectorXd x = VectorXd::Zero(n);
    for (int a = 0; a < np; ++a) x(piv[a]) = xr(a) / dscale(piv[a]);
    return x;
  };

  if (red.degree() == 0) {
    // no cone constraints: x is pinned by the equalities (full column rank)
    VectorXd xr = VectorXd::Zero(np);
    if (np > 0 && red.A.rows() > 0) xr = red.A.colPivHouseholderQr().solve(red.b);
    res.x = expand(xr);
    res.status = free_direction ? Status::Unbounded : Status::Optimal;
    res.primal_objective = prog.objective.dot(res.x);
    res.dual_objective = res.primal_objective;
    return res;
  }

  // unit objective: status and argmin do not depend on the cost scale
  const double cnorm = red.c.norm();
  if (cnorm > 0.0) red.c /= cnorm;
  HsdResult h = hsd_solve(red, opts);
  if (cnorm > 0.0) {
    h.dcost *= cnorm;
    h.gap *= cnorm;
  }
  res.iterations = h.iters;
  res.primal_residual = h.pres;
  res.dual_residual = h.dres;
  res.gap = h.gap;
  res.x = expand(h.x);
  res.primal_objective = prog.objective.dot(res.x);
  res.dual_objective = h.dcost;
  res.status = h.status;
  if (free_direction && (h.status == Status::Optimal || h.status == Status::Unbounded)) res.status = Status::Unbounded;
  if (res.status == Status::Unbounded) {
    res.primal_objective = -std::numeric_limits<double>::infinity();
  }
  return res;
}

}  // namespace quadint
