#include "quadint/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace quadint {

using json = nlohmann::json;

CoefficientLayout::CoefficientLayout(std::vector<int> k, std::vector<int> l, int M)
    : k_(std::move(k)), l_(std::move(l)), M_(M) {
  const int q = static_cast<int>(k_.size());
  dk_off_.resize(q);
  bnd_off_.resize(q);
  psi_off_.resize(q);
  ext_off_.resize(q);
  for (int i = 0; i < q; ++i) {
    dk_off_[i] = dk_size_;
    dk_size_ += k_[i] + 1;
    bnd_off_[i] = bnd_size_;
    bnd_size_ += 2 * (l_[i] + 1);
    psi_off_[i] = psi_size_;
    psi_size_ += k_[i] + M_ + 1;
    ext_off_[i] = ext_size_;
    ext_size_ += 2 * (l_[i] - k_[i] + 1);
  }
}

std::vector<int> Problem::k() const {
  std::vector<int> r;
  for (const auto& v : vars) r.push_back(v.k);
  return r;
}

std::vector<int> Problem::l() const {
  std::vector<int> r;
  for (const auto& v : vars) r.push_back(v.l);
  return r;
}

int Problem::k_max() const {
  int m = 0;
  for (const auto& v : vars) m = std::max(m, v.k);
  return m;
}

int Problem::d_F() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, t.coeff.degree());
  return d;
}

namespace {

bool interior(const Factor& f) { return f.where == Where::Interior; }

}  // namespace

AffinePolyMatrix Problem::integrand_int() const {
  const CoefficientLayout L = layout();
  AffinePolyMatrix F(L.dk_size(), L.dk_size(), s());
  for (const auto& t : terms) {
    if (!interior(t.first) || !interior(t.second)) continue;
    const int i = L.dk_index(t.first.var, t.first.deriv), j = L.dk_index(t.second.var, t.second.deriv);
    F.add_symmetric(i, j, i == j ? t.coeff : t.coeff * 0.5);
  }
  return F;
}

AffinePolyMatrix Problem::integrand_mix() const {
  const CoefficientLayout L = layout();
  AffinePolyMatrix F(L.bnd_size(), L.dk_size(), s());
  for (const auto& t : terms) {
    if (interior(t.first) == interior(t.second)) continue;
    const Factor& fb = interior(t.first) ? t.second : t.first;
    const Factor& fi = interior(t.first) ? t.first : t.second;
    F(L.bnd_index(fb.var, fb.deriv, fb.where), L.dk_index(fi.var, fi.deriv)) += t.coeff;
  }
  return F;
}

AffinePolyMatrix Problem::integrand_bnd() const {
  const CoefficientLayout L = layout();
  AffinePolyMatrix F(L.bnd_size(), L.bnd_size(), s());
  for (const auto& t : terms) {
    if (interior(t.first) || interior(t.second)) continue;
    const int i = L.bnd_index(t.first.var, t.first.deriv, t.first.where);
    const int j = L.bnd_index(t.second.var, t.second.deriv, t.second.where);
    F.add_symmetric(i, j, i == j ? t.coeff : t.coeff * 0.5);
  }
  return F;
}

void Problem::validate() const {
  if (!(a < b)) throw InconsistencyError("domain must satisfy a < b");
  if (cost.size() != s()) throw InconsistencyError("cost length must equal the number of parameters");
  for (const auto& v : vars)
    if (v.k < 0 || v.k > v.l) throw InconsistencyError("variable " + v.name + ": need 0 <= k <= l");
  for (const auto& t : terms) {
    if (t.coeff.nparams() != s()) throw InconsistencyError("term coefficient has wrong parameter count");
    for (const Factor* f : {&t.first, &t.second}) {
      if (f->var < 0 || f->var >= q()) throw InconsistencyError("term references unknown variable");
      const int lim = f->where == Where::Interior ? vars[f->var].k : vars[f->var].l;
      if (f->deriv < 0 || f->deriv > lim)
        throw InconsistencyError("derivative order of " + vars[f->var].name + " exceeds its declared bound");
    }
  }
  if (bc_matrix.cols() != layout().bnd_size())
    throw InconsistencyError("BC column count must be 2(q+|l|)");
}

Eigen::MatrixXd reduce_bc_rows(const Eigen::MatrixXd& A) {
  if (A.rows() == 0) return A;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
  qr.setThreshold(1e-10);
  const int rk = static_cast<int>(qr.rank());
  std::vector<int> keep;
  for (int i = 0; i < rk; ++i) keep.push_back(static_cast<int>(qr.colsPermutation().indices()(i)));
  std::sort(keep.begin(), keep.end());
  Eigen::MatrixXd R(keep.size(), A.cols());
  for (size_t i = 0; i < keep.size(); ++i) R.row(i) = A.row(keep[i]);
  return R;
}

namespace {

// Coefficients polynomial from {"const": [...], "params": {...}} in monomials of the domain coordinate.
struct ParsedCoeff {
  std::vector<double> constant;
  std::map<int, std::vector<double>> params;
};

void add_into(std::vector<double>& dst, const std::vector<double>& src, double scale) {
  if (dst.size() < src.size()) dst.resize(src.size(), 0.0);
  for (size_t i = 0; i < src.size(); ++i) dst[i] += scale * src[i];
}

std::vector<double> read_monomials(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw SchemaError(where + ": expected array of monomial coefficients");
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number()) throw SchemaError(where + ": coefficients must be numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

const json& require(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(ctx + ": missing field '" + key + "'");
  return j.at(key);
}

Where parse_where(const std::string& s) {
  if (s == "interior") return Where::Interior;
  if (s == "boundary:-1") return Where::Minus;
  if (s == "boundary:+1" || s == "boundary:1") return Where::Plus;
  throw SchemaError("factor.where: unknown value '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char c) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, c)) out.push_back(item);
  return out;
}

}  // namespace

Problem parse_problem(const std::string& text, const std::map<std::string, double>& fixed) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("problem document must be an object");
  Problem p;

  const json& jv = require(doc, "variables", "problem");
  if (!jv.is_array()) throw SchemaError("variables must be an array");
  std::map<std::string, int> var_index;
  for (const auto& v : jv) {
    Variable var;
    const json& name = require(v, "name", "variable");
    if (!name.is_string()) throw SchemaError("variable.name must be a string");
    var.name = name.get<std::string>();
    const json& k = require(v, "k", "variable " + var.name);
    const json& l = require(v, "l", "variable " + var.name);
    if (!k.is_number_integer() || !l.is_number_integer()) throw SchemaError("variable k/l must be integers");
    var.k = k.get<int>();
    var.l = l.get<int>();
    if (var_index.count(var.name)) throw SchemaError("duplicate variable " + var.name);
    var_index[var.name] = static_cast<int>(p.vars.size());
    p.vars.push_back(var);
  }

  const json& jp = require(doc, "parameters", "problem");
  if (!jp.is_array()) throw SchemaError("parameters must be an array");
  std::vector<std::string> all_params;
  for (const auto& e : jp) {
    if (!e.is_string()) throw SchemaError("parameter names must be strings");
    all_params.push_back(e.get<std::string>());
  }
  for (const auto& [name, val] : fixed) {
    (void)val;
    if (std::find(all_params.begin(), all_params.end(), name) == all_params.end())
      throw SchemaError("fixed parameter '" + name + "' is not declared");
  }
  std::map<std::string, int> param_index;
  for (const auto& name : all_params)
    if (!fixed.count(name)) {
      param_index[name] = static_cast<int>(p.param_names.size());
      p.param_names.push_back(name);
    }

  const json& jc = require(doc, "cost", "problem");
  if (!jc.is_array() || jc.size() != all_params.size()) throw SchemaError("cost must have one entry per parameter");
  p.cost = Eigen::VectorXd::Zero(p.s());
  for (size_t i = 0; i < all_params.size(); ++i) {
    if (!jc[i].is_number()) throw SchemaError("cost entries must be numbers");
    auto it = param_index.find(all_params[i]);
    if (it != param_index.end()) p.cost(it->second) = jc[i].get<double>();
  }

  const json& jd = require(doc, "domain", "problem");
  if (!jd.is_array() || jd.size() != 2 || !jd[0].is_number() || !jd[1].is_number())
    throw SchemaError("domain must be [a, b]");
  p.a = jd[0].get<double>();
  p.b = jd[1].get<double>();

  auto lookup_var = [&](const json& f, const std::string& ctx) {
    const json& name = require(f, "var", ctx);
    if (!name.is_string() || !var_index.count(name.get<std::string>()))
      throw SchemaError(ctx + ": unknown variable");
    return var_index[name.get<std::string>()];
  };

  const json& jt = require(doc, "terms", "problem");
  if (!jt.is_array()) throw SchemaError("terms must be an array");
  for (size_t ti = 0; ti < jt.size(); ++ti) {
    const json& t = jt[ti];
    const std::string ctx = "term " + std::to_string(ti);
    const json& coeff = require(t, "coeff", ctx);
    if (!coeff.is_object()) throw SchemaError(ctx + ": coeff must be an object");
    ParsedCoeff pc;
    if (coeff.contains("const")) pc.constant = read_monomials(coeff.at("const"), ctx + ".const");
    if (coeff.contains("params")) {
      const json& prm = coeff.at("params");
      if (!prm.is_object()) throw SchemaError(ctx + ".params must be an object");
      for (const auto& [key, val] : prm.items()) {
        const std::vector<double> mono = read_monomials(val, ctx + ".params." + key);
        const std::vector<std::string> names = split(key, '*');
        if (names.empty() || names.size() > 2) throw SchemaError(ctx + ": bad parameter key '" + key + "'");
        double scale = 1.0;
        std::vector<int> free_idx;
        for (const auto& nm : names) {
          if (std::find(all_params.begin(), all_params.end(), nm) == all_params.end())
            throw SchemaError(ctx + ": unknown parameter '" + nm + "'");
          auto f = fixed.find(nm);
          if (f != fixed.end())
            scale *= f->second;
          else
            free_idx.push_back(param_index[nm]);
        }
        if (free_idx.size() > 1) throw SchemaError(ctx + ": term '" + key + "' is not affine in the parameters");
        if (free_idx.empty())
          add_into(pc.constant, mono, scale);
        else
          add_into(pc.params[free_idx[0]], mono, scale);
      }
    }
    Term term;
    term.coeff = AffinePoly(p.s());
    term.coeff.part(0) = legendre::project(pc.constant);
    for (const auto& [i, mono] : pc.params) term.coeff.part(i + 1) = legendre::project(mono);
    // monomials are in the domain coordinate y; store as Legendre series in y
    const json& fs = require(t, "factors", ctx);
    if (!fs.is_array() || fs.size() != 2) throw SchemaError(ctx + ": exactly two factors required");
    Factor f[2];
    for (int i = 0; i < 2; ++i) {
      f[i].var = lookup_var(fs[i], ctx);
      const json& d = require(fs[i], "deriv", ctx);
      if (!d.is_number_integer()) throw SchemaError(ctx + ": deriv must be an integer");
      f[i].deriv = d.get<int>();
      const json& w = require(fs[i], "where", ctx);
      if (!w.is_string()) throw SchemaError(ctx + ": where must be a string");
      f[i].where = parse_where(w.get<std::string>());
    }
    term.first = f[0];
    term.second = f[1];
    if (!term.coeff.is_zero()) p.terms.push_back(std::move(term));
  }

  const CoefficientLayout L = p.layout();
  const json& jb = require(doc, "bcs", "problem");
  if (!jb.is_array()) throw SchemaError("bcs must be an array");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(jb.size(), L.bnd_size());
  for (size_t r = 0; r < jb.size(); ++r) {
    if (!jb[r].is_object()) throw SchemaError("each BC must be an object");
    for (const auto& [key, val] : jb[r].items()) {
      const auto parts = split(key, ':');
      if (parts.size() != 3 || !var_index.count(parts[0])) throw SchemaError("bad BC key '" + key + "'");
      if (!val.is_number()) throw SchemaError("BC coefficients must be numbers");
      const int v = var_index[parts[0]];
      int d;
      try {
        d = std::stoi(parts[1]);
      } catch (...) {
        throw SchemaError("bad BC derivative in '" + key + "'");
      }
      Where end;
      if (parts[2] == "-1")
        end = Where::Minus;
      else if (parts[2] == "+1" || parts[2] == "1")
        end = Where::Plus;
      else
        throw SchemaError("bad BC endpoint in '" + key + "'");
      if (d < 0 || d > p.vars[v].l) throw InconsistencyError("BC '" + key + "' exceeds boundary order l");
      A(r, L.bnd_index(v, d, end)) += val.get<double>();
    }
  }
  p.bc_matrix = reduce_bc_rows(A);
  p.validate();
  return p;
}

Problem load_problem(const std::string& path, const std::map<std::string, double>& fixed) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open problem file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_problem(ss.str(), fixed);
}

Problem rescale_domain(const Problem& p) {
  if (p.on_reference_interval()) return p;
  Problem r = p;
  const double h = (p.b - p.a) / 2.0;  // dy = h dx, d/dy = (1/h) d/dx
  const double a = p.a, b = p.b;
  auto ymap = [a, b](double x) { return ((b - a) * x + a + b) / 2.0; };
  for (auto& t : r.terms) {
    const int d = t.coeff.degree();
    AffinePoly c = t.coeff.compose(ymap, std::max(d, 0));
    const int orders = (t.first.deriv) + (t.second.deriv);
    t.coeff = c * (h * std::pow(1.0 / h, orders));
  }
  const CoefficientLayout L = p.layout();
  for (int v = 0; v < p.q(); ++v)
    for (int al = 0; al <= p.vars[v].l; ++al)
      for (Where e : {Where::Minus, Where::Plus}) r.bc_matrix.col(L.bnd_index(v, al, e)) *= std::pow(1.0 / h, al);
  r.bc_matrix = reduce_bc_rows(r.bc_matrix);
  r.a = -1.0;
  r.b = 1.0;
  return r;
}

namespace {

// coefficient constant in x equal to c(end)
AffinePoly endpoint_value(const AffinePoly& c, double x) {
  AffinePoly r(c.nparams());
  for (int j = 0; j <= c.nparams(); ++j) {
    const double v = c.part(j)(x);
    if (v != 0.0) r.part(j) = LegendrePoly::constant(v);
  }
  return r;
}

}  // namespace

Problem integrate_by_parts(const Problem& p) {
  if (!p.on_reference_interval()) throw std::invalid_argument("integrate_by_parts: rescale the domain first");
  Problem r = p;
  r.terms.clear();
  std::vector<Term> work;
  for (const auto& t : p.terms) {
    if (interior(t.first) && interior(t.second))
      work.push_back(t);
    else
      r.terms.push_back(t);
  }
  auto push_boundary = [&](const AffinePoly& f, const Factor& x, const Factor& y, double scale) {
    // scale * [f X Y] at +1 minus at -1, written as boundary-boundary terms
    for (Where e : {Where::Plus, Where::Minus}) {
      Factor bx = x, by = y;
      bx.where = e;
      by.where = e;
      for (const Factor* fb : {&bx, &by})
        if (fb->deriv > p.vars[fb->var].l)
          throw ReductionError("integration by parts needs d^" + std::to_string(fb->deriv) + " " +
                               p.vars[fb->var].name + " on the boundary, above its boundary order l");
      const double sgn = e == Where::Plus ? 1.0 : -1.0;
      AffinePoly c = endpoint_value(f, e == Where::Plus ? 1.0 : -1.0) * (0.5 * sgn * scale);
      if (!c.is_zero()) r.terms.push_back(Term{c, bx, by});
    }
  };
  while (!work.empty()) {
    Term t = work.back();
    work.pop_back();
    if (t.coeff.is_zero()) continue;
    Factor lo = t.first, hi = t.second;
    if (lo.deriv > hi.deriv) std::swap(lo, hi);
    const int diff = hi.deriv - lo.deriv;
    if (diff >= 2) {
      // int f X d^b Y = [f X d^{b-1} Y] - int f' X d^{b-1} Y - int f dX d^{b-1} Y
      Factor hm = hi;
      hm.deriv -= 1;
      push_boundary(t.coeff, lo, hm, 1.0);
      const AffinePoly fp = t.coeff.derivative();
      if (!fp.is_zero()) work.push_back(Term{fp * -1.0, lo, hm});
      Factor lp = lo;
      lp.deriv += 1;
      work.push_back(Term{t.coeff * -1.0, lp, hm});
    } else if (diff == 1 && lo.var == hi.var) {
      // int f X X' = [f X^2 / 2] - int f'/2 X^2
      push_boundary(t.coeff, lo, lo, 0.5);
      const AffinePoly fp = t.coeff.derivative();
      if (!fp.is_zero()) work.push_back(Term{fp * -0.5, lo, lo});
    } else {
      r.terms.push_back(t);
    }
  }
  // highest interior order actually used
  for (auto& v : r.vars) v.k = 0;
  for (const auto& t : r.terms)
    for (const Factor* f : {&t.first, &t.second})
      if (f->where == Where::Interior) r.vars[f->var].k = std::max(r.vars[f->var].k, f->deriv);
  // terms are stored on the original boundary layout, which does not depend on k
  r.validate();
  return r;
}

Problem prepare(const Problem& p) { return integrate_by_parts(rescale_domain(p)); }

AffinePolyMatrix highest_derivative_block(const Problem& p) {
  const CoefficientLayout L = p.layout();
  const AffinePolyMatrix F = p.integrand_int();
  AffinePolyMatrix S(p.q(), p.q(), p.s());
  for (int i = 0; i < p.q(); ++i)
    for (int j = 0; j < p.q(); ++j) S(i, j) = F(L.dk_index(i, p.vars[i].k), L.dk_index(j, p.vars[j].k));
  return S;
}

double evaluate_functional(const Problem& p, const std::vector<LegendrePoly>& w, const Eigen::VectorXd& gamma) {
  if (static_cast<int>(w.size()) != p.q()) throw std::invalid_argument("evaluate_functional: wrong number of functions");
  int maxdeg = 0;
  for (const auto& wi : w) maxdeg = std::max(maxdeg, wi.degree());
  const int npts = (2 * maxdeg + p.d_F() + 2) / 2 + 1;
  const legendre::GaussRule g = legendre::gauss_rule(npts);
  const double h = (p.b - p.a) / 2.0;
  // derivative tables
  int lmax = 0;
  for (const auto& v : p.vars) lmax = std::max({lmax, v.k, v.l});
  std::vector<std::vector<LegendrePoly>> der(p.q());
  for (int i = 0; i < p.q(); ++i) {
    der[i].push_back(w[i]);
    for (int d = 1; d <= lmax; ++d) der[i].push_back(der[i].back().derivative());
  }
  auto value = [&](const Factor& f, double y) {
    const double at = f.where == Where::Interior ? y : (f.where == Where::Minus ? p.a : p.b);
    return der[f.var][f.deriv](at);
  };
  double total = 0.0;
  for (size_t qn = 0; qn < g.nodes.size(); ++qn) {
    const double y = p.a + h * (g.nodes[qn] + 1.0);
    double s = 0.0;
    for (const auto& t : p.terms) s += t.coeff(y, gamma) * value(t.first, y) * value(t.second, y);
    total += g.weights[qn] * h * s;
  }
  return total;
}

}  // namespace quadint
