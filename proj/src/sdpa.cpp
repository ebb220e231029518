#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "quadint/sdp.hpp"

namespace quadint {

EqualityElimination eliminate_equalities(const ConicProgram& prog) {
  prog.validate();
  const int n = prog.nvars;
  EqualityElimination out;
  const int ne = static_cast<int>(prog.lin_eqs.size());
  if (ne == 0) {
    out.reduced = prog;
    out.x0 = Eigen::VectorXd::Zero(n);
    out.basis = Eigen::MatrixXd::Identity(n, n);
    return out;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ne, n);
  Eigen::VectorXd b(ne);
  for (int i = 0; i < ne; ++i) {
    b(i) = -prog.lin_eqs[i].constant;
    for (const auto& [v, a] : prog.lin_eqs[i].coeff) A(i, v) += a;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-12);
  out.x0 = lu.solve(b);
  if ((A * out.x0 - b).norm() > 1e-9 * (1.0 + b.norm()))
    throw std::runtime_error("eliminate_equalities: inconsistent equality constraints");
  if (lu.rank() < n)
    out.basis = lu.kernel();
  else
    out.basis = Eigen::MatrixXd::Zero(n, 0);
  const Eigen::MatrixXd& N = out.basis;
  const int m = static_cast<int>(N.cols());
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i)
      if (std::abs(N(i, j)) < 1e-15) out.basis(i, j) = 0.0;

  ConicProgram& r = out.reduced;
  r.add_variables(m, "z");
  r.objective = N.transpose() * prog.objective;
  r.objective_offset = prog.objective_offset + prog.objective.dot(out.x0);
  for (const auto& blk : prog.psd_blocks) {
    SymAffineMatrix nb(blk.dim());
    nb.add_constant(blk.evaluate(out.x0));
    for (int j = 0; j < m; ++j) {
      Eigen::MatrixXd C = Eigen::MatrixXd::Zero(blk.dim(), blk.dim());
      for (const auto& [v, M] : blk.coefficients())
        if (N(v, j) != 0.0) C += N(v, j) * M;
      nb.add(j, C);
    }
    r.psd_blocks.push_back(std::move(nb));
  }
  for (const auto& f : prog.lin_ineqs) {
    LinearForm g;
    g.constant = f.evaluate(out.x0);
    for (int j = 0; j < m; ++j) {
      double a = 0.0;
      for (const auto& [v, c] : f.coeff) a += c * N(v, j);
      g.add(j, a);
    }
    r.lin_ineqs.push_back(std::move(g));
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEna") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string to_sdpa(const ConicProgram& input) {
  const EqualityElimination el = eliminate_equalities(input);
  const ConicProgram& p = el.reduced;
  std::ostringstream os;
  if (p.objective_offset != 0.0) os << "* objective offset " << fmt(p.objective_offset) << "\n";
  const int nb = static_cast<int>(p.psd_blocks.size()) + (p.lin_ineqs.empty() ? 0 : 1);
  os << p.nvars << "\n" << nb << "\n";
  for (size_t b = 0; b < p.psd_blocks.size(); ++b) os << (b ? " " : "") << p.psd_blocks[b].dim();
  if (!p.lin_ineqs.empty()) os << (p.psd_blocks.empty() ? "" : " ") << -static_cast<int>(p.lin_ineqs.size());
  os << "\n";
  for (int i = 0; i < p.nvars; ++i) os << (i ? " " : "") << fmt(p.objective(i));
  os << "\n";
  auto write_mat = [&](int matno, int blk, const Eigen::MatrixXd& M, double sign) {
    for (int i = 0; i < M.rows(); ++i)
      for (int j = i; j < M.cols(); ++j)
        if (M(i, j) != 0.0)
          os << matno << " " << blk << " " << i + 1 << " " << j + 1 << " " << fmt(sign * M(i, j)) << "\n";
  };
  const int lpblk = static_cast<int>(p.psd_blocks.size()) + 1;
  for (int matno = 0; matno <= p.nvars; ++matno) {
    for (size_t b = 0; b < p.psd_blocks.size(); ++b) {
      const auto& blk = p.psd_blocks[b];
      if (matno == 0) {
        write_mat(0, static_cast<int>(b) + 1, blk.constant(), -1.0);
      } else {
        auto it = blk.coefficients().find(matno - 1);
        if (it != blk.coefficients().end()) write_mat(matno, static_cast<int>(b) + 1, it->second, 1.0);
      }
    }
    for (size_t i = 0; i < p.lin_ineqs.size(); ++i) {
      double v;
      if (matno == 0) {
        v = -p.lin_ineqs[i].constant;
      } else {
        auto it = p.lin_ineqs[i].coeff.find(matno - 1);
        v = it == p.lin_ineqs[i].coeff.end() ? 0.0 : it->second;
      }
      if (v != 0.0) os << matno << " " << lpblk << " " << i + 1 << " " << i + 1 << " " << fmt(v) << "\n";
    }
  }
  return os.str();
}

void export_sdpa(const ConicProgram& prog, const std::string& path) {
  const std::string text = to_sdpa(prog);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_sdpa: cannot open " + path);
  f << text;
  if (!f) throw std::runtime_error("export_sdpa: write failed for " + path);
}

ConicProgram from_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> body;
  double offset = 0.0;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '*' || line[first] == '"') {
      std::istringstream c(line.substr(first + 1));
      std::string w1, w2;
      double v;
      if (c >> w1 >> w2 >> v && w1 == "objective" && w2 == "offset") offset = v;
      continue;
    }
    for (char& ch : line)
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    body.push_back(line);
  }
  if (body.size() < 4) throw std::runtime_error("from_sdpa: truncated header");
  ConicProgram p;
  p.objective_offset = offset;
  int m = 0, nb = 0;
  if (!(std::istringstream(body[0]) >> m) || !(std::istringstream(body[1]) >> nb) || m < 0 || nb < 0)
    throw std::runtime_error("from_sdpa: bad header");
  p.add_variables(m);
  std::vector<int> sizes(nb);
  {
    std::istringstream s(body[2]);
    for (int& z : sizes)
      if (!(s >> z) || z == 0) throw std::runtime_error("from_sdpa: bad block sizes");
  }
  {
    std::istringstream s(body[3]);
    for (int i = 0; i < m; ++i)
      if (!(s >> p.objective(i))) throw std::runtime_error("from_sdpa: bad objective");
  }
  // block b -> psd index or (for diagonal blocks) first inequality index
  std::vector<int> where(nb);
  for (int b = 0; b < nb; ++b) {
    if (sizes[b] > 0) {
      where[b] = static_cast<int>(p.psd_blocks.size());
      p.psd_blocks.emplace_back(sizes[b]);
    } else {
      where[b] = static_cast<int>(p.lin_ineqs.size());
      p.lin_ineqs.resize(p.lin_ineqs.size() - sizes[b]);
    }
  }
  for (size_t li = 4; li < body.size(); ++li) {
    std::istringstream s(body[li]);
    int matno, blk, i, j;
    double v;
    if (!(s >> matno >> blk >> i >> j >> v)) throw std::runtime_error("from_sdpa: bad entry: " + body[li]);
    if (matno < 0 || matno > m || blk < 1 || blk > nb) throw std::runtime_error("from_sdpa: entry out of range");
    const int b = blk - 1, dim = std::abs(sizes[b]);
    if (i < 1 || j < 1 || i > dim || j > dim) throw std::runtime_error("from_sdpa: index out of range");
    if (sizes[b] > 0) {
      auto& M = p.psd_blocks[where[b]];
      if (matno == 0)
        M.add_constant(i - 1, j - 1, -v);
      else
        M.add(matno - 1, i - 1, j - 1, v);
    } else {
      if (i != j) throw std::runtime_error("from_sdpa: off-diagonal entry in diagonal block");
      auto& f = p.lin_ineqs[where[b] + i - 1];
      if (matno == 0)
        f.constant -= v;
      else
        f.add(matno - 1, v);
    }
  }
  return p;
}

ConicProgram import_sdpa(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("import_sdpa: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_sdpa(ss.str());
}

}  // namespace quadint
