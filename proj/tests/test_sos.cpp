#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "quadint/sos.hpp"

using namespace quadint;

namespace {

LinearForm constant(double v) {
  LinearForm f;
  f.constant = v;
  return f;
}

LinearForm variable(int var, double a = 1.0, double c = 0.0) {
  LinearForm f;
  f.constant = c;
  f.add(var, a);
  return f;
}

// Entry (i,j) from monomial coefficients.
void set_mono(PolyMatrixForm& P, int i, int j, const oracle::Mono& m, const LinearForm& scale_by = constant(1.0)) {
  const auto c = oracle::legendre_coeffs(m);
  for (size_t n = 0; n < c.size(); ++n) {
    if (c[n] == 0.0) continue;
    LinearForm f = scale_by;
    f.constant *= c[n];
    for (auto& [v, a] : f.coeff) a *= c[n];
    P.add_symmetric(i, j, static_cast<int>(n), f);
  }
}

Status feasibility(const ConicProgram& prog) { return solve(prog).status; }

double basis_form(const SosConstraint& s, const Eigen::MatrixXd& G, double x, const Eigen::VectorXd& z) {
  Eigen::VectorXd b(s.basis.size());
  for (size_t i = 0; i < s.basis.size(); ++i) b(i) = z(s.basis[i].first) * legendre::eval(s.basis[i].second, x);
  return b.dot(G * b);
}

}  // namespace

TEST(Sos, SquareOfZ) {
  ConicProgram prog;
  PolyMatrixForm P(1);
  P.add_symmetric(0, 0, 0, constant(1.0));
  const SosConstraint s = gram_parameterize(prog, P, 0);
  EXPECT_EQ(s.basis.size(), 1u);
  EXPECT_EQ(prog.psd_blocks[s.gram_block].dim(), 1);
  const SolveResult r = solve(prog);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(s.gram(r.x)(0, 0), 1.0, 1e-9);
}

TEST(Sos, XSquaredZSquared) {
  ConicProgram prog;
  PolyMatrixForm P(1);
  set_mono(P, 0, 0, {0, 0, 1});
  // x^2 = (L_0 + 2 L_2) / 3
  EXPECT_NEAR(P(0, 0).coeff(0).constant, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(P(0, 0).coeff(2).constant, 2.0 / 3.0, 1e-15);
  const SosConstraint s = gram_parameterize(prog, P, 2);
  EXPECT_EQ(s.half_degree, 1);
  EXPECT_EQ(s.basis.size(), 2u);
  const SolveResult r = solve(prog);
  ASSERT_EQ(r.status, Status::Optimal);
  // unique Gram: (L_1 z)^2
  const Eigen::MatrixXd G = s.gram(r.x);
  EXPECT_NEAR(G(0, 0), 0.0, 1e-7);
  EXPECT_NEAR(G(1, 1), 1.0, 1e-7);
  EXPECT_NEAR(G(0, 1), 0.0, 1e-7);
}

TEST(Sos, NegativeSquareInfeasible) {
  ConicProgram prog;
  PolyMatrixForm P(1);
  P.add_symmetric(0, 0, 0, constant(-1.0));
  gram_parameterize(prog, P, 0);
  EXPECT_EQ(feasibility(prog), Status::Infeasible);
}

TEST(Sos, ParityAndDegreeErrors) {
  ConicProgram prog;
  PolyMatrixForm P(1);
  set_mono(P, 0, 0, {0, 0, 1});
  EXPECT_THROW(gram_parameterize(prog, P, 3), DegreeParityError);
  EXPECT_THROW(gram_parameterize(prog, P, 0), DegreeParityError);
}

TEST(Sos, EqualityCompleteness) {
  for (int q : {1, 2, 3})
    for (int d : {0, 2, 4}) {
      ConicProgram prog;
      PolyMatrixForm P(q);
      for (int i = 0; i < q; ++i) P.add_symmetric(i, i, 0, constant(1.0));
      const SosConstraint s = gram_parameterize(prog, P, d);
      EXPECT_EQ(static_cast<int>(s.basis.size()), q * (d / 2 + 1));
      EXPECT_EQ(prog.psd_blocks[s.gram_block].dim(), static_cast<int>(s.basis.size()));
      EXPECT_EQ(s.num_eqs, q * (q + 1) / 2 * (d + 1));
      EXPECT_EQ(static_cast<int>(prog.lin_eqs.size()), s.num_eqs);
    }
}

TEST(Sos, GramReconstructsPolynomial) {
  // P(x) = A(x) A(x)^T + (1 + x^2) I, with A linear: SOS by construction
  std::mt19937 rng(5);
  for (int t = 0; t < 4; ++t) {
    const int q = 2 + t % 2;
    std::vector<std::vector<oracle::Mono>> A(q, std::vector<oracle::Mono>(q));
    for (auto& row : A)
      for (auto& e : row) e = oracle::random_poly(rng, 1);
    PolyMatrixForm P(q);
    std::vector<std::vector<oracle::Mono>> ent(q, std::vector<oracle::Mono>(q));
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j) {
        oracle::Mono m;
        for (int l = 0; l < q; ++l) m = oracle::add(m, oracle::mul(A[i][l], A[j][l]));
        if (i == j) m = oracle::add(m, {1, 0, 1});
        set_mono(P, i, j, m);
        ent[i][j] = ent[j][i] = m;
      }
    ConicProgram prog;
    const SosConstraint s = gram_parameterize(prog, P, 2);
    const SolveResult r = solve(prog);
    ASSERT_EQ(r.status, Status::Optimal);
    const Eigen::MatrixXd G = s.gram(r.x);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().minCoeff(), -1e-8);
    std::normal_distribution<double> g;
    for (int k = 0; k < 20; ++k) {
      const double x = std::uniform_real_distribution<double>(-1, 1)(rng);
      Eigen::VectorXd z(q);
      for (int i = 0; i < q; ++i) z(i) = g(rng);
      double ref = 0.0;
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) ref += z(i) * z(j) * oracle::eval(ent[i][j], x);
      EXPECT_NEAR(basis_form(s, G, x, z), ref, 1e-7 * std::max(1.0, std::abs(ref)));
      EXPECT_NEAR(z.dot(P.evaluate(x, r.x) * z), ref, 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(SProcedure, ConstantPsdFeasible) {
  ConicProgram prog;
  PolyMatrixForm S(2);
  S.add_symmetric(0, 0, 0, constant(2.0));
  S.add_symmetric(0, 1, 0, constant(1.0));
  S.add_symmetric(1, 1, 0, constant(1.0));
  const SProcedure sp = s_procedure_interval(prog, S, 2);
  EXPECT_EQ(sp.degT, 2);
  EXPECT_EQ(feasibility(prog), Status::Optimal);
}

TEST(SProcedure, SignIndefiniteInfeasible) {
  for (int degT : {0, 2, 4}) {
    ConicProgram prog;
    PolyMatrixForm S(2);
    S.add_symmetric(0, 0, 1, constant(1.0));
    S.add_symmetric(1, 1, 1, constant(1.0));
    s_procedure_interval(prog, S, degT);
    EXPECT_EQ(feasibility(prog), Status::Infeasible) << degT;
  }
}

TEST(SProcedure, NonnegativeOnIntervalOnly) {
  // (1 - x^2) I is not globally nonnegative but is on [-1, 1]
  ConicProgram free_prog;
  PolyMatrixForm S(2);
  set_mono(S, 0, 0, {1, 0, -1});
  set_mono(S, 1, 1, {1, 0, -1});
  gram_parameterize(free_prog, S, 2);
  EXPECT_EQ(feasibility(free_prog), Status::Infeasible);
  ConicProgram prog;
  const SProcedure sp = s_procedure_interval(prog, S, 0);
  const SolveResult r = solve(prog);
  ASSERT_EQ(r.status, Status::Optimal);
  // T = I is the only choice with degT = 0, leaving p1 = 0
  const Eigen::MatrixXd T = sp.T.evaluate(0.3, r.x);
  EXPECT_NEAR(T(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(T(1, 1), 1.0, 1e-6);
  EXPECT_NEAR(T(0, 1), 0.0, 1e-6);
}

TEST(SProcedure, SoundnessSampling) {
  // maximise g with [[1, g x], [g x, 1 - x^2/2]] >= 0 on [-1, 1]
  std::mt19937 rng(3);
  for (int degT : {0, 2, 4}) {
    ConicProgram prog;
    const int g = prog.add_variables(1, "g");
    prog.objective(g) = -1.0;
    PolyMatrixForm S(2);
    S.add_symmetric(0, 0, 0, constant(1.0));
    S.add_symmetric(0, 1, 1, variable(g));
    set_mono(S, 1, 1, {1, 0, -0.5});
    s_procedure_interval(prog, S, degT);
    const SolveResult r = solve(prog);
    ASSERT_EQ(r.status, Status::Optimal) << degT;
    EXPECT_GT(r.x(g), 0.5);
    std::normal_distribution<double> nd;
    double worst = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double x = -1.0 + 2.0 * i / 199.0;
      const Eigen::MatrixXd Sx = S.evaluate(x, r.x);
      for (int k = 0; k < 5; ++k) {
        Eigen::Vector2d z(nd(rng), nd(rng));
        z.normalize();
        worst = std::min(worst, z.dot(Sx * z));
      }
    }
    EXPECT_GE(worst, -1e-7) << degT;
    // exact supremum: 1 - x^2/2 - g^2 x^2 >= 0 at x = 1 gives g <= 1/sqrt 2
    EXPECT_LE(r.x(g), 1.0 / std::sqrt(2.0) + 1e-6);
  }
}
