#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "quadint/model.hpp"

using namespace quadint;

namespace {

std::string data(const std::string& name) { return std::string(QUADINT_DATA_DIR) + "/" + name; }

LegendrePoly from_mono(const oracle::Mono& m) { return LegendrePoly(oracle::legendre_coeffs(m)); }

std::vector<LegendrePoly> random_w(std::mt19937& rng, int q, int deg) {
  std::vector<LegendrePoly> w;
  for (int i = 0; i < q; ++i) w.push_back(from_mono(oracle::random_poly(rng, deg)));
  return w;
}

Eigen::VectorXd random_gamma(std::mt19937& rng, int s) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::VectorXd g(s);
  for (int i = 0; i < s; ++i) g(i) = u(rng);
  return g;
}

const char* kSingle = R"({
  "variables": [{"name": "u", "k": 1, "l": 1}],
  "parameters": [], "cost": [], "domain": [0.0, 1.0],
  "terms": [%TERMS%],
  "bcs": []
})";

std::string single(const std::string& terms) {
  std::string s = kSingle;
  s.replace(s.find("%TERMS%"), 7, terms);
  return s;
}

}  // namespace

TEST(Model, ParseShearFlow) {
  const Problem p = load_problem(data("shear_xi3.json"));
  EXPECT_EQ(p.q(), 2);
  EXPECT_EQ(p.k(), (std::vector<int>{2, 2}));
  EXPECT_EQ(p.l(), (std::vector<int>{2, 2}));
  EXPECT_EQ(p.s(), 1);
  EXPECT_EQ(p.p(), 8);
  EXPECT_EQ(p.bc_matrix.cols(), 2 * (2 + 4));
  EXPECT_TRUE(p.integrand_int().is_symmetric());
  // u'' u'' carries 16/xi^2
  const AffinePolyMatrix F = p.integrand_int();
  EXPECT_NEAR(F(2, 2).part(0).coeff(0), 16.0 / 9.0, 1e-15);
  EXPECT_NEAR(F(0, 0).part(0).coeff(0), 9.0, 1e-15);
}

TEST(Model, EmptyIntegrandNoBcs) {
  const Problem p = parse_problem(R"({"variables": [{"name": "u", "k": 1, "l": 1}], "parameters": [],
    "cost": [], "domain": [-1, 1], "terms": [], "bcs": []})");
  EXPECT_EQ(p.p(), 0);
  EXPECT_TRUE(p.integrand_int().is_zero());
  EXPECT_LE(p.d_F(), 0);
}

TEST(Model, InconsistentOrders) {
  EXPECT_THROW(parse_problem(R"({"variables": [{"name": "u", "k": 3, "l": 2}], "parameters": [],
    "cost": [], "domain": [-1, 1], "terms": [], "bcs": []})"),
               InconsistencyError);
}

TEST(Model, SchemaErrors) {
  EXPECT_THROW(parse_problem("{"), SchemaError);
  EXPECT_THROW(parse_problem(R"({"variables": [], "parameters": [], "cost": [], "terms": [], "bcs": []})"),
               SchemaError);
  EXPECT_THROW(parse_problem(R"({"variables": [{"name": "u", "k": 1, "l": 1}], "parameters": ["g"],
    "cost": [1], "domain": [-1, 1], "terms": [{"coeff": {"params": {"h": [1]}},
    "factors": [{"var": "u", "deriv": 0, "where": "interior"}, {"var": "u", "deriv": 0, "where": "interior"}]}], "bcs": []})"),
               SchemaError);
  EXPECT_THROW(parse_problem(R"({"variables": [{"name": "u", "k": 1, "l": 1}], "parameters": [],
    "cost": [], "domain": [1, -1], "terms": [], "bcs": []})"),
               InconsistencyError);
}

TEST(Model, FixedParametersAndProducts) {
  const std::string doc = R"({"variables": [{"name": "u", "k": 1, "l": 1}], "parameters": ["a", "b"],
    "cost": [1, 2], "domain": [-1, 1], "terms": [{"coeff": {"params": {"a*b": [0, 3]}},
    "factors": [{"var": "u", "deriv": 1, "where": "interior"}, {"var": "u", "deriv": 1, "where": "interior"}]}], "bcs": []})";
  EXPECT_THROW(parse_problem(doc), SchemaError);  // bilinear
  const Problem p = parse_problem(doc, {{"a", 2.0}});
  ASSERT_EQ(p.s(), 1);
  EXPECT_EQ(p.param_names[0], "b");
  EXPECT_DOUBLE_EQ(p.cost(0), 2.0);
  EXPECT_NEAR(p.terms[0].coeff.part(1).coeff(1), 6.0, 1e-15);
  EXPECT_THROW(parse_problem(doc, {{"zzz", 1.0}}), SchemaError);
}

TEST(Model, BcRowReduction) {
  Eigen::MatrixXd A(3, 4);
  A << 1, 0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0;
  const Eigen::MatrixXd R = reduce_bc_rows(A);
  EXPECT_EQ(R.rows(), 2);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
  EXPECT_EQ(lu.rank(), 2);
  const Problem p = parse_problem(R"({"variables": [{"name": "u", "k": 1, "l": 1}], "parameters": [],
    "cost": [], "domain": [-1, 1], "terms": [],
    "bcs": [{"u:0:-1": 1}, {"u:0:-1": 2}, {"u:0:+1": 1, "u:0:-1": 1}]})");
  EXPECT_EQ(p.p(), 2);
}

TEST(Model, LayoutSizes) {
  const CoefficientLayout L({2, 1, 0}, {2, 3, 1}, 7);
  EXPECT_EQ(L.psi_size(), (2 + 8) + (1 + 8) + (0 + 8));
  EXPECT_EQ(L.dk_size(), 3 + 2 + 1);
  EXPECT_EQ(L.bnd_size(), 2 * (3 + 4 + 2));
  const CoefficientLayout L2({2, 1, 0}, {2, 3, 1}, 7);
  EXPECT_EQ(L.psi_coef(1, 3), L2.psi_coef(1, 3));
  EXPECT_EQ(L.psi_coef(2, 0), L.psi_block(2));
}

TEST(Model, RescaleIdentityOnReferenceInterval) {
  const Problem p = load_problem(data("toy.json"));
  const Problem r = rescale_domain(p);
  ASSERT_EQ(r.terms.size(), p.terms.size());
  for (size_t t = 0; t < p.terms.size(); ++t)
    for (int j = 0; j <= p.s(); ++j) EXPECT_EQ(r.terms[t].coeff.part(j), p.terms[t].coeff.part(j));
}

TEST(Model, RescaleExamples) {
  const Problem d1 = rescale_domain(parse_problem(
      single(R"({"coeff": {"const": [1]}, "factors": [{"var": "u", "deriv": 1, "where": "interior"}, {"var": "u", "deriv": 1, "where": "interior"}]})")));
  EXPECT_TRUE(d1.on_reference_interval());
  EXPECT_NEAR(d1.terms[0].coeff.part(0).coeff(0), 2.0, 1e-15);
  const Problem d0 = rescale_domain(parse_problem(
      single(R"({"coeff": {"const": [1]}, "factors": [{"var": "u", "deriv": 0, "where": "interior"}, {"var": "u", "deriv": 0, "where": "interior"}]})")));
  EXPECT_NEAR(d0.terms[0].coeff.part(0).coeff(0), 0.5, 1e-15);
  // idempotent
  const Problem again = rescale_domain(d1);
  EXPECT_EQ(again.terms[0].coeff.part(0), d1.terms[0].coeff.part(0));
}

TEST(Model, RescaleChangeOfVariablesOracle) {
  // int_a^b [x^2 (u')^2 + 3 u u' + u(b) u'(a)] dx on [0.5, 3]; boundary factors sit under the integral
  const std::string doc = R"({"variables": [{"name": "u", "k": 1, "l": 1}], "parameters": [], "cost": [],
    "domain": [0.5, 3.0], "terms": [
      {"coeff": {"const": [0, 0, 1]}, "factors": [{"var": "u", "deriv": 1, "where": "interior"}, {"var": "u", "deriv": 1, "where": "interior"}]},
      {"coeff": {"const": [3]}, "factors": [{"var": "u", "deriv": 0, "where": "interior"}, {"var": "u", "deriv": 1, "where": "interior"}]},
      {"coeff": {"const": [1]}, "factors": [{"var": "u", "deriv": 0, "where": "boundary:+1"},
                                           {"var": "u", "deriv": 1, "where": "boundary:-1"}]}],
    "bcs": []})";
  const Problem p = parse_problem(doc);
  const Problem r = rescale_domain(p);
  std::mt19937 rng(5);
  const double a = 0.5, b = 3.0;
  for (int t = 0; t < 20; ++t) {
    const auto u = oracle::random_poly(rng, 6);
    const auto du = oracle::deriv(u);
    const double ref = oracle::integrate(oracle::mul(oracle::mul({0, 0, 1}, du), du), a, b) +
                       3.0 * oracle::integrate(oracle::mul(u, du), a, b) +
                       (b - a) * oracle::eval(u, b) * oracle::eval(du, a);
    // u on (-1,1): x -> y = ((b-a) x + a + b) / 2
    const LegendrePoly ux = from_mono(oracle::affine_compose(u, (b - a) / 2, (a + b) / 2));
    const double got = evaluate_functional(r, {ux}, Eigen::VectorXd(0));
    EXPECT_NEAR(got, ref, 1e-9 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Model, IntegrateByPartsExamples) {
  // int u u'' -> [u u'] - int (u')^2
  const Problem p = parse_problem(R"({"variables": [{"name": "u", "k": 2, "l": 2}], "parameters": [],
    "cost": [], "domain": [-1, 1], "terms": [{"coeff": {"const": [1]},
    "factors": [{"var": "u", "deriv": 0, "where": "interior"}, {"var": "u", "deriv": 2, "where": "interior"}]}], "bcs": []})");
  const Problem r = integrate_by_parts(p);
  EXPECT_EQ(r.k(), std::vector<int>{1});
  const AffinePolyMatrix F = r.integrand_int();
  EXPECT_NEAR(F(1, 1).part(0).coeff(0), -1.0, 1e-15);
  EXPECT_TRUE(F(0, 0).is_zero());
  EXPECT_TRUE(F(0, 1).is_zero());
  EXPECT_FALSE(r.integrand_bnd().is_zero());

  // balanced terms untouched
  const Problem bal = parse_problem(R"({"variables": [{"name": "u", "k": 1, "l": 1}], "parameters": [],
    "cost": [], "domain": [-1, 1], "terms": [{"coeff": {"const": [0, 1]},
    "factors": [{"var": "u", "deriv": 1, "where": "interior"}, {"var": "u", "deriv": 1, "where": "interior"}]}], "bcs": []})");
  const Problem rb = integrate_by_parts(bal);
  ASSERT_EQ(rb.terms.size(), 1u);
  EXPECT_EQ(rb.terms[0].coeff.part(0), bal.terms[0].coeff.part(0));
}

TEST(Model, IntegrateByPartsProductRule) {
  // int f u u' -> [f u^2 / 2] - int f'/2 u^2, f = 1 + x^2
  const Problem p = parse_problem(R"({"variables": [{"name": "u", "k": 1, "l": 1}], "parameters": [],
    "cost": [], "domain": [-1, 1], "terms": [{"coeff": {"const": [1, 0, 1]},
    "factors": [{"var": "u", "deriv": 0, "where": "interior"}, {"var": "u", "deriv": 1, "where": "interior"}]}], "bcs": []})");
  const Problem r = integrate_by_parts(p);
  EXPECT_EQ(r.k(), std::vector<int>{0});
  const AffinePolyMatrix F = r.integrand_int();
  // -f'/2 = -x
  EXPECT_NEAR(F(0, 0).part(0).coeff(1), -1.0, 1e-15);
  std::mt19937 rng(9);
  for (int t = 0; t < 10; ++t) {
    const auto u = oracle::random_poly(rng, 5);
    const double ref = oracle::integrate(oracle::mul({1, 0, 1}, oracle::mul(u, oracle::deriv(u))));
    const double bnd = (2.0 * std::pow(oracle::eval(u, 1), 2) - 2.0 * std::pow(oracle::eval(u, -1), 2)) / 2.0;
    const double inner = -oracle::integrate(oracle::mul({0, 1}, oracle::mul(u, u)));
    EXPECT_NEAR(ref, bnd + inner, 1e-10);
    EXPECT_NEAR(evaluate_functional(r, {from_mono(u)}, Eigen::VectorXd(0)), ref, 1e-10);
  }
}

TEST(Model, IntegrateByPartsPreservesValue) {
  const std::string doc = R"({"variables": [{"name": "u", "k": 3, "l": 3}, {"name": "v", "k": 2, "l": 2}],
    "parameters": ["g", "h"], "cost": [0, 0], "domain": [-1, 1], "terms": [
      {"coeff": {"const": [1, 2]}, "factors": [{"var": "u", "deriv": 0, "where": "interior"}, {"var": "u", "deriv": 3, "where": "interior"}]},
      {"coeff": {"params": {"g": [0, 1, 1]}}, "factors": [{"var": "u", "deriv": 1, "where": "interior"}, {"var": "v", "deriv": 2, "where": "interior"}]},
      {"coeff": {"const": [0.5], "params": {"h": [1, 0, 0, 1]}}, "factors": [{"var": "v", "deriv": 0, "where": "interior"}, {"var": "u", "deriv": 3, "where": "interior"}]},
      {"coeff": {"const": [-1, 1]}, "factors": [{"var": "v", "deriv": 0, "where": "interior"}, {"var": "v", "deriv": 2, "where": "interior"}]},
      {"coeff": {"params": {"g": [2]}}, "factors": [{"var": "u", "deriv": 2, "where": "interior"}, {"var": "u", "deriv": 2, "where": "interior"}]},
      {"coeff": {"const": [1]}, "factors": [{"var": "u", "deriv": 1, "where": "boundary:+1"}, {"var": "v", "deriv": 0, "where": "interior"}]}
    ], "bcs": []})";
  const Problem p = parse_problem(doc);
  const Problem r = integrate_by_parts(p);
  for (const auto& t : r.terms)
    if (t.first.where == Where::Interior && t.second.where == Where::Interior)
      EXPECT_LE(std::abs(t.first.deriv - t.second.deriv), 1);
  std::mt19937 rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto w = random_w(rng, 2, 7);
    const Eigen::VectorXd g = random_gamma(rng, 2);
    const double a = evaluate_functional(p, w, g), b = evaluate_functional(r, w, g);
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST(Model, PrepareOnDataFilesPreservesValue) {
  std::mt19937 rng(4);
  for (const char* f : {"pde_dp2.json", "pde_identity.json", "shear_xi9.json"}) {
    const Problem p = load_problem(data(f), {{"gamma", 0.35}});
    const Problem r = prepare(p);
    EXPECT_TRUE(r.on_reference_interval());
    const double a = p.a, b = p.b;
    for (int t = 0; t < 10; ++t) {
      std::vector<LegendrePoly> wy, wx;
      for (int i = 0; i < p.q(); ++i) {
        const auto m = oracle::random_poly(rng, 6);
        wy.push_back(from_mono(m));
        wx.push_back(from_mono(oracle::affine_compose(m, (b - a) / 2, (a + b) / 2)));
      }
      const Eigen::VectorXd g = random_gamma(rng, p.s());
      const double v0 = evaluate_functional(p, wy, g), v1 = evaluate_functional(r, wx, g);
      EXPECT_NEAR(v0, v1, 1e-9 * std::max(1.0, std::abs(v0))) << f;
    }
  }
}

TEST(Model, ReductionError) {
  // u u'' with l = 0 cannot put u' on the boundary
  const Problem p = parse_problem(R"({"variables": [{"name": "u", "k": 2, "l": 2}], "parameters": [],
    "cost": [], "domain": [-1, 1], "terms": [{"coeff": {"const": [1]},
    "factors": [{"var": "u", "deriv": 0, "where": "interior"}, {"var": "u", "deriv": 2, "where": "interior"}]}], "bcs": []})");
  Problem bad = p;
  bad.vars[0].l = 0;
  EXPECT_THROW(integrate_by_parts(bad), std::exception);
}

TEST(Model, HighestDerivativeBlock) {
  const AffinePolyMatrix S = highest_derivative_block(prepare(load_problem(data("shear_xi3.json"))));
  ASSERT_EQ(S.rows(), 2);
  EXPECT_NEAR(S(0, 0).part(0).coeff(0), 16.0 / 9.0, 1e-15);
  EXPECT_NEAR(S(1, 1).part(0).coeff(0), 16.0 / 9.0, 1e-15);
  EXPECT_TRUE(S(0, 1).is_zero());
  EXPECT_FALSE(S.degree() > 0);
  EXPECT_FALSE(S(0, 0).depends_on_params());

  const AffinePolyMatrix T = highest_derivative_block(prepare(load_problem(data("toy.json"))));
  EXPECT_NEAR(T(0, 0).part(0).coeff(0), 1.0, 1e-15);
  // gamma_1 x^2 / 2 = gamma_1 (L0 + 2 L2) / 6
  EXPECT_NEAR(T(0, 1).part(1).coeff(0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(T(0, 1).part(1).coeff(2), 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(T(0, 1).part(2).is_zero());

  const AffinePolyMatrix R = highest_derivative_block(prepare(load_problem(data("pathology.json"))));
  EXPECT_NEAR(R(0, 0).part(0)(0.3), 0.09, 1e-15);
  EXPECT_NEAR(R(1, 1).part(0)(0.3), 1.0, 1e-15);
  EXPECT_TRUE(R(0, 1).is_zero());
}

TEST(Model, FunctionalEvaluationOracle) {
  // shear flow integrand evaluated directly in monomials
  const Problem p = load_problem(data("shear_xi3.json"));
  std::mt19937 rng(8);
  const double xi = 3.0;
  for (int t = 0; t < 10; ++t) {
    const auto u = oracle::random_poly(rng, 7), v = oracle::random_poly(rng, 7);
    const double g = 1.7;
    auto sq = [](const oracle::Mono& m) { return oracle::integrate(oracle::mul(m, m)); };
    const double ref = 16 / (xi * xi) * (sq(oracle::deriv(u, 2)) + sq(oracle::deriv(v, 2))) +
                       8 * (sq(oracle::deriv(u)) + sq(oracle::deriv(v))) + xi * xi * (sq(u) + sq(v)) +
                       g * 2 / xi * oracle::integrate(oracle::mul(v, oracle::deriv(u))) -
                       g * 2 / xi * oracle::integrate(oracle::mul(u, oracle::deriv(v)));
    const double got = evaluate_functional(p, {from_mono(u), from_mono(v)}, Eigen::VectorXd::Constant(1, g));
    EXPECT_NEAR(got, ref, 1e-9 * std::abs(ref));
  }
}
