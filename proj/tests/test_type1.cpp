#include <gtest/gtest.h>

#include <cmath>

#include "preshape/realization.hpp"
#include "preshape/type1.hpp"

using namespace preshape;

namespace {

double rel_err(const Field& got, const Field& want) {
  return (got.values - want.values).abs().maxCoeff() / want.max_abs();
}

// max relative error of (a, b) from RK4 against the closed form
double frobenius_error(const NormalizedPair& pr, const std::array<double, 3>& c, GridSpec g) {
  const FrobeniusSolution cl = abp_closed_form(pr, c, g);
  const Coframing cf = natural_coframing(pr, g);
  const StructureFunctions K = compute_structure_functions(cf);
  const FrobeniusSolution sol = frobenius_integrate(cf, K, FrobeniusSystem::First, cl.a0, cl.b0, cl.p0);
  EXPECT_FALSE(sol.positivity_lost);
  return std::max(rel_err(sol.a, cl.a), rel_err(sol.b, cl.b));
}

}  // namespace

TEST(NormalizedPair, WronskianIsOne) {
  for (double mu : {0.0, 1.0, -1.0, 2.5}) {
    NormalizedPair pr = solve_normalized_pair(Curve::constant(mu), 0, 2);
    check_pair(pr);
    EXPECT_LT(pr.wronskian_error, 1e-12) << mu;
    // second difference with step 2e-3 in the check itself
    EXPECT_LT(pr.ode_residual, 1e-5) << mu;
  }
}

TEST(NormalizedPair, VariableMuByRk4) {
  NormalizedPair pr = solve_normalized_pair(Curve::polynomial({1.0, 0.3}), 0, 2);
  check_pair(pr);
  EXPECT_LT(pr.wronskian_error, 1e-9);
  EXPECT_LT(pr.ode_residual, 1e-5);
}

TEST(NormalizedPair, Mu0IsAffine) {
  const NormalizedPair pr = pair_mu0(0.5, 0, 3);
  const PairJets j = pair_jets(pr, Jet::var_x(2.0, 2));
  EXPECT_DOUBLE_EQ(j.p0.value(), 1.0);
  EXPECT_DOUBLE_EQ(j.p1.value(), 1.5);
  EXPECT_DOUBLE_EQ(j.d1.value(), 1.0);
  EXPECT_DOUBLE_EQ(j.d0.value(), 0.0);
}

TEST(Type1, GeneralSolutionSolvesPde) {
  for (double mu : {1.0, -1.0, 0.0}) {
    const NormalizedPair pr = solve_normalized_pair(Curve::constant(mu), 0, 2);
    const GridSpec g{33, 33, 1.1, 1.3, 2, 3};
    const auto [U, V] = uv_general_solution(pr, Curve::polynomial({3, 0.5}), Curve::polynomial({0, 0.2}), g);
    EXPECT_LT(uv_pde_residual(pr, U, V), 1e-10) << mu;
  }
}

TEST(Type1, NaturalCoframingHasUnitK1) {
  const NormalizedPair pr = solve_normalized_pair(Curve::constant(1.0), 0, 2);
  const StructureFunctions K = compute_structure_functions(natural_coframing(pr, {33, 33, 1.1, 1.6, 2, 3}));
  EXPECT_LT((K.K1.values - 1).abs().maxCoeff(), 1e-10);
}

TEST(Type1, Mu0EncodingsRoundTrip) {
  const Mu0Domain dom{1.3, -0.7, 0.4};
  const auto c = dom.c_general();
  const auto back = general_to_mu0(c);
  const auto cp = dom.c_mu0();
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(back[k], cp[k], 1e-15);
  EXPECT_NEAR(mu0_to_general(cp)[1], c[1], 1e-15);
  // xi = 1, eta = -1, lambda = 0
  const auto c0 = Mu0Domain{1, -1, 0}.c_mu0();
  EXPECT_DOUBLE_EQ(c0[0], 0.0);
  EXPECT_DOUBLE_EQ(c0[1], 0.5);
  EXPECT_DOUBLE_EQ(c0[2], 0.0);
}

TEST(Type1, Mu0DomainValidates) {
  EXPECT_THROW((Mu0Domain{-1, 1, 0}.validate()), Error);
  const Mu0Domain dom{1, -1, 0};
  EXPECT_NO_THROW(dom.validate());
  EXPECT_TRUE(dom.contains(2, -2));
}

TEST(Type1, ClosedFormAtHandNode) {
  // U = Y, V = X at (X, Y) = (2, -2): a = b = 1/2, p = 0
  const NormalizedPair pr = pair_mu0(0, 0.5, 5);
  const FrobeniusSolution s = abp_closed_form(pr, Mu0Domain{1, -1, 0}.c_general(), {3, 3, 1.9, 2.1, -2.1, -1.9});
  EXPECT_NEAR(s.a(1, 1), 0.5, 1e-14);
  EXPECT_NEAR(s.b(1, 1), 0.5, 1e-14);
  EXPECT_NEAR(s.p(1, 1), 0.0, 1e-14);
}

TEST(Type1, FrobeniusIntegrationConverges) {
  const std::array<double, 3> c{-3, 0, 1};
  for (double mu : {1.0, -1.0}) {
    const NormalizedPair pr = solve_normalized_pair(Curve::constant(mu), 0, 2);
    const GridSpec base{0, 0, 1.1, mu > 0 ? 1.6 : 1.3, 2, 3};
    GridSpec g33 = base, g65 = base;
    g33.nx = g33.ny = 33;
    g65.nx = g65.ny = 65;
    const double e33 = frobenius_error(pr, c, g33), e65 = frobenius_error(pr, c, g65);
    EXPECT_LT(e33, 100 * g33.h() * g33.h()) << mu;
    EXPECT_LT(e65, 100 * g65.h() * g65.h()) << mu;
    EXPECT_GE(e33 / e65, 3.5) << mu;
  }
}

TEST(Type1, GoverningResidualOfClosedForm) {
  const NormalizedPair pr = pair_mu0(0, 0.5, 5);
  const GridSpec g{65, 65, 1.5, 3.0, -3.0, -1.5};
  const Coframing cf = natural_coframing(pr, g);
  const StructureFunctions K = compute_structure_functions(cf);
  const FrobeniusSolution cl = abp_closed_form(pr, Mu0Domain{1, -1, 0}.c_general(), g);
  EXPECT_LT(governing_residual(cl, cf, K, FrobeniusSystem::First), 1e-6);
}

TEST(Type1, NaturalYRecoversGrid) {
  const NormalizedPair pr = solve_normalized_pair(Curve::constant(1.0), 0, 2);
  const GridSpec g{33, 33, 1.1, 1.6, 2, 3};
  const auto [U, V] = uv_general_solution(pr, Curve::polynomial({3, 0.5}), Curve::polynomial({0, 0.2}), g);
  const CoframeData cd = coframe_data(build_from_reciprocals(U, V));
  const NormalForm nf = normal_form_coords(cd.cf, cd.K);
  const NaturalY ny = natural_y(nf.x, nf.z, pr);
  // x is fixed only up to translation and sign, but y must depend on the grid y alone
  EXPECT_LT(ny.theta2_residual, 1e-10);
  double spread = 0;
  for (int j = 0; j < g.ny; ++j)
    spread = std::max(spread, ny.y.values.col(j).maxCoeff() - ny.y.values.col(j).minCoeff());
  EXPECT_LT(spread, 1e-3 * (ny.y.max_abs()));
  EXPECT_GT(std::abs(ny.y(0, g.ny - 1) - ny.y(0, 0)), 0.1);
}

TEST(Type1, LinearClosedFormIsSurface) {
  // finite and nonconstant on D
  const Mu0Domain dom{1, -1, 0};
  const Vec3 a = x_linear_closed_form(dom, 2, -2), b = x_linear_closed_form(dom, 2.5, -2);
  EXPECT_TRUE(a.allFinite());
  EXPECT_GT((a - b).norm(), 1e-3);
}
