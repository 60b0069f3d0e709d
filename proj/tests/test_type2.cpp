#include <gtest/gtest.h>

#include <cmath>

#include "preshape/type2.hpp"

using namespace preshape;

namespace {

Vec3 value3(const std::array<Jet, 3>& e) { return {e[0].value(), e[1].value(), e[2].value()}; }

}  // namespace

TEST(Cubic, RootsFromCoefficients) {
  const auto c = LambdaTriple{0, 1, 2}.c();
  EXPECT_NEAR(c[0], 0.0, 1e-15);
  EXPECT_NEAR(c[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c[2], -1.0, 1e-15);
  const CubicDomain d = cubic_domain(0, 2.0 / 3.0, -1);
  EXPECT_NEAR(d.lambda.l1, 0, 1e-12);
  EXPECT_NEAR(d.lambda.l2, 1, 1e-12);
  EXPECT_NEAR(d.lambda.l3, 2, 1e-12);
  EXPECT_DOUBLE_EQ(d.X_lo, 1);
  EXPECT_DOUBLE_EQ(d.Y_hi, 1);
}

TEST(Cubic, RepeatedRootRejected) {
  EXPECT_THROW((LambdaTriple{0, 1, 1}.validate()), Error);
  EXPECT_THROW(cubic_domain(-1, 0, 0), Error);  // t^3 - 1: one real root
}

TEST(Type2, ClosedFormAbpAtHandNode) {
  // c(t) = t (t - 1)(t - 2) at (X, Y) = (1.5, 0.5)
  const FrobeniusSolution s = abp_closed_form_t2({3, 3, 1.4, 1.6, 0.4, 0.6}, LambdaTriple{0, 1, 2}.c());
  EXPECT_NEAR(s.a(1, 1), 0.375, 1e-14);
  EXPECT_NEAR(s.b(1, 1), 0.375, 1e-14);
}

TEST(Type2, NormalAtHandNode) {
  const Vec3 e = value3(t2_e3_source(LambdaTriple{0, 1, 2})(1.5, 0.5, 0));
  EXPECT_NEAR(e.norm(), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e[0]), std::sqrt(0.375), 1e-12);
  EXPECT_NEAR(std::abs(e[1]), 0.5, 1e-12);
  EXPECT_NEAR(std::abs(e[2]), std::sqrt(0.375), 1e-12);
}

TEST(Type2, NormalSolvesEuler) {
  const auto src = t2_e3_source(LambdaTriple{-1, 0.5, 2});
  const double X = 1, Y = -0.5;
  const auto e = src(X, Y, 2);
  // closedness of U e3_X dX + V e3_Y dY: the adjoint sign
  for (int k = 0; k < 3; ++k)
    EXPECT_NEAR(e[k].derivative(1, 1), (e[k].derivative(1, 0) - e[k].derivative(0, 1)) / (2 * (Y - X)), 1e-12);
}

TEST(Toral, UnfoldingAtOrigin) {
  const ToralMap m = toral_unfold(LambdaTriple{0, 1, 2});
  EXPECT_DOUBLE_EQ(m.X(0, 0, 0).value(), 1);
  EXPECT_DOUBLE_EQ(m.Y(0, 0, 0).value(), 1);
  const Vec3 e = value3(m.e3(0, 0, 0));
  EXPECT_NEAR(e[0], std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(e[1], 0, 1e-12);
  EXPECT_NEAR(e[2], std::sqrt(0.5), 1e-12);
}

TEST(Toral, HalfPeriodSymmetries) {
  const ToralMap m = toral_unfold(LambdaTriple{-0.5, 1, 2.5});
  const Vec3 e = value3(m.e3(0.3, 0.7, 0));
  EXPECT_LT((half_period_x() * e - value3(m.e3(0.3 + M_PI, 0.7, 0))).norm(), 1e-12);
  EXPECT_LT((half_period_y() * e - value3(m.e3(0.3, 0.7 + M_PI, 0))).norm(), 1e-12);
}

TEST(Potentials, BuiltinsSolveEuler) {
  const GridSpec g{16, 16, 0.55, 1.95, -0.95, -0.05};
  for (const char* k : {"quadric", "quadratic", "cubic", "log"})
    EXPECT_LT(euler_residual_exact(builtin_potential(k), g), 1e-10) << k;
  for (int d : {2, 3, 5}) EXPECT_LT(euler_residual_exact(builtin_potential("homogeneous", {d}), g), 1e-9) << d;
}

TEST(Potentials, HomogeneousCoefficients) {
  const auto c = homogeneous_coefficients(3);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_NEAR(c[3], -5.0 / 3.0, 1e-15);
  EXPECT_THROW(builtin_potential("nonsense"), Error);
}

TEST(Potentials, FiniteDifferenceResidualConverges) {
  auto r = [](const char* k, int n) { return euler_residual(builtin_potential(k), {n, n, 0.55, 1.95, -0.95, -0.05}, 2); };
  EXPECT_GT(r("cubic", 32) / r("cubic", 64), 3.5);
  // log Y is singular just above the domain
  EXPECT_GT(r("log", 64) / r("log", 128), 3.5);
}

TEST(Poisson, ConstantDensityGivesPi) {
  const EulerPotential p = poisson_potential(Curve::constant(1.0), Curve::constant(0.0));
  for (auto [X, Y] : {std::pair{1.5, -0.5}, std::pair{0.8, -0.3}})
    EXPECT_NEAR(p.jet(X, Y, 0).value(), M_PI, 1e-8);
  // phi = xi: mean of xi over the arc, pi (X + Y)/2
  const EulerPotential q = poisson_potential(Curve::polynomial({0, 1}), Curve::constant(0.0));
  EXPECT_NEAR(q.jet(1.5, -0.5, 0).value(), M_PI / 2, 1e-8);
}

TEST(Poisson, SolvesEuler) {
  const EulerPotential p = poisson_potential(Curve::polynomial({0, 1}), Curve::constant(1.0));
  const GridSpec g{128, 128, 1.2, 2, -1, -0.2};
  EXPECT_LT(euler_residual(p, g), 1e-5);
  EXPECT_LT(euler_residual_exact(p, g), 1e-10);
}

TEST(Type2, QuadricHandCheck) {
  // node (1, -0.5) of lambda = (-1, 0.5, 2)
  const Vec3 q = quadric_closed_form(LambdaTriple{-1, 0.5, 2}, 1, -0.5);
  EXPECT_NEAR(q[0] * q[0], 4.0 / 9.0, 1e-12);
  EXPECT_NEAR(q[1] * q[1], 16.0 / 9.0, 1e-12);
  EXPECT_NEAR(q[2] * q[2], 25.0 / 90.0, 1e-12);
}

TEST(Type2, ShapeFieldFromPotential) {
  const GridSpec g = cubic_domain(LambdaTriple{0.5, 1, 2}).grid(17);
  const EulerPotential p = builtin_potential("quadratic");
  const ShapeOperatorField sf = type2_shape_field(p, g);
  const Field PX = p.PhiX(g), PY = p.PhiY(g);
  EXPECT_LT((sf.U.values - PX.values).abs().maxCoeff(), 1e-14);
  EXPECT_LT((sf.V.values - PY.values).abs().maxCoeff(), 1e-14);
  EXPECT_TRUE(sf.U.analytic());
}
