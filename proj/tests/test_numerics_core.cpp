#include <gtest/gtest.h>

#include <cmath>

#include "preshape/calculus.hpp"
#include "preshape/ode.hpp"

using namespace preshape;

TEST(Jet, ProductAndChainRule) {
  const double x = 0.7, y = -0.3;
  const Jet X = Jet::var_x(x, 4), Y = Jet::var_y(y, 4);
  const Jet f = sin(X * Y) + exp(X) * Y;
  // d/dx = y cos(xy) + e^x y, d2/dxdy = cos(xy) - xy sin(xy) + e^x
  EXPECT_NEAR(f.value(), std::sin(x * y) + std::exp(x) * y, 1e-15);
  EXPECT_NEAR(f.derivative(1, 0), y * std::cos(x * y) + std::exp(x) * y, 1e-14);
  EXPECT_NEAR(f.derivative(1, 1), std::cos(x * y) - x * y * std::sin(x * y) + std::exp(x), 1e-14);
  EXPECT_NEAR(f.derivative(0, 3), -x * x * x * std::cos(x * y), 1e-13);
}

TEST(Jet, DxLowersOrder) {
  const Jet X = Jet::var_x(1.2, 3);
  const Jet f = X * X * X;
  const Jet d = f.dx();
  EXPECT_EQ(d.order(), 2);
  EXPECT_NEAR(d.value(), 3 * 1.44, 1e-14);
  EXPECT_NEAR(d.derivative(1, 0), 6 * 1.2, 1e-14);
}

TEST(Jet, SqrtAndLogInverse) {
  const Jet X = Jet::var_x(2.0, 5), Y = Jet::var_y(0.5, 5);
  const Jet g = exp(log(X + Y));
  const Jet s = sqrt(X + Y) * sqrt(X + Y);
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j) {
      const double want = (i + j == 0) ? 2.5 : (i + j == 1 ? 1.0 : 0.0);
      EXPECT_NEAR(g.derivative(i, j), want, 1e-12);
      EXPECT_NEAR(s.derivative(i, j), want, 1e-12);
    }
}

namespace {

double fd_error(int n, int accuracy) {
  const GridSpec g{n, n, 0, 1, 0, 1};
  const Field f = Field::sample(g, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
  const Field fx = partial_x(f, accuracy);
  double e = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      e = std::max(e, std::abs(fx(i, j) - 3 * std::cos(3 * g.x(i)) * std::cos(2 * g.y(j))));
  return e;
}

}  // namespace

TEST(Differences, SecondOrderConverges) {
  const double r = fd_error(33, 2) / fd_error(65, 2);
  EXPECT_GT(r, 3.5);
}

TEST(Differences, FourthOrderConverges) {
  const double r = fd_error(33, 4) / fd_error(65, 4);
  EXPECT_GT(r, 12.0);
}

TEST(Differences, SampledDropsSource) {
  const GridSpec g{9, 9, 0, 1, 0, 1};
  const Field f = Field::from_source(g, [](double x, double y, int n) { return Jet::var_x(x, n) * Jet::var_y(y, n); });
  EXPECT_TRUE(f.analytic());
  EXPECT_FALSE(sampled(f).analytic());
  EXPECT_DOUBLE_EQ(sampled(f)(3, 4), f(3, 4));
}

TEST(Primitive, ExactOnAnalyticClosedForm) {
  // w = d(x^2 y + sin y)
  const GridSpec g{41, 31, -1, 1, 0, 2};
  OneForm2D w;
  w.px = Field::from_source(g, [](double x, double y, int n) { return 2.0 * Jet::var_x(x, n) * Jet::var_y(y, n); });
  w.py = Field::from_source(g, [](double x, double y, int n) {
    const Jet X = Jet::var_x(x, n);
    return X * X + cos(Jet::var_y(y, n));
  });
  const auto [bi, bj] = g.center();
  const auto p = path_primitive(w, bi, bj);
  auto F = [](double x, double y) { return x * x * y + std::sin(y); };
  double e = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      e = std::max(e, std::abs(p.F(i, j) - (F(g.x(i), g.y(j)) - F(g.x(bi), g.y(bj)))));
  EXPECT_LT(e, 1e-12);
  EXPECT_LT(p.path_discrepancy, 1e-12);
  EXPECT_DOUBLE_EQ(p.F(bi, bj), 0.0);
}

TEST(Primitive, SampledSecondOrder) {
  auto err = [](int n) {
    const GridSpec g{n, n, 0, 1, 0, 1};
    OneForm2D w;
    w.px = Field::sample(g, [](double x, double y) { return std::cos(x) * std::exp(y); });
    w.py = Field::sample(g, [](double x, double y) { return std::sin(x) * std::exp(y); });
    const auto p = path_primitive(w, 0, 0);
    double e = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) e = std::max(e, std::abs(p.F(i, j) - std::sin(g.x(i)) * std::exp(g.y(j))));
    return e;
  };
  EXPECT_GT(err(33) / err(65), 3.5);
}

TEST(Primitive, RejectsNonClosedForm) {
  const GridSpec g{33, 33, 0, 1, 0, 1};
  OneForm2D w;
  w.px = Field::sample(g, [](double, double y) { return y; });
  w.py = Field::sample(g, [](double x, double) { return -x; });
  try {
    path_primitive(w, 0, 0);
    FAIL() << "expected NotClosed";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotClosed);
  }
}

TEST(Ode, Rk4FourthOrder) {
  const OdeRhs<double> f = [](double t, const VecX<double>& y) {
    VecX<double> d(2);
    d << y(1), -y(0) + 0 * t;
    return d;
  };
  VecX<double> y0(2);
  y0 << 0, 1;
  auto err = [&](int steps) {
    const auto s = ode_solve_1d(f, y0, 0.0, 3.0, steps);
    return std::abs(s(3.0)(0) - std::sin(3.0));
  };
  EXPECT_GT(err(20) / err(40), 14.0);
  EXPECT_LT(err(400), 1e-9);
}

TEST(Ode, DenseOutputBetweenSteps) {
  const OdeRhs<double> f = [](double, const VecX<double>& y) { return VecX<double>(y); };
  VecX<double> y0(1);
  y0 << 1;
  const auto s = ode_solve_1d(f, y0, 0.0, 1.0, 200);
  EXPECT_NEAR(s(0.4321)(0), std::exp(0.4321), 1e-8);
  EXPECT_NEAR(s.derivative(0.4321)(0), std::exp(0.4321), 1e-6);
}

TEST(Quadrature, GaussRuleIntegratesPolynomials) {
  const auto& [x, w] = gauss_rule<8>();
  double s = 0;
  for (size_t k = 0; k < x.size(); ++k) s += w[k] * std::pow(x[k], 14);
  EXPECT_NEAR(s, 2.0 / 15.0, 1e-14);
}

TEST(Grid, LargestRectangle) {
  Mask m = Mask::Constant(6, 5, true);
  m(0, 0) = false;
  m(5, 4) = false;
  m(2, 2) = false;
  const Rect r = largest_true_rectangle(m);
  EXPECT_EQ(r.area(), 12);
}
