#include <gtest/gtest.h>

#include <cmath>

#include "preshape/realization.hpp"
#include "preshape/type1.hpp"
#include "preshape/type2.hpp"
#include "preshape/verify.hpp"

using namespace preshape;

namespace {

double quadric_residual(const LambdaTriple& l, const Vec3& p) {
  return std::abs(l.l1 * p(0) * p(0) + l.l2 * p(1) * p(1) + l.l3 * p(2) * p(2) + 1 / (l.l1 * l.l2 * l.l3));
}

}  // namespace

TEST(Realize, QuadricByQuadrature) {
  const LambdaTriple l{-1, 0.5, 2};
  GridSpec g = cubic_domain(l).grid(65);
  g.x0 = 0.55;
  g.y1 = -0.05;
  const ShapeOperatorField sf = type2_shape_field(builtin_potential("quadric"), g);
  FrameField fr = frame_e3_t2(l, g);
  fr.e3 = vector_field(g, t2_e3_source(l));
  Realization r = realize_surface(sf, fr);
  EXPECT_TRUE(r.analytic);
  translate_to(r.mesh, quadric_closed_form(l, g.x(r.mesh.bi), g.y(r.mesh.bj)));
  double e = 0, q = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      e = std::max(e, (r.mesh.point(i, j) - quadric_closed_form(l, g.x(i), g.y(j))).norm());
      q = std::max(q, quadric_residual(l, r.mesh.point(i, j)));
    }
  EXPECT_LT(e, 1e-10);
  EXPECT_LT(q, 1e-6);
}

TEST(Realize, SampledQuadratureConverges) {
  const LambdaTriple l{-1, 0.5, 2};
  auto err = [&](int n) {
    GridSpec g = cubic_domain(l).grid(n);
    g.x0 = 0.55;
    g.y1 = -0.05;
    const ShapeOperatorField sf = type2_shape_field(builtin_potential("quadric"), g);
    const ShapeOperatorField ss = build_from_reciprocals(sampled(sf.U), sampled(sf.V));
    FrameField fr = frame_e3_t2(l, g);
    fr.e3 = vector_field(g, t2_e3_source(l));
    for (int k = 0; k < 3; ++k) fr.e3[k] = sampled(fr.e3[k]);
    RealizeOptions o;
    o.primitive.check_closed = false;
    o.check_path = false;
    Realization r = realize_surface(ss, fr, o);
    EXPECT_FALSE(r.analytic);
    translate_to(r.mesh, quadric_closed_form(l, g.x(r.mesh.bi), g.y(r.mesh.bj)));
    double q = 0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) q = std::max(q, quadric_residual(l, r.mesh.point(i, j)));
    return q;
  };
  const double a = err(33), b = err(65);
  EXPECT_GT(a / b, 3.5);
}

TEST(Realize, FramesAgreeWithQuadrature) {
  const NormalizedPair pr = solve_normalized_pair(Curve::constant(1.0), 0, 2);
  const std::array<double, 3> c{-3, 0, 1};
  const GridSpec g{33, 33, 1.1, 1.6, 2, 3};
  const auto [U, V] = uv_general_solution(pr, Curve::polynomial({3, 0.5}), Curve::polynomial({0, 0.2}), g);
  const ShapeOperatorField sf = build_from_reciprocals(U, V);
  const CoframeData cd = coframe_data(sf);
  const FrobeniusSolution cl = abp_closed_form(pr, c, g);
  const FrobeniusSolution sol = frobenius_integrate(cd.cf, cd.K, FrobeniusSystem::First, cl.a0, cl.b0, cl.p0);
  const SurfaceMesh mesh = integrate_structure(sf, cd.cf, sol);
  const RoundTrip rt = round_trip(mesh);
  EXPECT_TRUE(rt.pass);
  EXPECT_LT(rt.gauss, rt.tol);

  const GeneralE3 ge = general_frame_e3(pr, c, g);
  const Realization rq = realize_surface(sf, ge.frame);
  std::vector<Vec3> p, q;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      p.push_back(rq.mesh.point(i, j));
      q.push_back(mesh.point(i, j));
    }
  const Similarity s = align_similarity(p, q, true);
  EXPECT_NEAR(s.scale, 1.0, 1e-6);
  EXPECT_LT(s.rms, 1e-6 * s.extent);
}

TEST(Realize, EnneperIsMinimal) {
  const GridSpec g{65, 65, -1, 1, -1, 1};
  const Unfolding uf = unfold_mu0(Mu0Domain{1, 0, 0}, g);
  const Field U = Field::from_source(g, [](double x, double y, int k) {
    const Jet X = Jet::var_x(x, k), Y = Jet::var_y(y, k);
    const Jet r = 1.0 + X * X + Y * Y;
    return r * r;
  });
  const Field V = Field::from_source(g, [U](double x, double y, int k) { return -U.source(x, y, k); });
  FrameField fr;
  fr.e3 = vector_field(g, uf.e3);
  fr.e1 = fr.e2 = fr.e3;
  const Realization r = realize_surface(build_from_reciprocals(U, V), fr);
  const RecoveredShape rs = recover_shape_operator(r.mesh);
  EXPECT_LT(rs.H.values.abs().maxCoeff(), 1e-4);
  std::vector<Vec3> p, q;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      p.push_back(r.mesh.point(i, j));
      q.push_back(enneper_reference(g.x(i), g.y(j)));
    }
  const Similarity s = align_similarity(p, q);
  EXPECT_LT(s.rms, 1e-3 * s.extent);
}

TEST(Realize, AffineFamilyEndpoints) {
  const LambdaTriple l{0.5, 1, 2};
  const GridSpec g = cubic_domain(l).grid(17);
  const FrobeniusSolution s0 = abp_closed_form_t2(g, l.c());
  FrobeniusSolution s1 = s0;
  s1.a.values *= 2;
  const FrobeniusSolution m = affine_family(s0, s1, 0.5);
  EXPECT_NEAR(m.a(3, 4), 1.5 * s0.a(3, 4), 1e-14);
  EXPECT_NEAR(affine_family(s0, s1, 0).b(5, 5), s0.b(5, 5), 1e-15);
}

TEST(Torus, CubicOvaloid) {
  const TorusResult t = torus_realize(LambdaTriple{0.5, 1, 2}, builtin_potential("cubic", {3, -1.0}), TorusOptions{64});
  EXPECT_LE(t.period_error, 1e-6 * t.diameter);
  EXPECT_LT(t.tau_error, 1e-8 * t.diameter);
  EXPECT_EQ(t.umbilic_count, 4);
  EXPECT_FALSE(t.umbilic_circle);
  EXPECT_TRUE(t.positive);
  EXPECT_FALSE(t.quotient.weld.empty());
}

TEST(Torus, UmbilicCircleVariant) {
  // l1 + l2 < 0 < l2 + l3
  const TorusResult t = torus_realize(LambdaTriple{-2, 1, 2}, builtin_potential("cubic", {3, -1.0}), TorusOptions{64});
  EXPECT_TRUE(t.umbilic_circle);
}

TEST(Torus, SingularPotentialHasNoPeriods) {
  try {
    torus_realize(LambdaTriple{-1, 0.5, 2}, builtin_potential("log"), TorusOptions{32});
    FAIL() << "expected PeriodNonzero";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PeriodNonzero);
  }
}

TEST(Degenerate, TorusOfRevolution) {
  const double R = 2, r = 0.5;
  const GridSpec g{65, 65, 0.3, 1.3, 0, 2};
  const Field A = Field::constant(g, 1 / r);
  const Field B = Field::from_source(g, [=](double x, double, int k) {
    const Jet X = Jet::var_x(x, k);
    return cos(X) / (R + r * cos(X));
  });
  DegenerateOptions o;
  o.u0 = 1 / (r * r);
  o.b0 = 1 / std::pow(R + r * std::cos(g.x(g.center().first)), 2);
  const DegenerateResult d = degenerate_realize(build_from_curvatures(A, B), o);
  EXPECT_EQ(d.family.branch, MoldingFamily::Branch::OneParameter);
  std::vector<Vec3> p, q;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      p.push_back(d.mesh.point(i, j));
      const double ph = g.x(i), th = g.y(j);
      q.push_back({(R + r * std::cos(ph)) * std::cos(th), (R + r * std::cos(ph)) * std::sin(th), r * std::sin(ph)});
    }
  const Similarity s = align_similarity(p, q, true);
  EXPECT_LT(s.rms, 1e-4);
  EXPECT_NEAR(s.scale, 1.0, 1e-4);
}

TEST(Degenerate, CylinderHasConstantRadius) {
  const GridSpec g{33, 33, 0, 1, 0, 1};
  const ShapeOperatorField sf = build_from_curvatures(Field::constant(g, 0.5), Field::constant(g, 0.0));
  const SurfaceMesh m = cylinder_realize(sf);
  const RoundTrip rt = round_trip(m);
  EXPECT_LT(std::max(rt.A_error, rt.B_error), rt.tol);
}
