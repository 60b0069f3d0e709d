#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "preshape/realization.hpp"
#include "preshape/type2.hpp"
#include "preshape/verify.hpp"

using namespace preshape;

namespace {

constexpr double kR = 2, kr = 0.5;

// torus of revolution, x = phi (meridian), y = theta; e3 the inward normal so that A = 1/r
SurfaceMesh torus_mesh(int n) {
  SurfaceMesh m;
  m.spec = GridSpec{n, n, 0.3, 1.3, 0, 2};
  const GridSpec& g = m.spec;
  m.x = vector_field(g, [](double x, double y, int k) {
    const Jet P = Jet::var_x(x, k), T = Jet::var_y(y, k);
    const Jet rho = kR + kr * cos(P);
    return std::array<Jet, 3>{rho * cos(T), rho * sin(T), kr * sin(P)};
  });
  m.frame.e3 = vector_field(g, [](double x, double y, int k) {
    const Jet P = Jet::var_x(x, k), T = Jet::var_y(y, k);
    return std::array<Jet, 3>{-cos(P) * cos(T), -cos(P) * sin(T), -sin(P)};
  });
  m.A = Field::constant(g, 1 / kr);
  m.B = Field::sample(g, [](double x, double) { return std::cos(x) / (kR + kr * std::cos(x)); });
  m.mask = Mask::Constant(n, n, true);
  m.umbilic = Mask::Constant(n, n, false);
  return m;
}

}  // namespace

TEST(Recover, TorusFundamentalForms) {
  const SurfaceMesh m = torus_mesh(33);
  const FundamentalForms f = recover_fundamental_forms(m);
  const GridSpec& g = f.spec;
  double eE = 0, eG = 0, eF = 0, eK = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double rho = kR + kr * std::cos(g.x(i));
      eE = std::max(eE, std::abs(f.E(i, j) - kr * kr));
      eG = std::max(eG, std::abs(f.G(i, j) - rho * rho));
      eF = std::max(eF, std::abs(f.F(i, j)));
      eK = std::max(eK, std::abs(f.K_intrinsic(i, j) - std::cos(g.x(i)) / (kr * rho)));
    }
  EXPECT_LT(eE, 1e-5);
  EXPECT_LT(eG, 1e-4);
  EXPECT_LT(eF, 1e-5);
  EXPECT_LT(eK, 1e-3);
}

TEST(Recover, TorusRoundTripIsFourthOrder) {
  const RoundTrip a = round_trip(torus_mesh(33)), b = round_trip(torus_mesh(65));
  EXPECT_TRUE(a.pass);
  EXPECT_TRUE(b.pass);
  EXPECT_GT(convergence_order(std::max(a.A_error, a.B_error), std::max(b.A_error, b.B_error)), 3.5);
  EXPECT_LT(b.gauss, b.tol);
}

TEST(Recover, PrincipalAxesAlongGrid) {
  const RecoveredShape rs = recover_shape_operator(torus_mesh(33));
  EXPECT_LT(rs.max_axis_angle, 1e-3);
  EXPECT_NEAR(rs.A(5, 5), 1 / kr, 1e-4);
}

TEST(Recover, SmallMeshRejected) {
  try {
    recover_fundamental_forms(torus_mesh(4));
    FAIL() << "expected MaskTooSmall";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MaskTooSmall);
  }
}

TEST(Recover, DegenerateMetricRejected) {
  SurfaceMesh m = torus_mesh(9);
  // every row collapsed onto one curve
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 9; ++j) m.x[k].values.col(j) = m.x[k].values.col(0);
  for (auto& f : m.x) f.source = nullptr;
  try {
    recover_shape_operator(m);
    FAIL() << "expected IndefiniteMetric";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IndefiniteMetric);
  }
}

TEST(Similarity, RecoversRigidMotionAndScale) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<Vec3> p, q;
  const Mat3 R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const Vec3 t(0.3, -1, 2);
  for (int k = 0; k < 50; ++k) {
    const Vec3 v(nd(rng), nd(rng), nd(rng));
    p.push_back(v);
    q.push_back(1.7 * R * v + t);
  }
  const Similarity s = align_similarity(p, q);
  EXPECT_NEAR(s.scale, 1.7, 1e-12);
  EXPECT_LT((s.R - R).norm(), 1e-12);
  EXPECT_LT(s.rms, 1e-12);

  // mirror image: only with reflections allowed
  for (auto& v : p) v.z() = -v.z();
  EXPECT_GT(align_similarity(p, q).rms, 1e-3);
  EXPECT_LT(align_similarity(p, q, true).rms, 1e-12);
}

TEST(Noncongruence, SameMeshIsCongruent) {
  const SurfaceMesh m = torus_mesh(33);
  const Noncongruence n = noncongruence_check(m, m);
  EXPECT_TRUE(n.congruent);
  EXPECT_FALSE(n.noncongruent);
  EXPECT_EQ(n.I_difference, 0);
}

TEST(Noncongruence, DifferentMetricsAreNoncongruent) {
  SurfaceMesh a = torus_mesh(33), b = torus_mesh(33);
  // a second torus with a thinner tube, same grid
  for (int k = 0; k < 3; ++k) b.x[k].source = nullptr;
  const GridSpec& g = b.spec;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double rho = kR + 0.4 * std::cos(g.x(i));
      b.x[0].values(i, j) = rho * std::cos(g.y(j));
      b.x[1].values(i, j) = rho * std::sin(g.y(j));
      b.x[2].values(i, j) = 0.4 * std::sin(g.x(i));
      b.A.values(i, j) = 1 / 0.4;
      b.B.values(i, j) = std::cos(g.x(i)) / rho;
    }
  const Noncongruence n = noncongruence_check(a, b);
  EXPECT_TRUE(n.noncongruent);
  EXPECT_GT(n.I_difference, 1e3 * n.shape_residual);
}

TEST(GaussImage, ConfocalNormal) {
  const LambdaTriple l{0.5, 1, 2};
  const GridSpec g = cubic_domain(l).grid(33);
  EXPECT_LT(confocal_check(vector_field(g, t2_e3_source(l)), l), 1e-10);
}

TEST(GaussImage, LatitudeCirclesArePlanar) {
  const GridSpec g{17, 33, 0.2, 1.2, 0, 3};
  const VectorField e3 = vector_field(g, [](double x, double y, int k) {
    const Jet a = Jet::var_x(x, k), t = Jet::var_y(y, k);
    return std::array<Jet, 3>{sin(a) * cos(t), sin(a) * sin(t), cos(a)};
  });
  EXPECT_LT(circle_check(e3).planarity, 1e-12);
}

TEST(Report, PassAndFailures) {
  VerificationReport r;
  r.add("small", 1e-9, 1e-6);
  r.add_at_least("order", 3.9, 1.8);
  EXPECT_TRUE(r.pass());
  r.add("nan", std::nan(""), 1.0);
  EXPECT_FALSE(r.pass());
  ASSERT_EQ(r.failures().size(), 1u);
  EXPECT_EQ(r.failures()[0], "nan");
  r.require("flag", false);
  EXPECT_EQ(r.failures().size(), 2u);
  EXPECT_NEAR(convergence_order(4.0, 1.0), 2.0, 1e-15);
}

TEST(Report, MeshChecksOnTorus) {
  VerificationReport r;
  add_mesh_checks(r, torus_mesh(65));
  EXPECT_TRUE(r.pass()) << (r.failures().empty() ? "" : r.failures()[0]);
}
