// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "preshape/classifier.hpp"
#include "preshape/jobs.hpp"
#include "preshape/realization.hpp"
#include "preshape/type1.hpp"
#include "preshape/type2.hpp"
#include "preshape/verify.hpp"

using namespace preshape;

namespace {

constexpr int N = 128;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // records one sub-check; the criterion passes only if all do
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " !" << what;
    }
  }
  void le(const std::string& what, double v, double tol) {
    detail << " " << what << "=" << fmt(v) << "/" << fmt(tol);
    check(std::isfinite(v) && v <= tol, what);
  }
  static std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2e", v);
    return b;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

double h2(const GridSpec& g) { return g.h() * g.h(); }

double rel_sup(const Field& got, const Field& want) {
  return (got.values - want.values).abs().maxCoeff() / want.max_abs();
}

ShapeOperatorField type1_field(const NormalizedPair& pr, const Curve& f, const Curve& g, const GridSpec& s) {
  const auto [U, V] = uv_general_solution(pr, f, g, s);
  return build_from_reciprocals(U, V);
}

json type2_job(const json& potential, std::array<double, 3> l) {
  return json{{"family", "type2"}, {"potential", potential}, {"lambda", {l[0], l[1], l[2]}}, {"resolution", N}};
}

json poisson_job() {
  // X - Y < 2 keeps Phi_X != Phi_Y
  json j = type2_job(json{{"kind", "poisson"}, {"phi", {0, 1}}, {"psi", 1}}, {-1, 0.5, 2});
  j["chart"] = "natural";
  j["domain"] = json{{"x0", 0.6}, {"x1", 1.0}, {"y0", -0.6}, {"y1", -0.2}};
  return j;
}

// ---------------------------------------------------------------------------------------------

void classification(Outcome& o) {
  const Curve f = Curve::polynomial({3, 0.5}), g = Curve::polynomial({0, 0.2});
  const Curve f2 = Curve::polynomial({2, 0.3, 0.1}), g2 = Curve::polynomial({0.5, -0.2, 0.05});
  struct Case {
    std::string name;
    std::function<ShapeOperatorField()> make;
    Verdict want;
  };
  std::vector<Case> cases{
      {"mu=1", [&] { return type1_field(solve_normalized_pair(Curve::constant(1), 0, 2), f, g, {N, N, 1.1, 1.6, 2, 3}); },
       Verdict::TypeI_first},
      {"mu=-1", [&] { return type1_field(solve_normalized_pair(Curve::constant(-1), 0, 2), f, g, {N, N, 1.1, 1.3, 2, 3}); },
       Verdict::TypeI_first},
      {"mu=0", [&] { return type1_field(pair_mu0(1.35, 1.1, 1.6), f, g, {N, N, 1.1, 1.6, 2, 3}); }, Verdict::TypeI_first},
      {"mu=1,quadratic f,g",
       [&] { return type1_field(solve_normalized_pair(Curve::constant(1), 0, 2), f2, g2, {N, N, 1.1, 1.6, 2, 3}); },
       Verdict::TypeI_first},
      {"mu=2.5", [&] { return type1_field(solve_normalized_pair(Curve::constant(2.5), 0, 2), f, g, {N, N, 1.1, 1.3, 2, 3}); },
       Verdict::TypeI_first},
      {"mu=1+0.3x",
       [&] { return type1_field(solve_normalized_pair(Curve::polynomial({1, 0.3}), 0, 2), f, g, {N, N, 1.1, 1.5, 2, 3}); },
       Verdict::TypeI_first},
      {"quadric", [] { return build_instance(type2_job("quadric", {-1, 0.5, 2})).sf; }, Verdict::TypeII},
      {"quadratic", [] { return build_instance(type2_job("quadratic", {0.5, 1, 2})).sf; }, Verdict::TypeII},
      {"cubic", [] { return build_instance(type2_job("cubic", {0.5, 1, 2})).sf; }, Verdict::TypeII},
      {"log", [] { return build_instance(type2_job("log", {0.5, 1, 2})).sf; }, Verdict::TypeII},
      {"poisson", [] { return build_instance(poisson_job()).sf; }, Verdict::TypeII},
  };
  double worst = 0;
  for (const auto& c : cases) {
    const auto t = std::chrono::steady_clock::now();
    const ClassificationReport r = classify(c.make());
    const double dt = seconds_since(t);
    worst = std::max(worst, dt);
    o.check(r.verdict == c.want, c.name + "->" + to_string(r.verdict));
    o.check(dt < 10, c.name + " slow");
  }
  // pseudo-random smooth field; A_y and B_x stay away from zero
  const GridSpec gr{N, N, 0, 1, 0, 1};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  double k[6];
  for (double& v : k) v = u(rng);
  const Field A = Field::sample(gr, [&](double x, double y) {
    return 3 + 0.5 * y + 0.1 * k[0] * std::sin(2 * x + 3 * y + k[1]) + 0.1 * k[2] * std::cos(x * k[3]);
  });
  const Field B =
      Field::sample(gr, [&](double x, double y) { return 0.5 + 0.4 * x + 0.1 * k[4] * std::sin(x + 2 * y + k[5]); });
  const ClassificationReport r = classify(build_from_curvatures(A, B));
  o.check(r.verdict == Verdict::Generic, std::string("random->") + to_string(r.verdict));
  o.check(r.max_first > 1, "random first residual");
  o.detail << " cases=" << cases.size() + 1 << " random_first=" << Outcome::fmt(r.max_first)
           << " slowest=" << Outcome::fmt(worst) << "s";
}

void k_constants(Outcome& o) {
  // analytic natural coframing
  const GridSpec g2 = cubic_domain(LambdaTriple{0.5, 1, 2}).grid(N);
  const CoframeData d2 = coframe_data(type2_shape_field(builtin_potential("quadratic"), g2));
  o.le("II|K+2|", std::max((d2.K.K1.values + 2).abs().maxCoeff(), (d2.K.K2.values + 2).abs().maxCoeff()), 100 * h2(g2));
  const GridSpec g1{N, N, 1.1, 1.6, 2, 3};
  const ShapeOperatorField s1 =
      type1_field(solve_normalized_pair(Curve::constant(1), 0, 2), Curve::polynomial({3, 0.5}), Curve::polynomial({0, 0.2}), g1);
  o.le("I|K1-1|", (coframe_data(s1).K.K1.values - 1).abs().maxCoeff(), 100 * h2(g1));
  // and from samples alone
  const Instance ti = build_instance(type2_job("quadratic", {0.5, 1, 2}));
  const StructureFunctions ks =
      compute_structure_functions(compute_coframing(build_from_reciprocals(sampled(ti.sf.U), sampled(ti.sf.V))));
  o.le("II_sampled", std::max((ks.K1.values + 2).abs().maxCoeff(), (ks.K2.values + 2).abs().maxCoeff()),
       100 * h2(ti.sf.spec));
  const StructureFunctions k1 = compute_structure_functions(compute_coframing(build_from_reciprocals(sampled(s1.U), sampled(s1.V))));
  o.le("I_sampled", (k1.K1.values - 1).abs().maxCoeff(), 100 * h2(g1));
}

void closed_form_oracle(Outcome& o) {
  const NormalizedPair pr = solve_normalized_pair(Curve::constant(1), 0, 2);
  const std::array<double, 3> c{-3, 0, 1};
  auto type1_err = [&](int n) {
    const GridSpec g{n, n, 1.1, 1.6, 2, 3};
    const FrobeniusSolution cl = abp_closed_form(pr, c, g);
    const Coframing cf = natural_coframing(pr, g);
    const FrobeniusSolution s =
        frobenius_integrate(cf, compute_structure_functions(cf), FrobeniusSystem::First, cl.a0, cl.b0, cl.p0);
    return std::max(rel_sup(s.a, cl.a), rel_sup(s.b, cl.b));
  };
  const LambdaTriple l{0.5, 1, 2};
  auto type2_err = [&](int n) {
    const GridSpec g = cubic_domain(l).grid(n);
    const FrobeniusSolution cl = abp_closed_form_t2(g, l.c());
    const CoframeData cd = coframe_data(type2_shape_field(builtin_potential("quadratic"), g));
    const FrobeniusSolution s = frobenius_integrate(cd.cf, cd.K, FrobeniusSystem::Second, cl.a0, cl.b0, cl.p0);
    return std::max({rel_sup(s.a, cl.a), rel_sup(s.b, cl.b), rel_sup(s.p, cl.p)});
  };
  const int nc = N / 2 + 1, nf = N + 1;
  const double e1c = type1_err(nc), e1f = type1_err(nf);
  o.le("I", e1f, 100 * h2({nf, nf, 1.1, 1.6, 2, 3}));
  o.check(e1c <= 100 * h2({nc, nc, 1.1, 1.6, 2, 3}), "I coarse");
  o.detail << " I_ratio=" << Outcome::fmt(e1c / e1f);
  o.check(e1c / e1f >= 3.5, "I ratio");
  const double e2c = type2_err(nc), e2f = type2_err(nf);
  o.le("II", e2f, 100 * h2(cubic_domain(l).grid(nf)));
  o.check(e2c <= 100 * h2(cubic_domain(l).grid(nc)), "II coarse");
  o.detail << " II_ratio=" << Outcome::fmt(e2c / e2f);
  o.check(e2c / e2f >= 3.5, "II ratio");
}

void quadric_identity(Outcome& o) {
  const LambdaTriple l{-1, 0.5, 2};
  GridSpec g = cubic_domain(l).grid(N);
  g.x0 = 0.55;  // the potential needs X > 0 > Y
  g.y1 = -0.05;
  auto residual = [&](const SurfaceMesh& m) {
    double r = 0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const Vec3 p = m.point(i, j);
        r = std::max(r, std::abs(l.l1 * p(0) * p(0) + l.l2 * p(1) * p(1) + l.l3 * p(2) * p(2) + 1 / (l.l1 * l.l2 * l.l3)));
      }
    return r;
  };
  const ShapeOperatorField sf = type2_shape_field(builtin_potential("quadric"), g);
  FrameField fr;
  fr.e3 = vector_field(g, t2_e3_source(l));
  Realization ra = realize_surface(sf, fr);
  const Vec3 base = quadric_closed_form(l, g.x(ra.mesh.bi), g.y(ra.mesh.bj));
  translate_to(ra.mesh, base);
  o.le("analytic", residual(ra.mesh), 1e-6);

  FrameField fs;
  for (int k = 0; k < 3; ++k) fs.e3[k] = sampled(fr.e3[k]);
  RealizeOptions ro;
  ro.primitive.check_closed = false;
  ro.check_path = false;
  Realization rf = realize_surface(build_from_reciprocals(sampled(sf.U), sampled(sf.V)), fs, ro);
  translate_to(rf.mesh, base);
  o.le("fd", residual(rf.mesh), 1e-4);

  // node (X, Y) = (1, -0.5)
  const Vec3 q = quadric_closed_form(l, 1, -0.5);
  const double quad = l.l1 * q(0) * q(0) + l.l2 * q(1) * q(1) + l.l3 * q(2) * q(2);
  o.le("hand_quadratic", std::abs(quad - 1), 1e-12);
  o.le("hand_constant", std::abs(1 / (l.l1 * l.l2 * l.l3) + 1), 1e-15);
  o.le("hand_u2", std::abs(q(0) * q(0) - 4.0 / 9.0), 1e-12);
  o.le("hand_v2", std::abs(q(1) * q(1) - 16.0 / 9.0), 1e-12);
  o.le("hand_w2", std::abs(q(2) * q(2) - 25.0 / 90.0), 1e-12);
}

void minimal_type2(Outcome& o) {
  const LambdaTriple l{-0.5, 1, 2.5};
  const GridSpec g{N, N, 0.2, 1.37, 0.2, 1.37};
  const ToralPatch tp = toral_patch(l, builtin_potential("log"), g);
  Realization r = realize_surface(tp.sf, tp.frame);
  translate_to(r.mesh, minimal_closed_form(l, tp.X(r.mesh.bi, r.mesh.bj), tp.Y(r.mesh.bi, r.mesh.bj)));
  o.le("implicit", implicit_check(r.mesh, "minimal_t2", l).residual, 1e-5);
  const RecoveredShape rs = recover_shape_operator(r.mesh);
  const double maxA = rs.A.values.abs().maxCoeff();
  o.le("|A+B|", (rs.A.values + rs.B.values).abs().maxCoeff(), 1e-4 * maxA);
}

void enneper(Outcome& o) {
  const GridSpec g{N, N, -1, 1, -1, 1};
  const Unfolding uf = unfold_mu0(Mu0Domain{1, 0, 0}, g);
  // U = (X - Y)^2 pulled back by the unfolding
  const Field U = Field::from_source(g, [](double x, double y, int k) {
    const Jet X = Jet::var_x(x, k), Y = Jet::var_y(y, k);
    const Jet r = 1.0 + X * X + Y * Y;
    return r * r;
  });
  const Field V = Field::from_source(g, [U](double x, double y, int k) { return -U.source(x, y, k); });
  FrameField fr;
  fr.e3 = vector_field(g, uf.e3);
  const Realization r = realize_surface(build_from_reciprocals(U, V), fr);
  o.le("|H|", recover_shape_operator(r.mesh).H.values.abs().maxCoeff(), 1e-4);
  std::vector<Vec3> p, q;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      p.push_back(r.mesh.point(i, j));
      q.push_back(enneper_reference(g.x(i), g.y(j)));
    }
  const Similarity s = align_similarity(p, q);
  o.le("rms", s.rms, 1e-3 * s.extent);
}

void family_check(Outcome& o, const FamilyResult& fr, const std::string& tag) {
  o.check(fr.meshes.size() == 3, tag + " count");
  for (size_t i = 0; i < fr.matrix.size(); ++i)
    for (size_t j = i + 1; j < fr.matrix.size(); ++j)
      o.check(fr.matrix[i][j].noncongruent, tag + " pair " + std::to_string(i) + std::to_string(j) + " congruent");
  o.le(tag + "_S", fr.S_mismatch, fr.S_tol);
  o.check(fr.pass, tag + " report");
}

void flexibility(Outcome& o) {
  const Instance inst = build_instance(json{{"family", "type1"}, {"resolution", N}, {"seed", 0}});
  const FamilyResult fr = family_instance(inst, {}, 3);
  o.detail << " S_tol=100h^2";
  family_check(o, fr, "family");
  if (fr.triples.size() < 2) return;
  std::array<double, 3> mid;
  for (int k = 0; k < 3; ++k) mid[k] = 0.5 * (fr.triples[0][k] + fr.triples[1][k]);
  family_check(o, family_instance(inst, {fr.triples[0], fr.triples[1], mid}, 3), "midpoint");
}

void gauss_image(Outcome& o) {
  const NormalizedPair pr = solve_normalized_pair(Curve::constant(1), 0, 2);
  const GridSpec g{N, N, 1.1, 1.6, 2, 3};
  const std::array<double, 3> c{-3, 0, 1};
  const GeneralE3 ge = general_frame_e3(pr, c, g);
  const CircleCheck cc = circle_check(ge.frame.e3);
  o.le("circle", cc.planarity, 1e-8);
  o.le("great", cc.great_circle, 1e-6);
  o.le("geodesic", geodesic_curvature_check(ge.frame.e3, abp_closed_form(pr, c, g).a), 1e-6);
  const CircleCheck c0 = circle_check(mu0_frame_e3(Mu0Domain{1, -1, 0}, {N, N, 1.5, 3, -3, -1.5}).e3);
  o.le("mu0_circle", c0.planarity, 1e-8);
  o.le("mu0_great", c0.great_circle, 1e-6);
  const LambdaTriple l{0.5, 1, 2};
  const GridSpec g2 = cubic_domain(l).grid(N);
  o.le("confocal", confocal_check(frame_e3_t2(l, g2).e3, l), 1e-10);
}

void ovaloid(Outcome& o) {
  const TorusResult t = torus_realize(LambdaTriple{0.5, 1, 2}, builtin_potential("cubic", {3, -1.0}), TorusOptions{N});
  o.le("period", t.period_error, 1e-6 * t.diameter);
  const RecoveredShape rs = recover_shape_operator(t.mesh);
  const Rect& rc = rs.forms.rect;
  double mA = 1e300, mB = 1e300;
  for (int j = 0; j < rs.A.spec.ny; ++j)
    for (int i = 0; i < rs.A.spec.nx; ++i) {
      if (t.mesh.umbilic(rc.i0 + i, rc.j0 + j)) continue;
      mA = std::min(mA, rs.A(i, j));
      mB = std::min(mB, rs.B(i, j));
    }
  o.detail << " minA=" << Outcome::fmt(mA) << " minB=" << Outcome::fmt(mB) << " umbilics=" << t.umbilic_count;
  o.check(mA > 0 && mB > 0, "positivity");
  o.check(t.umbilic_count == 4, "umbilic count");
  o.check(!t.umbilic_circle, "no circle");
  const TorusResult v = torus_realize(LambdaTriple{-2, 1, 2}, builtin_potential("cubic", {3, -1.0}), TorusOptions{N});
  o.check(v.umbilic_circle, "variant circle");
  o.detail << " variant_circle=" << v.umbilic_circle;
}

void degenerate(Outcome& o) {
  const double R = 2, r = 0.5;
  const Instance inst = build_instance(json{{"family", "revolution"}, {"R", R}, {"r", r}, {"resolution", N}});
  const GridSpec& g = inst.sf.spec;
  DegenerateOptions d;
  d.u0 = 1 / (r * r);
  d.b0 = 1 / std::pow(R + r * std::cos(g.x(g.center().first)), 2);
  const DegenerateResult dr = degenerate_realize(inst.sf, d);
  o.check(dr.family.branch == MoldingFamily::Branch::OneParameter, "branch");
  std::vector<Vec3> p, q;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      p.push_back(dr.mesh.point(i, j));
      q.push_back({(R + r * std::cos(g.x(i))) * std::cos(g.y(j)), (R + r * std::cos(g.x(i))) * std::sin(g.y(j)),
                   r * std::sin(g.x(i))});
    }
  const Similarity s = align_similarity(p, q, true);
  o.le("torus_rms", s.rms, 1e-4);
  o.le("scale", std::abs(s.scale - 1), 1e-4);

  // A = 1, B = 1 + x y
  const GridSpec gi{N, N, 0.5, 1.5, 0.5, 1.5};
  const Field B = Field::from_source(gi, [](double x, double y, int k) { return 1.0 + Jet::var_x(x, k) * Jet::var_y(y, k); });
  bool refused = false;
  try {
    degenerate_molding_solve(build_from_curvatures(Field::constant(gi, 1.0), B));
  } catch (const Error& e) {
    refused = e.kind() == ErrorKind::NoRealization;
  }
  o.check(refused, "incompatible molding realized");
  o.detail << " incompatible=" << (refused ? "NoRealization" : "accepted");
}

void poisson(Outcome& o) {
  const EulerPotential p = poisson_potential(Curve::polynomial({0, 1}), Curve::constant(1.0));
  o.le("euler_fd", euler_residual(p, {N, N, 1.2, 2, -1, -0.2}), 1e-5);
  const EulerPotential one = poisson_potential(Curve::constant(1.0), Curve::constant(0.0));
  double e = 0;
  for (auto [X, Y] : {std::pair{1.5, -0.5}, std::pair{0.8, -0.3}, std::pair{2.0, 0.5}})
    e = std::max(e, std::abs(one.jet(X, Y, 0).value() - M_PI));
  o.le("phi1_pi", e, 1e-8);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    void (*run)(Outcome&);
  };
  const Criterion all[] = {
      {1, "classification", classification}, {2, "K constants", k_constants},
      {3, "closed-form oracle", closed_form_oracle}, {4, "quadric identity", quadric_identity},
      {5, "Type II minimal", minimal_type2}, {6, "Enneper", enneper},
      {7, "flexibility and rigidity", flexibility}, {8, "Gauss image", gauss_image},
      {9, "closed ovaloid", ovaloid}, {10, "degenerate branch", degenerate},
      {11, "Poisson/Euler", poisson},
  };
  int failed = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : all) {
    Outcome o;
    const auto t = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("threw: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s:%s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                seconds_since(t));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed in %.1fs\n", int(std::size(all)) - failed, std::size(all), seconds_since(t0));
  return failed ? 1 : 0;
}
