#include "preshape/jobs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "preshape/calculus.hpp"

namespace preshape {

namespace {

// top-level keys win over the params block
json flat_view(const json& cfg) {
  if (!cfg.is_object()) fail(ErrorKind::InputError, "job must be a JSON object");
  json v = json::object();
  if (cfg.contains("params")) {
    if (!cfg["params"].is_object()) fail(ErrorKind::InputError, "params must be an object");
    for (auto it = cfg["params"].begin(); it != cfg["params"].end(); ++it) v[it.key()] = it.value();
  }
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (it.key() != "params") v[it.key()] = it.value();
  return v;
}

template <class T>
T get_or(const json& v, const char* key, T fallback) {
  if (!v.contains(key) || v[key].is_null()) return fallback;
  try {
    return v[key].get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::InputError, std::string(key) + ": " + e.what());
  }
}

std::array<double, 3> triple_of(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::InputError, std::string(what) + " needs 3 numbers");
  std::array<double, 3> r{};
  for (size_t k = 0; k < 3; ++k) {
    if (!j[k].is_number()) fail(ErrorKind::InputError, std::string(what) + " needs 3 numbers");
    r[k] = j[k].get<double>();
  }
  return r;
}

// the rectangle from "domain" or "grid" on top of a default, sized by resolution
GridSpec rect_from(const json& v, GridSpec fallback, int n) {
  fallback.nx = fallback.ny = n;
  if (v.contains("domain")) fallback = grid_from_json(v["domain"], fallback);
  if (v.contains("grid")) fallback = grid_from_json(v["grid"], fallback);
  return fallback;
}

Field field_input(const json& j) {
  if (j.is_string()) {
    const std::string p = j.get<std::string>();
    if (p.size() > 5 && p.substr(p.size() - 5) == ".json") return field_from_json(parse_json_file(p));
    return read_csv_field_file(p);
  }
  if (j.is_object() && j.contains("csv")) return read_csv_field_file(j["csv"].get<std::string>());
  return field_from_json(j);
}

EulerPotential potential_from(const json& v) {
  if (!v.contains("potential")) fail(ErrorKind::InputError, "type2 job needs a potential");
  const json& p = v["potential"];
  if (p.is_string()) return builtin_potential(p.get<std::string>());
  if (!p.is_object() || !p.contains("kind")) fail(ErrorKind::InputError, "potential needs a kind");
  const std::string kind = get_or<std::string>(p, "kind", "");
  if (kind == "poisson") {
    const Curve phi = p.contains("phi") ? curve_from_json(p["phi"]) : Curve::constant(0.0);
    const Curve psi = p.contains("psi") ? curve_from_json(p["psi"]) : Curve::constant(0.0);
    return poisson_potential(phi, psi);
  }
  PotentialParams pp;
  const json params = p.contains("params") ? p["params"] : p;
  pp.degree = get_or<int>(params, "degree", pp.degree);
  pp.scale = get_or<double>(params, "scale", pp.scale);
  return builtin_potential(kind, pp);
}

double sup_rel(const Field& a, const Field& ref, const Mask& m) {
  double e = 0;
  const double s = std::max(ref.max_abs(), 1e-300);
  for (int j = 0; j < a.spec.ny; ++j)
    for (int i = 0; i < a.spec.nx; ++i)
      if (m(i, j) && std::isfinite(a(i, j))) e = std::max(e, std::abs(a(i, j) - ref(i, j)) / s);
  return e;
}

FrameField sampled_frame(const VectorField& e3) {
  VectorField s, ex, ey;
  for (int k = 0; k < 3; ++k) {
    s[k] = sampled(e3[k]);
    ex[k] = partial_x(s[k], 4);
    ey[k] = partial_y(s[k], 4);
  }
  return frame_from_normal(s, ex, ey);
}

// Frobenius path: (a, b, p) from one triple, then frames and positions
SurfaceMesh frobenius_mesh(const ShapeOperatorField& sf, const CoframeData& cd, FrobeniusSystem sys,
                           const std::array<double, 3>& t, FrobeniusSolution* out = nullptr) {
  FrobeniusSolution sol = frobenius_integrate(cd.cf, cd.K, sys, t[0], t[1], t[2]);
  SurfaceMesh m = integrate_structure(sf, cd.cf, sol);
  if (out) *out = std::move(sol);
  return m;
}

bool is_input_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::InputError:
    case ErrorKind::UnknownKind:
    case ErrorKind::GridMismatch:
    case ErrorKind::NotThreeRealRoots:
    case ErrorKind::DomainViolation:
      return true;
    default:
      return false;
  }
}

}  // namespace

Curve curve_from_json(const json& j) {
  if (j.is_number()) return Curve::constant(j.get<double>());
  if (j.is_array()) {
    std::vector<double> c;
    for (const auto& e : j) {
      if (!e.is_number()) fail(ErrorKind::InputError, "polynomial coefficients must be numbers");
      c.push_back(e.get<double>());
    }
    return Curve::polynomial(c);
  }
  if (j.is_string()) return Curve::named(j.get<std::string>());
  if (j.is_object()) {
    if (j.contains("poly")) return curve_from_json(j["poly"]);
    return Curve::named(get_or<std::string>(j, "name", ""), get_or<double>(j, "amp", 1.0),
                        get_or<double>(j, "freq", 1.0), get_or<double>(j, "phase", 0.0),
                        get_or<double>(j, "offset", 0.0));
  }
  fail(ErrorKind::InputError, "cannot read a function from " + j.dump());
}

JobSettings job_settings(const json& cfg) {
  const json v = flat_view(cfg);
  JobSettings s;
  s.resolution = get_or<int>(v, "resolution", s.resolution);
  s.tol_scale = get_or<double>(v, "tol_scale", s.tol_scale);
  s.seed = get_or<std::uint64_t>(v, "seed", s.seed);
  if (s.resolution < 8) fail(ErrorKind::InputError, "resolution must be at least 8");
  if (!(s.tol_scale > 0)) fail(ErrorKind::InputError, "tol_scale must be positive");
  return s;
}

GridSpec type2_default_grid(const LambdaTriple& l, const std::string& kind, int n) {
  const CubicDomain d = cubic_domain(l);
  GridSpec g = d.grid(n);
  const double e = d.margin();
  if (kind == "quadric") {
    g.x0 = std::max(g.x0, e);
    g.y1 = std::min(g.y1, -e);
  } else if (kind == "elliptic") {
    if (g.y0 < 0 && g.y1 > 0) g.y0 = e;
  }
  g.validate();
  return g;
}

GridSpec toral_default_grid(const LambdaTriple& l, const std::string& kind, int n) {
  const double m = 0.2;
  GridSpec g{n, n, m, M_PI / 2 - m, m, M_PI / 2 - m};
  if (kind == "quadric") {
    // X = l2 + (l3 - l2) sin^2 x > 0 and Y = l2 - (l2 - l1) sin^2 y < 0, kept a margin away
    const double e = 0.1 * (l.l3 - l.l1);
    auto first = [](double q) { return q <= 0 ? 0.0 : q >= 1 ? M_PI / 2 : std::asin(std::sqrt(q)); };
    g.x0 = std::max(g.x0, first((e - l.l2) / (l.l3 - l.l2)));
    g.y0 = std::max(g.y0, first((l.l2 + e) / (l.l2 - l.l1)));
  }
  g.validate();
  return g;
}

Instance build_instance(const json& cfg) {
  const json v = flat_view(cfg);
  Instance inst;
  inst.settings = job_settings(cfg);
  inst.description = v;
  const int n = inst.settings.resolution;
  std::string fam = get_or<std::string>(v, "family", "");
  if (fam == "type1_mu0") fam = "type1";
  if (fam == "type2_potential") fam = "type2";
  inst.family = fam;
  inst.label = get_or<std::string>(v, "label", fam);
  if (v.contains("initial")) inst.initial = triple_of(v["initial"], "initial");
  BuildOptions bo;
  bo.allow_umbilics = get_or<bool>(v, "allow_umbilics", false);

  if (fam == "type1") {
    const GridSpec g = rect_from(v, GridSpec{n, n, 1.1, 1.6, 2, 3}, n);
    std::array<double, 2> pi{0, 2};
    if (v.contains("pair")) {
      const auto& p = v["pair"];
      if (!p.is_array() || p.size() != 2) fail(ErrorKind::InputError, "pair needs [t0, t1]");
      pi = {p[0].get<double>(), p[1].get<double>()};
    }
    if (!(pi[0] <= g.x0 && g.x1 <= pi[1])) fail(ErrorKind::InputError, "pair interval must contain the x range");
    double mu = 1.0;
    bool mu_zero = false;
    if (v.contains("mu")) {
      const json& m = v["mu"];
      if (m.is_number()) {
        mu = m.get<double>();
      } else if (m.is_string()) {
        const std::string s = m.get<std::string>();
        if (s == "zero") {
          mu = 0;
        } else if (s.rfind("const:", 0) == 0) {
          try {
            mu = std::stod(s.substr(6));
          } catch (const std::exception&) {
            fail(ErrorKind::InputError, "bad mu '" + s + "'");
          }
        } else {
          fail(ErrorKind::InputError, "mu must be zero, const:<v> or a number");
        }
      } else {
        fail(ErrorKind::InputError, "mu must be zero, const:<v> or a number");
      }
    }
    mu_zero = mu == 0;
    inst.pair = mu_zero ? pair_mu0(0.5 * (pi[0] + pi[1]), pi[0], pi[1])
                        : solve_normalized_pair(Curve::constant(mu), pi[0], pi[1]);
    const Curve f = v.contains("f") ? curve_from_json(v["f"]) : Curve::polynomial({3, 0.5});
    const Curve gg = v.contains("g") ? curve_from_json(v["g"]) : Curve::polynomial({0, 0.2});
    auto [U, V] = uv_general_solution(*inst.pair, f, gg, g);
    inst.sf = build_from_reciprocals(U, V, bo);
    if (v.contains("c")) inst.c = triple_of(v["c"], "c");
    else if (v.contains("c_mu0")) inst.c = mu0_to_general(triple_of(v["c_mu0"], "c_mu0"));
    else if (!inst.initial) inst.c = std::array<double, 3>{-3, 0, 1};
  } else if (fam == "type2") {
    if (v.contains("lambda")) {
      const auto t = triple_of(v["lambda"], "lambda");
      inst.lambda = LambdaTriple{t[0], t[1], t[2]};
      inst.lambda->validate();
    } else if (v.contains("c")) {
      const auto c = triple_of(v["c"], "c");
      inst.lambda = cubic_domain(c[0], c[1], c[2]).lambda;
    } else {
      inst.lambda = LambdaTriple{-1, 0.5, 2};
    }
    const LambdaTriple l = *inst.lambda;
    inst.potential = potential_from(v);
    inst.chart = get_or<std::string>(v, "chart", "toral");
    inst.torus = get_or<bool>(v, "torus", false);
    const std::string path = get_or<std::string>(v, "path", "analytic");
    if (path != "analytic" && path != "sampled") fail(ErrorKind::InputError, "path must be analytic or sampled");
    inst.sampled_path = path == "sampled";
    if (inst.chart == "toral") {
      const GridSpec g = rect_from(v, toral_default_grid(l, inst.potential->kind, n), n);
      ToralPatch tp = toral_patch(l, *inst.potential, g, bo.allow_umbilics);
      if (inst.sampled_path) {
        inst.sf = build_from_reciprocals(sampled(tp.sf.U), sampled(tp.sf.V), bo);
        inst.frame = sampled_frame(tp.frame.e3);
      } else {
        inst.sf = tp.sf;
        inst.frame = tp.frame;
      }
    } else if (inst.chart == "natural") {
      const GridSpec g = rect_from(v, type2_default_grid(l, inst.potential->kind, n), n);
      if (inst.sampled_path) {
        inst.sf = build_from_reciprocals(sampled(inst.potential->PhiX(g)), sampled(inst.potential->PhiY(g)), bo);
        inst.frame = sampled_frame(vector_field(g, t2_e3_source(l)));
      } else {
        inst.sf = type2_shape_field(*inst.potential, g, bo);
        inst.frame = frame_e3_t2(l, g);
      }
    } else {
      fail(ErrorKind::InputError, "chart must be natural or toral");
    }
  } else if (fam == "custom") {
    const bool reciprocal = v.contains("U") || v.contains("V");
    const char* ka = reciprocal ? "U" : "A";
    const char* kb = reciprocal ? "V" : "B";
    if (!v.contains(ka) || !v.contains(kb)) fail(ErrorKind::InputError, "custom job needs A and B (or U and V)");
    const Field a = field_input(v[ka]), b = field_input(v[kb]);
    if (!(a.spec == b.spec)) fail(ErrorKind::GridMismatch, "the two fields are on different grids");
    inst.sf = reciprocal ? build_from_reciprocals(a, b, bo) : build_from_curvatures(a, b, bo);
  } else if (fam == "revolution") {
    inst.R = get_or<double>(v, "R", 2.0);
    inst.r = get_or<double>(v, "r", 0.5);
    if (!(inst.R > inst.r && inst.r > 0)) fail(ErrorKind::InputError, "revolution needs R > r > 0");
    const GridSpec g = rect_from(v, GridSpec{n, n, 0.3, 1.3, 0, 2}, n);
    const double R = inst.R, r = inst.r;
    const Field A = Field::from_source(g, [r](double, double, int k) { return Jet(1 / r, k); });
    const Field B = Field::from_source(g, [R, r](double x, double, int k) {
      const Jet X = Jet::var_x(x, k);
      return cos(X) / (R + r * cos(X));
    });
    inst.sf = build_from_curvatures(A, B, bo);
  } else {
    fail(ErrorKind::InputError, "unknown family '" + fam + "' (type1, type2, custom, revolution)");
  }
  return inst;
}

std::array<double, 3> initial_triple(const Instance& inst, const Coframing& cf) {
  if (inst.initial) return *inst.initial;
  if (inst.family == "type1" && inst.c && inst.pair) {
    const auto cl = abp_closed_form(*inst.pair, *inst.c, cf.s.spec);
    return {cl.a0, cl.b0, cl.p0};
  }
  if (inst.family == "type2" && inst.lambda && inst.chart == "natural") {
    const auto cl = abp_closed_form_t2(cf.s.spec, inst.lambda->c());
    return {cl.a0, cl.b0, cl.p0};
  }
  return {1, 1, 0};
}

RealizeResult realize_instance(const Instance& inst) {
  RealizeResult out;
  VerificationReport& rep = out.report;
  const double ts = inst.settings.tol_scale;
  ClassifyOptions co;
  co.tol_scale = ts;

  if (inst.torus) {
    TorusOptions to;
    to.n = std::max(8, inst.settings.resolution / 4 * 4);
    const TorusResult tr = torus_realize(*inst.lambda, *inst.potential, to);
    out.classification = classify(inst.sf, co);
    rep.add("period", tr.period_error, tr.tol_period);
    rep.add("half_turn_symmetry", tr.tau_error, tr.tol_period);
    rep.require("prescribed_positive", tr.positive);
    const RecoveredShape rs = recover_shape_operator(tr.mesh);
    double lo = std::numeric_limits<double>::infinity();
    for (const Field* f : {&rs.A, &rs.B})
      for (int k = 0; k < f->values.size(); ++k)
        if (std::isfinite(f->values(k))) lo = std::min(lo, f->values(k));
    rep.add_at_least("recovered_min_curvature", lo, 0.0).pass = lo > 0;
    add_mesh_checks(rep, tr.mesh, ts);
    rep.metric("umbilic_count", tr.umbilic_count);
    rep.metric("umbilic_circle", tr.umbilic_circle ? 1 : 0);
    rep.metric("diameter", tr.diameter);
    out.mesh = tr.mesh;
    out.quotient = tr.quotient;
    const ToralPatch tp = toral_patch(*inst.lambda, *inst.potential, tr.mesh.spec, true);
    out.sf = tp.sf;
    out.frame = tp.frame;
    return out;
  }

  out.classification = classify(inst.sf, co);
  const Verdict verdict = out.classification.verdict;
  const GridSpec& g = inst.sf.spec;
  const double h2 = g.h() * g.h();

  if (inst.family == "type2") {
    rep.require("verdict_type2", verdict == Verdict::TypeII);
    RealizeOptions ro;
    ro.primitive.tol_closed = -1;
    if (ts != 1.0 && inst.sampled_path) ro.primitive.tol_closed = 50 * h2 * ts;
    const Realization rz = realize_surface(inst.sf, *inst.frame, ro);
    out.mesh = rz.mesh;
    out.sf = inst.sf;
    out.frame = inst.frame;
    rep.metric("path_discrepancy", rz.path_discrepancy);
    rep.metric("closedness", rz.closedness);
    const LambdaTriple& l = *inst.lambda;
    const auto [bi, bj] = g.center();
    double Xb = g.x(bi), Yb = g.y(bj);
    if (inst.chart == "toral") {
      const ToralMap tm = toral_unfold(l);
      Xb = tm.X(g.x(bi), g.y(bj), 0).value();
      Yb = tm.Y(g.x(bi), g.y(bj), 0).value();
    } else {
      rep.add("confocal", confocal_check(inst.frame->e3, l), 1e-10 * ts);
    }
    const std::string kind = inst.potential->kind;
    if (kind == "quadric") {
      translate_to(out.mesh, quadric_closed_form(l, Xb, Yb));
      rep.add("implicit_hyperboloid", implicit_check(out.mesh, "hyperboloid", l).residual,
              (inst.sampled_path ? 1e-4 : 1e-6) * ts);
    } else if (kind == "log") {
      translate_to(out.mesh, minimal_closed_form(l, Xb, Yb));
      rep.add("implicit_minimal", implicit_check(out.mesh, "minimal_t2", l).residual, 1e-5 * ts);
      const RecoveredShape rs = recover_shape_operator(out.mesh);
      double hmax = 0, amax = 0;
      for (int k = 0; k < rs.A.values.size(); ++k)
        if (std::isfinite(rs.A.values(k))) {
          hmax = std::max(hmax, std::abs(rs.A.values(k) + rs.B.values(k)));
          amax = std::max(amax, std::abs(rs.A.values(k)));
        }
      rep.add("mean_curvature", hmax / amax, 1e-4 * ts);
    }
    add_mesh_checks(rep, out.mesh, ts);
    return out;
  }

  if (inst.family == "revolution") {
    rep.require("verdict_molding", verdict == Verdict::DegenerateMolding_Ay0);
    DegenerateOptions o;
    const auto [bi, bj] = g.center();
    o.u0 = 1 / (inst.r * inst.r);
    o.b0 = 1 / std::pow(inst.R + inst.r * std::cos(g.x(bi)), 2);
    const DegenerateResult dr = degenerate_realize(inst.sf, o, co);
    out.mesh = dr.mesh;
    rep.require("one_parameter_branch", dr.family.branch == MoldingFamily::Branch::OneParameter);
    std::vector<Vec3> p, q;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (!dr.mesh.mask(i, j)) continue;
        p.push_back(dr.mesh.point(i, j));
        const double ph = g.x(i), th = g.y(j), rr = inst.R + inst.r * std::cos(ph);
        q.push_back(Vec3(rr * std::cos(th), rr * std::sin(th), inst.r * std::sin(ph)));
      }
    const Similarity al = align_similarity(p, q, true);
    double dmax = 0;
    for (size_t k = 0; k < p.size(); ++k) dmax = std::max(dmax, (al.scale * al.R * p[k] + al.t - q[k]).norm());
    rep.add("torus_distance", dmax, 1e-4 * ts);
    rep.add("similarity_scale", std::abs(al.scale - 1), 1e-4 * ts);
    add_mesh_checks(rep, out.mesh, ts);
    return out;
  }

  switch (verdict) {
    case Verdict::TypeI_first:
    case Verdict::TypeI_dual:
    case Verdict::TypeII: {
      const CoframeData cd = coframe_data(inst.sf);
      const auto t = initial_triple(inst, cd.cf);
      FrobeniusSolution sol;
      out.mesh = frobenius_mesh(inst.sf, cd, system_for(verdict), t, &sol);
      rep.metric("cross_path", sol.cross_path);
      rep.metric("governing_residual", governing_residual(sol, cd.cf, cd.K, system_for(verdict)));
      if (sol.positivity_lost) rep.notes.push_back("positivity lost; mask truncated");
      if (inst.family == "type1" && inst.c && !inst.initial) {
        const auto cl = abp_closed_form(*inst.pair, *inst.c, g);
        rep.add("closed_form_a", sup_rel(sol.a, cl.a, sol.positive), 100 * h2 * ts);
        rep.add("closed_form_b", sup_rel(sol.b, cl.b, sol.positive), 100 * h2 * ts);
      }
      if (verdict != Verdict::TypeII) {
        const VectorField& e3 = out.mesh.frame.e3;
        if (verdict == Verdict::TypeI_first && sol.positive.all()) {
          rep.add("spherical_circles", circle_check(e3).planarity, 100 * h2 * ts);
          rep.add("geodesic_curvature", geodesic_curvature_check(e3, sol.a), 100 * h2 * ts);
        }
      }
      out.solution = sol;
      break;
    }
    case Verdict::DegenerateMolding_Ay0:
    case Verdict::DegenerateMolding_Bx0: {
      const json& v = inst.description;
      DegenerateOptions o;
      o.u0 = get_or<double>(v, "u0", 1.0);
      o.b0 = get_or<double>(v, "b0", 1.0);
      out.mesh = degenerate_realize(inst.sf, o, co).mesh;
      break;
    }
    case Verdict::Cylinder:
      out.mesh = cylinder_realize(inst.sf);
      break;
    case Verdict::Generic:
      fail(ErrorKind::NoRealization, "generic operator: no flexible family to realize");
  }
  add_mesh_checks(rep, out.mesh, ts);
  return out;
}

FamilyResult family_instance(const Instance& inst, std::vector<std::array<double, 3>> triples, int count) {
  FamilyResult out;
  ClassifyOptions co;
  co.tol_scale = inst.settings.tol_scale;
  const ClassificationReport cr = classify(inst.sf, co);
  if (cr.verdict != Verdict::TypeI_first && cr.verdict != Verdict::TypeI_dual && cr.verdict != Verdict::TypeII)
    fail(ErrorKind::NoRealization, std::string("family needs a flexible verdict, got ") + to_string(cr.verdict));
  const FrobeniusSystem sys = system_for(cr.verdict);
  const CoframeData cd = coframe_data(inst.sf);
  if (triples.empty()) {
    const auto t0 = initial_triple(inst, cd.cf);
    std::mt19937_64 rng(inst.settings.seed);
    std::uniform_real_distribution<double> u(-1, 1);
    triples.push_back(t0);
    // the system is affine in the triple: the solution at t0 plus three unit responses give all others
    const FrobeniusSolution s0 = frobenius_integrate(cd.cf, cd.K, sys, t0[0], t0[1], t0[2]);
    std::array<Eigen::ArrayXXd, 3> da, db;
    for (int k = 0; k < 3; ++k) {
      std::array<double, 3> t = t0;
      t[k] += 1;
      const FrobeniusSolution s = frobenius_integrate(cd.cf, cd.K, sys, t[0], t[1], t[2]);
      da[k] = s.a.values - s0.a.values;
      db[k] = s.b.values - s0.b.values;
    }
    auto fields_of = [&](const std::array<double, 3>& t) {
      std::pair<Eigen::ArrayXXd, Eigen::ArrayXXd> ab{s0.a.values, s0.b.values};
      for (int k = 0; k < 3; ++k) {
        ab.first += (t[k] - t0[k]) * da[k];
        ab.second += (t[k] - t0[k]) * db[k];
      }
      return ab;
    };
    const double fa = s0.a.values.minCoeff(), fb = s0.b.values.minCoeff();
    // farthest of 16 admissible candidates from the triples already taken, measured by the first
    // fundamental form E = (U s)^2 / a, G = (V t)^2 / b the triple will produce
    const Eigen::ArrayXXd us2 = (inst.sf.U.values * cd.cf.s.values).square();
    const Eigen::ArrayXXd vt2 = (inst.sf.V.values * cd.cf.t.values).square();
    using Forms = std::pair<Eigen::ArrayXXd, Eigen::ArrayXXd>;
    auto forms_of = [&](const Forms& ab) { return Forms{us2 / ab.first, vt2 / ab.second}; };
    std::vector<Forms> taken{forms_of(fields_of(t0))};
    auto separation = [&](const Forms& eg) {
      double d = 1e300;
      for (const auto& q : taken) {
        const double sc = std::max({eg.first.maxCoeff(), eg.second.maxCoeff(), q.first.maxCoeff(), q.second.maxCoeff()});
        d = std::min(d, std::max((eg.first - q.first).abs().maxCoeff(), (eg.second - q.second).abs().maxCoeff()) / sc);
      }
      return d;
    };
    int attempts = 0;
    while (int(triples.size()) < count) {
      std::optional<std::array<double, 3>> best;
      double best_sep = -1;
      for (int found = 0; found < 16;) {
        if (++attempts > 256 * count) fail(ErrorKind::NoRealization, "no admissible triple near the base triple");
        std::array<double, 3> t{t0[0] * (1 + 0.6 * u(rng)), t0[1] * (1 + 0.6 * u(rng)),
                                t0[2] + 0.6 * (1 + std::abs(t0[2])) * u(rng)};
        const auto ab = fields_of(t);
        // keep a and b away from zero so the recovered operator stays well conditioned
        if (ab.first.minCoeff() < 0.8 * fa || ab.second.minCoeff() < 0.8 * fb) continue;
        ++found;
        const double sep = separation(forms_of(ab));
        if (sep > best_sep) {
          best = t;
          best_sep = sep;
        }
      }
      triples.push_back(*best);
      taken.push_back(forms_of(fields_of(*best)));
    }
  }
  out.triples = triples;
  for (const auto& t : triples) out.meshes.push_back(frobenius_mesh(inst.sf, cd, sys, t));
  const GridSpec& g = inst.sf.spec;
  out.S_tol = 100 * g.h() * g.h() * inst.settings.tol_scale;
  std::vector<RecoveredShape> rs;
  for (const auto& m : out.meshes) {
    add_mesh_checks(out.report, m, inst.settings.tol_scale);
    rs.push_back(recover_shape_operator(m));
  }
  const size_t n = out.meshes.size();
  out.matrix.assign(n, std::vector<Noncongruence>(n));
  bool all_noncongruent = true;
  for (size_t a = 0; a < n; ++a)
    for (size_t b = a + 1; b < n; ++b) {
      out.matrix[a][b] = out.matrix[b][a] = noncongruence_check(out.meshes[a], out.meshes[b]);
      all_noncongruent = all_noncongruent && out.matrix[a][b].noncongruent;
      // recovered S on the common nodes
      const auto& ra = rs[a];
      const auto& rb = rs[b];
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          const int ia = i - ra.forms.rect.i0, ja = j - ra.forms.rect.j0;
          const int ib = i - rb.forms.rect.i0, jb = j - rb.forms.rect.j0;
          if (ia < 0 || ja < 0 || ia >= ra.forms.rect.ni || ja >= ra.forms.rect.nj) continue;
          if (ib < 0 || jb < 0 || ib >= rb.forms.rect.ni || jb >= rb.forms.rect.nj) continue;
          const double A1 = ra.A(ia, ja), A2 = rb.A(ib, jb), B1 = ra.B(ia, ja), B2 = rb.B(ib, jb);
          if (!std::isfinite(A1 + A2 + B1 + B2)) continue;
          out.S_mismatch = std::max({out.S_mismatch, std::abs(A1 - A2) / (1 + std::abs(A1)),
                                     std::abs(B1 - B2) / (1 + std::abs(B1))});
        }
    }
  out.report.require("pairwise_noncongruent", all_noncongruent);
  out.report.add("shape_operator_agreement", out.S_mismatch, out.S_tol);
  out.pass = out.report.pass();
  return out;
}

CompareResult compare_instances(const Instance& a, const Instance& b) {
  CompareResult out;
  if (!(a.sf.spec == b.sf.spec)) fail(ErrorKind::GridMismatch, "compared jobs must share a grid");
  out.a = realize_instance(a);
  out.b = realize_instance(b);
  out.congruence = noncongruence_check(out.a.mesh, out.b.mesh);
  const RecoveredShape ra = recover_shape_operator(out.a.mesh), rb = recover_shape_operator(out.b.mesh);
  const GridSpec& g = a.sf.spec;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int ia = i - ra.forms.rect.i0, ja = j - ra.forms.rect.j0;
      const int ib = i - rb.forms.rect.i0, jb = j - rb.forms.rect.j0;
      if (ia < 0 || ja < 0 || ia >= ra.forms.rect.ni || ja >= ra.forms.rect.nj) continue;
      if (ib < 0 || jb < 0 || ib >= rb.forms.rect.ni || jb >= rb.forms.rect.nj) continue;
      const double A1 = ra.A(ia, ja), A2 = rb.A(ib, jb), B1 = ra.B(ia, ja), B2 = rb.B(ib, jb);
      if (!std::isfinite(A1 + A2 + B1 + B2)) continue;
      out.S_mismatch = std::max({out.S_mismatch, std::abs(A1 - A2) / (1 + std::abs(A1)),
                                 std::abs(B1 - B2) / (1 + std::abs(B1))});
    }
  const double ts = std::max(a.settings.tol_scale, b.settings.tol_scale);
  out.S_tol = 100 * g.h() * g.h() * ts;
  out.report.require("first_passes", out.a.report.pass());
  out.report.require("second_passes", out.b.report.pass());
  out.report.require("noncongruent", out.congruence.noncongruent);
  out.report.add("shape_operator_agreement", out.S_mismatch, out.S_tol);
  out.report.metric("I_difference", out.congruence.I_difference);
  out.report.metric("II_difference", out.congruence.II_difference);
  out.report.metric("shape_residual", out.congruence.shape_residual);
  return out;
}

SurfaceMesh sampled_realization(const ShapeOperatorField& sf, const FrameField& frame) {
  BuildOptions bo;
  bo.allow_umbilics = true;
  const ShapeOperatorField s = build_from_reciprocals(sampled(sf.U), sampled(sf.V), bo);
  RealizeOptions ro;
  ro.primitive.check_closed = false;
  ro.check_path = false;
  return realize_surface(s, sampled_frame(frame.e3), ro).mesh;
}

double realization_error(const SurfaceMesh& p, const SurfaceMesh& q) {
  if (!(p.spec == q.spec)) fail(ErrorKind::GridMismatch, "meshes on different grids");
  const Vec3 pb = p.point(p.bi, p.bj), qb = q.point(q.bi, q.bj);
  Vec3 lo = Vec3::Constant(1e300), hi = -lo;
  double e = 0;
  for (int j = 0; j < p.spec.ny; ++j)
    for (int i = 0; i < p.spec.nx; ++i) {
      if (!p.mask(i, j) || !q.mask(i, j)) continue;
      const Vec3 a = p.point(i, j) - pb, b = q.point(i, j) - qb;
      if (!a.allFinite() || !b.allFinite()) continue;
      e = std::max(e, (a - b).norm());
      lo = lo.cwiseMin(b);
      hi = hi.cwiseMax(b);
    }
  return e / std::max((hi - lo).norm(), 1e-300);
}

json to_json(const VerificationReport& r) {
  json j;
  j["pass"] = r.pass();
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"value", number(c.value)},
                      {c.lower_bound ? "min" : "tol", number(c.tol)},
                      {"pass", c.pass}});
  j["checks"] = std::move(checks);
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = number(v);
  j["metrics"] = std::move(m);
  if (std::isfinite(r.convergence_order)) j["convergence_order"] = r.convergence_order;
  j["notes"] = r.notes;
  return j;
}

json to_json(const Noncongruence& n) {
  return json{{"I_difference", number(n.I_difference)},
              {"II_difference", number(n.II_difference)},
              {"shape_residual", number(n.shape_residual)},
              {"noncongruent", n.noncongruent},
              {"congruent", n.congruent}};
}

int exit_code_for(const Error& e) { return is_input_kind(e.kind()) ? 2 : 3; }

}  // namespace preshape
