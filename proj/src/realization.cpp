#include "preshape/realization.hpp"

#include <cmath>
#include <limits>

#include "preshape/calculus.hpp"

namespace preshape {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Field nan_field(const GridSpec& s) { return Field(s, Field::Array::Constant(s.nx, s.ny, kNaN)); }

// value at (x, y); node values when the point is a node
double value_at(const Field& f, double x, double y, int i, int j) {
  if (i >= 0 && j >= 0) return f(i, j);
  return f.at(x, y);
}

struct KSample {
  double s, t, K1, K2, K11, K22;
};

KSample k_sample(const Coframing& cf, const StructureFunctions& K, FrobeniusSystem sys, double x, double y, int i,
                 int j) {
  KSample r{};
  r.s = value_at(cf.s, x, y, i, j);
  r.t = value_at(cf.t, x, y, i, j);
  if (sys == FrobeniusSystem::Second) return r;
  if (sys != FrobeniusSystem::First) r.K1 = value_at(K.K1, x, y, i, j);
  if (sys != FrobeniusSystem::Dual) r.K2 = value_at(K.K2, x, y, i, j);
  if (sys == FrobeniusSystem::General) {
    r.K11 = value_at(K.K11, x, y, i, j);
    r.K22 = value_at(K.K22, x, y, i, j);
  }
  return r;
}

Vec3 mesh_extent(const VectorField& x, const Mask& m) {
  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  for (int j = 0; j < int(m.cols()); ++j)
    for (int i = 0; i < int(m.rows()); ++i) {
      if (!m(i, j)) continue;
      const Vec3 p = at_node(x, i, j);
      if (!p.allFinite()) continue;
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  return (hi - lo).cwiseMax(0.0);
}

}  // namespace

const char* to_string(FrobeniusSystem s) {
  switch (s) {
    case FrobeniusSystem::First: return "first";
    case FrobeniusSystem::Dual: return "dual";
    case FrobeniusSystem::Second: return "second";
    case FrobeniusSystem::General: return "general";
  }
  return "?";
}

FrobeniusSystem system_for(Verdict v) {
  switch (v) {
    case Verdict::TypeI_first: return FrobeniusSystem::First;
    case Verdict::TypeI_dual: return FrobeniusSystem::Dual;
    case Verdict::TypeII: return FrobeniusSystem::Second;
    default: fail(ErrorKind::PreconditionViolation, std::string("no Frobenius system for verdict ") + to_string(v));
  }
}

Eigen::Vector3d frobenius_rhs(FrobeniusSystem sys, const Eigen::Vector3d& abp, double K1, double K2, double K11,
                              double K22, bool along_x) {
  const double a = abp(0), b = abp(1), p = abp(2);
  Eigen::Vector3d d;
  switch (sys) {
    case FrobeniusSystem::First:
      if (along_x)
        d << 2 * a + p + 1, -2 * b * (K2 - 1), -(2 * b + (K2 - 2) * (p - 1));
      else
        d << 0, 2 * b - p + 1, 2 * a + p + 1;
      break;
    case FrobeniusSystem::Dual:
      if (along_x)
        d << 2 * a + p + 1, 0, -(2 * b - p + 1);
      else
        d << -2 * a * (K1 - 1), 2 * b - p + 1, 2 * a - (K1 - 2) * (p + 1);
      break;
    case FrobeniusSystem::Second:
      if (along_x)
        d << 2 * a + p + 1, 6 * b, -4 * (2 * b - p + 1);
      else
        d << 6 * a, 2 * b - p + 1, 4 * (2 * a + p + 1);
      break;
    case FrobeniusSystem::General:
      if (along_x)
        d << 2 * a + p + 1, 2 * b * (1 - K2), (2 - K2) * (p - 1) + 2 * (K1 - K2 - K1 * K2 + K22) * b;
      else
        d << 2 * a * (1 - K1), 2 * b - p + 1, (2 - K1) * (p + 1) + 2 * (K1 - K2 + K1 * K2 - K11) * a;
      break;
  }
  return d;
}

namespace {

// one line of RK4 from node (i0, j0) in direction step (+1/-1) along x or y
void frobenius_line(const Coframing& cf, const StructureFunctions& K, FrobeniusSystem sys, int i0, int j0,
                    bool along_x, int dir, int substeps, Field::Array& A, Field::Array& B, Field::Array& P,
                    Mask& reached) {
  const GridSpec& s = cf.s.spec;
  const int n = along_x ? s.nx : s.ny;
  const double h = (along_x ? s.hx() : s.hy()) * dir / substeps;
  Eigen::Vector3d y(A(i0, j0), B(i0, j0), P(i0, j0));
  auto rhs = [&](double u, const Eigen::Vector3d& v, int ni, int nj) {
    const double x = along_x ? u : s.x(i0), yy = along_x ? s.y(j0) : u;
    const KSample k = k_sample(cf, K, sys, x, yy, ni, nj);
    return Eigen::Vector3d((along_x ? k.s : k.t) * frobenius_rhs(sys, v, k.K1, k.K2, k.K11, k.K22, along_x));
  };
  int k = along_x ? i0 : j0;
  while (true) {
    const int kn = k + dir;
    if (kn < 0 || kn >= n) break;
    const double u0 = along_x ? s.x(k) : s.y(k);
    for (int m = 0; m < substeps; ++m) {
      const double u = u0 + m * h;
      const bool start_node = m == 0, end_node = m + 1 == substeps;
      const int si = start_node ? (along_x ? k : i0) : -1, sj = start_node ? (along_x ? j0 : k) : -1;
      const int ei = end_node ? (along_x ? kn : i0) : -1, ej = end_node ? (along_x ? j0 : kn) : -1;
      const Eigen::Vector3d k1 = rhs(u, y, si, sj);
      const Eigen::Vector3d k2 = rhs(u + h / 2, y + h / 2 * k1, -1, -1);
      const Eigen::Vector3d k3 = rhs(u + h / 2, y + h / 2 * k2, -1, -1);
      const Eigen::Vector3d k4 = rhs(u + h, y + h * k3, ei, ej);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const int ii = along_x ? kn : i0, jj = along_x ? j0 : kn;
    if (!y.allFinite() || !(y(0) > 0) || !(y(1) > 0)) break;
    A(ii, jj) = y(0);
    B(ii, jj) = y(1);
    P(ii, jj) = y(2);
    reached(ii, jj) = true;
    k = kn;
  }
}

void frobenius_sweep(const Coframing& cf, const StructureFunctions& K, FrobeniusSystem sys, int bi, int bj,
                     bool row_first, int substeps, Field::Array& A, Field::Array& B, Field::Array& P, Mask& reached) {
  const GridSpec& s = cf.s.spec;
  if (row_first) {
    frobenius_line(cf, K, sys, bi, bj, true, 1, substeps, A, B, P, reached);
    frobenius_line(cf, K, sys, bi, bj, true, -1, substeps, A, B, P, reached);
    for (int i = 0; i < s.nx; ++i) {
      if (!reached(i, bj)) continue;
      frobenius_line(cf, K, sys, i, bj, false, 1, substeps, A, B, P, reached);
      frobenius_line(cf, K, sys, i, bj, false, -1, substeps, A, B, P, reached);
    }
  } else {
    frobenius_line(cf, K, sys, bi, bj, false, 1, substeps, A, B, P, reached);
    frobenius_line(cf, K, sys, bi, bj, false, -1, substeps, A, B, P, reached);
    for (int j = 0; j < s.ny; ++j) {
      if (!reached(bi, j)) continue;
      frobenius_line(cf, K, sys, bi, j, true, 1, substeps, A, B, P, reached);
      frobenius_line(cf, K, sys, bi, j, true, -1, substeps, A, B, P, reached);
    }
  }
}

}  // namespace

FrobeniusSolution frobenius_integrate(const Coframing& cf, const StructureFunctions& K, FrobeniusSystem sys,
                                      double a0, double b0, double p0, FrobeniusOptions opt) {
  if (!(a0 > 0) || !(b0 > 0)) fail(ErrorKind::InputError, "initial a and b must be positive");
  if (opt.substeps < 1) fail(ErrorKind::InputError, "substeps must be positive");
  const GridSpec& s = cf.s.spec;
  const auto [bi, bj] = s.center();
  auto run = [&](bool row_first, Field::Array& A, Field::Array& B, Field::Array& P, Mask& reached) {
    A = Field::Array::Constant(s.nx, s.ny, kNaN);
    B = A;
    P = A;
    reached = full_mask(s, false);
    A(bi, bj) = a0;
    B(bi, bj) = b0;
    P(bi, bj) = p0;
    reached(bi, bj) = true;
    frobenius_sweep(cf, K, sys, bi, bj, row_first, opt.substeps, A, B, P, reached);
  };
  Field::Array A, B, P;
  Mask reached;
  run(true, A, B, P, reached);

  FrobeniusSolution sol;
  sol.system = to_string(sys);
  sol.a = Field(s, A);
  sol.b = Field(s, B);
  sol.p = Field(s, P);
  sol.a0 = a0;
  sol.b0 = b0;
  sol.p0 = p0;
  sol.bi = bi;
  sol.bj = bj;
  sol.positive = reached;
  sol.positivity_lost = !reached.all();

  if (opt.cross_path) {
    Field::Array A2, B2, P2;
    Mask r2;
    run(false, A2, B2, P2, r2);
    double d = 0;
    for (int j = 0; j < s.ny; ++j)
      for (int i = 0; i < s.nx; ++i) {
        if (!reached(i, j) || !r2(i, j)) continue;
        d = std::max({d, std::abs(A(i, j) - A2(i, j)) / (1 + std::abs(A(i, j))),
                      std::abs(B(i, j) - B2(i, j)) / (1 + std::abs(B(i, j))),
                      std::abs(P(i, j) - P2(i, j)) / (1 + std::abs(P(i, j)))});
      }
    sol.cross_path = d;
  }
  return sol;
}

double governing_residual(const FrobeniusSolution& sol, const Coframing& cf, const StructureFunctions& K,
                          FrobeniusSystem sys) {
  const GridSpec& s = sol.a.spec;
  std::array<Field, 3> f = {sampled(sol.a), sampled(sol.b), sampled(sol.p)};
  std::array<Field, 3> fx, fy;
  for (int k = 0; k < 3; ++k) {
    fx[k] = partial_x(f[k], 4);
    fy[k] = partial_y(f[k], 4);
  }
  double r = 0;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      if (!sol.positive(i, j)) continue;
      const Eigen::Vector3d v(f[0](i, j), f[1](i, j), f[2](i, j));
      if (!v.allFinite()) continue;
      const KSample k = k_sample(cf, K, sys, s.x(i), s.y(j), i, j);
      const Eigen::Vector3d dx = k.s * frobenius_rhs(sys, v, k.K1, k.K2, k.K11, k.K22, true);
      const Eigen::Vector3d dy = k.t * frobenius_rhs(sys, v, k.K1, k.K2, k.K11, k.K22, false);
      for (int c = 0; c < 3; ++c) {
        const double e = std::max(std::abs(fx[c](i, j) - dx(c)), std::abs(fy[c](i, j) - dy(c)));
        if (std::isfinite(e)) r = std::max(r, e / (1 + std::abs(v(c))));
      }
    }
  return r;
}

FrobeniusSolution affine_family(const FrobeniusSolution& s0, const FrobeniusSolution& s1, double t) {
  if (!(s0.a.spec == s1.a.spec)) fail(ErrorKind::GridMismatch, "affine family of solutions on different grids");
  if (s0.system != s1.system) fail(ErrorKind::PreconditionViolation, "affine family across different systems");
  FrobeniusSolution r = s0;
  auto mix = [t](const Field& a, const Field& b) { return Field(a.spec, (1 - t) * a.values + t * b.values); };
  r.a = mix(s0.a, s1.a);
  r.b = mix(s0.b, s1.b);
  r.p = mix(s0.p, s1.p);
  r.a0 = (1 - t) * s0.a0 + t * s1.a0;
  r.b0 = (1 - t) * s0.b0 + t * s1.b0;
  r.p0 = (1 - t) * s0.p0 + t * s1.p0;
  r.positive = s0.positive && s1.positive && (r.a.values > 0) && (r.b.values > 0);
  r.positivity_lost = !r.positive.all();
  r.cross_path = std::max(s0.cross_path, s1.cross_path);
  return r;
}

// ---------------------------------------------------------------------------------------------
// frames

namespace {

using State = Eigen::Matrix<double, 12, 1>;

State frame_rhs(const ConnectionForms& w, const State& st) {
  const Vec3 e1 = st.segment<3>(0), e2 = st.segment<3>(3), e3 = st.segment<3>(6);
  State d;
  d.segment<3>(0) = -w.w12 * e2 + w.w31 * e3;
  d.segment<3>(3) = w.w12 * e1 + w.w32 * e3;
  d.segment<3>(6) = -w.w31 * e1 - w.w32 * e2;
  d.segment<3>(9) = w.w1 * e1 + w.w2 * e2;
  return d;
}

void frame_line(const GridSpec& s, const ConnectionFn& w, int i0, int j0, bool along_x, int dir, int substeps,
                const Mask& valid, std::vector<State>& out, Mask& reached) {
  const int n = along_x ? s.nx : s.ny;
  const double h = (along_x ? s.hx() : s.hy()) * dir / substeps;
  State y = out[i0 + s.nx * j0];
  auto rhs = [&](double u, const State& v) {
    const double x = along_x ? u : s.x(i0), yy = along_x ? s.y(j0) : u;
    return frame_rhs(w(x, yy, along_x), v);
  };
  int k = along_x ? i0 : j0;
  while (true) {
    const int kn = k + dir;
    if (kn < 0 || kn >= n) break;
    const int ii = along_x ? kn : i0, jj = along_x ? j0 : kn;
    if (!valid(ii, jj)) break;
    const double u0 = along_x ? s.x(k) : s.y(k);
    for (int m = 0; m < substeps; ++m) {
      const double u = u0 + m * h;
      const State k1 = rhs(u, y);
      const State k2 = rhs(u + h / 2, y + h / 2 * k1);
      const State k3 = rhs(u + h / 2, y + h / 2 * k2);
      const State k4 = rhs(u + h, y + h * k3);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    if (!y.allFinite()) break;
    out[ii + s.nx * jj] = y;
    reached(ii, jj) = true;
    k = kn;
  }
}

}  // namespace

SurfaceMesh integrate_frames(const GridSpec& spec, const ConnectionFn& w, int bi, int bj, const Mask& valid,
                             int substeps) {
  if (!valid(bi, bj)) fail(ErrorKind::PositivityLost, "base node outside the admissible region");
  std::vector<State> st(size_t(spec.nx) * spec.ny, State::Constant(kNaN));
  State s0 = State::Zero();
  s0.segment<3>(0) = Vec3::UnitX();
  s0.segment<3>(3) = Vec3::UnitY();
  s0.segment<3>(6) = Vec3::UnitZ();
  st[bi + spec.nx * bj] = s0;
  Mask reached = full_mask(spec, false);
  reached(bi, bj) = true;
  frame_line(spec, w, bi, bj, true, 1, substeps, valid, st, reached);
  frame_line(spec, w, bi, bj, true, -1, substeps, valid, st, reached);
  for (int i = 0; i < spec.nx; ++i) {
    if (!reached(i, bj)) continue;
    frame_line(spec, w, i, bj, false, 1, substeps, valid, st, reached);
    frame_line(spec, w, i, bj, false, -1, substeps, valid, st, reached);
  }
  SurfaceMesh m;
  m.spec = spec;
  m.bi = bi;
  m.bj = bj;
  m.mask = reached;
  m.umbilic = full_mask(spec, false);
  for (int k = 0; k < 3; ++k) {
    m.frame.e1[k] = nan_field(spec);
    m.frame.e2[k] = nan_field(spec);
    m.frame.e3[k] = nan_field(spec);
    m.x[k] = nan_field(spec);
  }
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const State& v = st[i + spec.nx * j];
      for (int k = 0; k < 3; ++k) {
        m.frame.e1[k].values(i, j) = v(k);
        m.frame.e2[k].values(i, j) = v(3 + k);
        m.frame.e3[k].values(i, j) = v(6 + k);
        m.x[k].values(i, j) = v(9 + k);
      }
    }
  return m;
}

SurfaceMesh integrate_structure(const ShapeOperatorField& sf, const Coframing& cf, const FrobeniusSolution& sol,
                                int substeps) {
  const GridSpec& spec = sf.spec;
  if (!(sol.a.spec == spec)) fail(ErrorKind::GridMismatch, "Frobenius solution on a different grid");
  const Field a = sol.a, b = sol.b, U = sf.U, V = sf.V, s = cf.s, t = cf.t;
  ConnectionFn w = [a, b, U, V, s, t](double x, double y, bool along_x) {
    const double av = a.at(x, y), bv = b.at(x, y);
    const double ra = std::sqrt(av), rb = std::sqrt(bv);
    ConnectionForms f;
    if (along_x) {
      const double sv = s.at(x, y);
      f.w1 = U.at(x, y) * sv / ra;
      f.w31 = sv / ra;
      f.w12 = -std::sqrt(bv / av) * sv;
    } else {
      const double tv = t.at(x, y);
      f.w2 = V.at(x, y) * tv / rb;
      f.w32 = tv / rb;
      f.w12 = std::sqrt(av / bv) * tv;
    }
    return f;
  };
  SurfaceMesh m = integrate_frames(spec, w, sol.bi, sol.bj, sol.positive, substeps);
  m.A = sf.A;
  m.B = sf.B;
  m.umbilic = sf.umbilic.size() ? sf.umbilic : full_mask(spec, false);
  m.label = std::string("frames_") + sol.system;
  return m;
}

// ---------------------------------------------------------------------------------------------
// quadrature realization

Realization realize_surface(const ShapeOperatorField& sf, const FrameField& frame, RealizeOptions opt) {
  const GridSpec& spec = sf.spec;
  const bool analytic = sf.U.analytic() && sf.V.analytic() && frame.e3[0].analytic() && frame.e3[1].analytic() &&
                        frame.e3[2].analytic();
  const auto [bi, bj] = spec.center();
  Realization r;
  r.analytic = analytic;
  r.mesh.spec = spec;
  r.mesh.bi = bi;
  r.mesh.bj = bj;
  r.mesh.frame = frame;
  r.mesh.A = sf.A;
  r.mesh.B = sf.B;
  r.mesh.mask = full_mask(spec, true);
  r.mesh.umbilic = sf.umbilic.size() ? sf.umbilic : full_mask(spec, false);
  PrimitiveOptions po = opt.primitive;
  if (!analytic && po.accuracy < 4) po.accuracy = 4;
  double tol_closed = 0;
  for (int k = 0; k < 3; ++k) {
    OneForm2D w;
    if (analytic) {
      auto U = sf.U.source, V = sf.V.source, e = frame.e3[k].source;
      w.px = Field::from_source(spec, [U, e](double x, double y, int n) { return -(U(x, y, n) * e(x, y, n + 1).dx()); });
      w.py = Field::from_source(spec, [V, e](double x, double y, int n) { return -(V(x, y, n) * e(x, y, n + 1).dy()); });
    } else {
      const Field ex = partial_x(sampled(frame.e3[k]), 4), ey = partial_y(sampled(frame.e3[k]), 4);
      w.px = Field(spec, -(sf.U.values * ex.values));
      w.py = Field(spec, -(sf.V.values * ey.values));
    }
    tol_closed = po.tol_closed > 0 ? po.tol_closed : default_tol_closed(w.px);
    const auto prim = path_primitive(w, bi, bj, po);
    r.mesh.x[k] = prim.F;
    r.path_discrepancy = std::max(r.path_discrepancy, prim.path_discrepancy);
    r.closedness = std::max(r.closedness, prim.max_residual);
  }
  const double diam = mesh_extent(r.mesh.x, r.mesh.mask).norm();
  const double tol_path = opt.tol_path > 0 ? opt.tol_path : 10 * tol_closed * std::max(diam, 1e-300);
  if (opt.check_path && r.path_discrepancy > tol_path)
    fail(ErrorKind::NotClosed, "path discrepancy " + std::to_string(r.path_discrepancy) + " exceeds " +
                                   std::to_string(tol_path));
  r.mesh.label = analytic ? "quadrature_analytic" : "quadrature_fd";
  return r;
}

void translate_to(SurfaceMesh& m, const Vec3& p) {
  const Vec3 d = p - m.point(m.bi, m.bj);
  for (int k = 0; k < 3; ++k) {
    m.x[k].values += d(k);
    m.x[k].source = nullptr;
  }
}

// ---------------------------------------------------------------------------------------------
// torus

ToralPatch toral_patch(const LambdaTriple& l, const EulerPotential& pot, const GridSpec& spec, bool allow_umbilics) {
  const ToralMap tm = toral_unfold(l);
  auto reciprocal_source = [tm, pot](bool dx) {
    return Source([tm, pot, dx](double x, double y, int n) {
      const Jet X = tm.X(x, y, n), Y = tm.Y(x, y, n);
      const Jet G = pot.jet(X.value(), Y.value(), n + 1);
      return compose2(dx ? G.dx() : G.dy(), X, Y);
    });
  };
  ToralPatch p;
  BuildOptions bo;
  bo.allow_umbilics = allow_umbilics;
  p.sf = build_from_reciprocals(Field::from_source(spec, reciprocal_source(true)),
                                Field::from_source(spec, reciprocal_source(false)), bo);
  p.X = Field::from_source(spec, tm.X);
  p.Y = Field::from_source(spec, tm.Y);
  const VectorField e3 = vector_field(spec, tm.e3);
  VectorField ex, ey;
  for (int k = 0; k < 3; ++k) {
    ex[k] = partial_x(e3[k]);
    ey[k] = partial_y(e3[k]);
  }
  p.frame = frame_from_normal(e3, ex, ey);
  return p;
}

TorusResult torus_realize(const LambdaTriple& l, const EulerPotential& pot, TorusOptions opt) {
  l.validate();
  if (opt.n < 8 || opt.n % 4 != 0) fail(ErrorKind::InputError, "torus resolution must be a multiple of 4, at least 8");
  const int N = opt.n;
  const GridSpec spec{N + 1, N + 1, -M_PI, M_PI, -M_PI, M_PI};
  const ToralMap tm = toral_unfold(l);
  auto reciprocal_source = [tm, pot](bool dx) {
    return [tm, pot, dx](double x, double y, int n) {
      const Jet X = tm.X(x, y, n), Y = tm.Y(x, y, n);
      const Jet G = pot.jet(X.value(), Y.value(), n + 1);
      return compose2(dx ? G.dx() : G.dy(), X, Y);
    };
  };
  const Source Us = reciprocal_source(true), Vs = reciprocal_source(false);
  TorusResult res;
  Field U, V;
  try {
    U = Field::from_source(spec, Us);
    V = Field::from_source(spec, Vs);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DomainViolation || e.kind() == ErrorKind::NonFinite)
      fail(ErrorKind::PeriodNonzero, std::string("potential singular on the torus, periods undefined (") + e.what() + ")");
    throw;
  }
  if (!U.all_finite() || !V.all_finite())
    fail(ErrorKind::PeriodNonzero, "potential singular on the torus, periods undefined");

  const Field Xf = Field::from_source(spec, tm.X), Yf = Field::from_source(spec, tm.Y);
  const double scale = std::max({std::abs(l.l1), std::abs(l.l2), std::abs(l.l3)});
  Mask umb = full_mask(spec, false);
  double dmin = 1e300, dmax = -1e300;
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const double gap = Xf(i, j) - Yf(i, j);
      umb(i, j) = std::abs(gap) <= 1e-12 * (1 + scale);
      if (umb(i, j)) continue;
      if (!(U(i, j) > 0) || !(V(i, j) > 0)) res.positive = false;
      // ignore nodes next to the branch points where U - V passes through zero with X - Y
      const double d = (U(i, j) - V(i, j)) / gap;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  res.umbilic_circle = dmin < 0 && dmax > 0;

  SurfaceMesh m;
  m.spec = spec;
  m.bi = N / 2;
  m.bj = N / 2;
  m.mask = full_mask(spec, true);
  m.umbilic = umb;
  m.label = "torus_" + pot.kind;
  const VectorField e3 = vector_field(spec, tm.e3);
  PrimitiveOptions po;
  po.gauss_points = 16;
  for (int k = 0; k < 3; ++k) {
    const VectorSource es = tm.e3;
    OneForm2D w;
    w.px = Field::from_source(spec, [Us, es, k](double x, double y, int n) { return -(Us(x, y, n) * es(x, y, n + 1)[k].dx()); });
    w.py = Field::from_source(spec, [Vs, es, k](double x, double y, int n) { return -(Vs(x, y, n) * es(x, y, n + 1)[k].dy()); });
    const auto prim = path_primitive(w, m.bi, m.bj, po);
    m.x[k] = prim.F;
  }
  VectorField ex, ey;
  for (int k = 0; k < 3; ++k) {
    ex[k] = partial_x(e3[k]);
    ey[k] = partial_y(e3[k]);
  }
  m.frame = frame_from_normal(e3, ex, ey);
  m.A = Field(spec, 1.0 / U.values);
  m.B = Field(spec, 1.0 / V.values);

  res.diameter = mesh_extent(m.x, m.mask).norm();
  res.tol_period = opt.tol_period_rel * res.diameter;
  for (int j = 0; j < spec.ny; ++j) res.period_error = std::max(res.period_error, (m.point(N, j) - m.point(0, j)).norm());
  for (int i = 0; i < spec.nx; ++i) res.period_error = std::max(res.period_error, (m.point(i, N) - m.point(i, 0)).norm());
  res.period_x = m.point(N, m.bj) - m.point(0, m.bj);
  res.period_y = m.point(m.bi, N) - m.point(m.bi, 0);
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) res.tau_error = std::max(res.tau_error, (m.point(i, j) - m.point(N - i, N - j)).norm());

  // quotient by (x, y) -> (-x, -y): x in [0, pi]
  const int nq = N / 2 + 1;
  const Rect r{N / 2, 0, nq, N + 1};
  SurfaceMesh q;
  q.spec = sub_spec(spec, r);
  for (int k = 0; k < 3; ++k) {
    q.x[k] = sub_field(m.x[k], r);
    q.frame.e1[k] = sub_field(m.frame.e1[k], r);
    q.frame.e2[k] = sub_field(m.frame.e2[k], r);
    q.frame.e3[k] = sub_field(m.frame.e3[k], r);
  }
  q.frame.flipped_e2 = m.frame.flipped_e2;
  q.A = sub_field(m.A, r);
  q.B = sub_field(m.B, r);
  q.mask = m.mask.block(r.i0, r.j0, r.ni, r.nj);
  q.umbilic = m.umbilic.block(r.i0, r.j0, r.ni, r.nj);
  q.bi = 0;
  q.bj = N / 2;
  q.label = m.label + "_quotient";
  q.weld.resize(size_t(nq) * (N + 1));
  for (int j = 0; j <= N; ++j)
    for (int ii = 0; ii < nq; ++ii) {
      int jj = j == N ? 0 : j;
      if (ii == 0 || ii == nq - 1) jj = std::min(jj, (N - jj) % N);
      q.weld[ii + nq * j] = ii + nq * jj;
    }
  std::vector<int> seen;
  for (int j = 0; j <= N; ++j)
    for (int ii = 0; ii < nq; ++ii)
      if (q.umbilic(ii, j)) {
        const int rep = q.weld[ii + nq * j];
        if (std::find(seen.begin(), seen.end(), rep) == seen.end()) seen.push_back(rep);
      }
  res.umbilic_count = int(seen.size());
  res.mesh = std::move(m);
  res.quotient = std::move(q);
  return res;
}

// ---------------------------------------------------------------------------------------------
// degenerate branches

DegenerateResult degenerate_realize(const ShapeOperatorField& sf_in, DegenerateOptions opt, ClassifyOptions copt) {
  if (!(opt.u0 > 0) || !(opt.b0 > 0)) fail(ErrorKind::InputError, "u0 and b0 must be positive");
  DegenerateResult out;
  out.family = degenerate_molding_solve(sf_in, copt);
  out.swapped = out.family.swapped;
  const ShapeOperatorField sf = out.swapped ? transposed(sf_in) : sf_in;
  const GridSpec& spec = sf.spec;
  const Curve u = out.family.unique_u ? *out.family.unique_u : out.family.solve_u(opt.u0);

  // log b_bar along every row from the base column
  Field Bx;
  if (sf.B.analytic()) {
    Bx = partial_x(sf.B);
  } else {
    Bx = partial_x(sampled(sf.B), 4);
  }
  const auto [bi, bj] = spec.center();
  const Field::Array q = 2 * Bx.values / (sf.B.values - sf.A.values);
  Field::Array a(spec.nx, spec.ny), b(spec.nx, spec.ny), bx(spec.nx, spec.ny);
  for (int j = 0; j < spec.ny; ++j) {
    std::vector<double> row(spec.nx);
    for (int i = 0; i < spec.nx; ++i) row[i] = q(i, j);
    const std::vector<double> L = detail::cumulative(row, spec.hx());
    for (int i = 0; i < spec.nx; ++i) {
      a(i, j) = u(spec.x(i));
      b(i, j) = opt.b0 * std::exp(L[i] - L[bi]);
      bx(i, j) = b(i, j) * q(i, j);
    }
  }
  out.a = Field(spec, a);
  out.b = Field(spec, b);
  const Field af = out.a, bf = out.b, bxf(spec, bx), A = sf.A, B = sf.B;
  ConnectionFn w = [af, bf, bxf, A, B](double x, double y, bool along_x) {
    ConnectionForms f;
    if (along_x) {
      const double ra = std::sqrt(af.at(x, y));
      f.w1 = 1 / ra;
      f.w31 = A.at(x, y) / ra;
    } else {
      const double av = af.at(x, y), bv = bf.at(x, y), rb = std::sqrt(bv);
      f.w2 = 1 / rb;
      f.w32 = B.at(x, y) / rb;
      f.w12 = bxf.at(x, y) * std::sqrt(av) / (2 * bv * rb);
    }
    return f;
  };
  const Mask valid = (out.a.values > 0) && (out.b.values > 0);
  SurfaceMesh m = integrate_frames(spec, w, bi, bj, valid, opt.substeps);
  m.A = sf.A;
  m.B = sf.B;
  m.label = "molding";
  if (out.swapped) {
    SurfaceMesh t;
    t.spec = sf_in.spec;
    for (int k = 0; k < 3; ++k) {
      t.x[k] = transposed(sampled(m.x[k]));
      t.frame.e1[k] = transposed(sampled(m.frame.e2[k]));
      t.frame.e2[k] = transposed(sampled(m.frame.e1[k]));
      t.frame.e3[k] = transposed(sampled(m.frame.e3[k]));
    }
    // the swap reverses orientation; det(e1, e2, e3) = -1 here
    t.frame.flipped_e2 = true;
    t.A = sf_in.A;
    t.B = sf_in.B;
    t.mask = m.mask.transpose();
    t.umbilic = m.umbilic.transpose();
    t.bi = m.bj;
    t.bj = m.bi;
    t.label = "molding_transposed";
    out.a = transposed(out.a);
    out.b = transposed(out.b);
    m = std::move(t);
  }
  out.mesh = std::move(m);
  return out;
}

SurfaceMesh cylinder_realize(const ShapeOperatorField& sf, int substeps) {
  const Field A = sf.A, B = sf.B;
  ConnectionFn w = [A, B](double x, double y, bool along_x) {
    ConnectionForms f;
    if (along_x) {
      f.w1 = 1;
      f.w31 = A.at(x, y);
    } else {
      f.w2 = 1;
      f.w32 = B.at(x, y);
    }
    return f;
  };
  const auto [bi, bj] = sf.spec.center();
  SurfaceMesh m = integrate_frames(sf.spec, w, bi, bj, full_mask(sf.spec, true), substeps);
  m.A = sf.A;
  m.B = sf.B;
  m.label = "cylinder";
  return m;
}

}  // namespace preshape
