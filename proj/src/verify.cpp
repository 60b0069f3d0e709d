#include "preshape/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "preshape/calculus.hpp"

namespace preshape {

namespace {

Rect usable_rect(const SurfaceMesh& m) {
  Mask ok = m.mask;
  for (int j = 0; j < m.spec.ny; ++j)
    for (int i = 0; i < m.spec.nx; ++i)
      if (ok(i, j) && !m.point(i, j).allFinite()) ok(i, j) = false;
  const Rect r = largest_true_rectangle(ok);
  if (r.ni < 5 || r.nj < 5)
    fail(ErrorKind::MaskTooSmall, "largest valid rectangle is " + std::to_string(r.ni) + "x" + std::to_string(r.nj));
  return r;
}

FundamentalForms forms_on(const SurfaceMesh& m, const Rect& r) {
  FundamentalForms f;
  f.rect = r;
  f.spec = sub_spec(m.spec, r);
  const GridSpec& s = f.spec;
  std::array<Field, 3> xu, xv, xuu, xuv, xvv;
  for (int k = 0; k < 3; ++k) {
    const Field c(s, m.x[k].values.block(r.i0, r.j0, r.ni, r.nj));
    xu[k] = partial_x(c, 4);
    xv[k] = partial_y(c, 4);
    xuu[k] = partial_x(xu[k], 4);
    xuv[k] = partial_y(xu[k], 4);
    xvv[k] = partial_y(xv[k], 4);
  }
  Field::Array E(s.nx, s.ny), F(s.nx, s.ny), G(s.nx, s.ny), L(s.nx, s.ny), M(s.nx, s.ny), N(s.nx, s.ny);
  std::vector<Vec3> normals(size_t(s.nx) * s.ny);
  int agree = 0, disagree = 0;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      const Vec3 a = at_node(xu, i, j), b = at_node(xv, i, j);
      const Vec3 n = a.cross(b).normalized();
      normals[i + s.nx * j] = n;
      if (m.frame.e3[0].values.size()) {
        const Vec3 e = m.normal(r.i0 + i, r.j0 + j);
        if (e.allFinite()) (n.dot(e) >= 0 ? agree : disagree)++;
      }
      E(i, j) = a.dot(a);
      F(i, j) = a.dot(b);
      G(i, j) = b.dot(b);
    }
  const double sign = disagree > agree ? -1.0 : 1.0;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      const Vec3 n = sign * normals[i + s.nx * j];
      L(i, j) = at_node(xuu, i, j).dot(n);
      M(i, j) = at_node(xuv, i, j).dot(n);
      N(i, j) = at_node(xvv, i, j).dot(n);
    }
  f.E = Field(s, E);
  f.F = Field(s, F);
  f.G = Field(s, G);
  f.L = Field(s, L);
  f.M = Field(s, M);
  f.N = Field(s, N);

  // Brioschi
  const Field Eu = partial_x(f.E, 4), Ev = partial_y(f.E, 4), Fu = partial_x(f.F, 4), Fv = partial_y(f.F, 4);
  const Field Gu = partial_x(f.G, 4), Gv = partial_y(f.G, 4);
  const Field Evv = partial_y(Ev, 4), Guu = partial_x(Gu, 4), Fuv = partial_y(Fu, 4);
  Field::Array K(s.nx, s.ny);
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      Eigen::Matrix3d m1, m2;
      m1 << -Evv(i, j) / 2 + Fuv(i, j) - Guu(i, j) / 2, Eu(i, j) / 2, Fu(i, j) - Ev(i, j) / 2,  //
          Fv(i, j) - Gu(i, j) / 2, E(i, j), F(i, j),                                           //
          Gv(i, j) / 2, F(i, j), G(i, j);
      m2 << 0, Ev(i, j) / 2, Gu(i, j) / 2,  //
          Ev(i, j) / 2, E(i, j), F(i, j),   //
          Gu(i, j) / 2, F(i, j), G(i, j);
      const double g = E(i, j) * G(i, j) - F(i, j) * F(i, j);
      K(i, j) = (m1.determinant() - m2.determinant()) / (g * g);
    }
  f.K_intrinsic = Field(s, K);
  return f;
}

}  // namespace

FundamentalForms recover_fundamental_forms(const SurfaceMesh& m) { return forms_on(m, usable_rect(m)); }

RecoveredShape recover_shape_operator(const SurfaceMesh& m) {
  RecoveredShape out;
  out.forms = recover_fundamental_forms(m);
  const FundamentalForms& f = out.forms;
  const GridSpec& s = f.spec;
  Field::Array A(s.nx, s.ny), B(s.nx, s.ny), ang(s.nx, s.ny), H(s.nx, s.ny), K(s.nx, s.ny);
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      Eigen::Matrix2d I, II;
      I << f.E(i, j), f.F(i, j), f.F(i, j), f.G(i, j);
      II << f.L(i, j), f.M(i, j), f.M(i, j), f.N(i, j);
      const int gi = f.rect.i0 + i, gj = f.rect.j0 + j;
      if (m.umbilic.size() && m.umbilic(gi, gj)) {
        // branch points may have a degenerate metric
        A(i, j) = B(i, j) = ang(i, j) = H(i, j) = K(i, j) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      if (!(I.determinant() > 0) || !(I(0, 0) > 0))
        fail(ErrorKind::IndefiniteMetric, "EG - F^2 <= 0 at node (" + std::to_string(gi) + "," + std::to_string(gj) + ")");
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(II, I);
      const Eigen::Vector2d ev = es.eigenvalues();
      const Eigen::Matrix2d V = es.eigenvectors();
      auto cosine = [&](int c) {
        const Eigen::Vector2d v = V.col(c);
        return std::abs(v.dot(I.col(0))) / (std::sqrt(v.dot(I * v)) * std::sqrt(I(0, 0)));
      };
      const double c0 = cosine(0), c1 = cosine(1);
      const int ia = c0 >= c1 ? 0 : 1;
      A(i, j) = ev(ia);
      B(i, j) = ev(1 - ia);
      ang(i, j) = std::acos(std::min(1.0, std::max(c0, c1)));
      H(i, j) = (ev(0) + ev(1)) / 2;
      K(i, j) = ev(0) * ev(1);
    }
  out.A = Field(s, A);
  out.B = Field(s, B);
  out.axis_angle = Field(s, ang);
  out.H = Field(s, H);
  out.K = Field(s, K);
  out.max_axis_angle = ang.isNaN().select(0.0, ang).maxCoeff();
  return out;
}

RoundTrip round_trip(const SurfaceMesh& m, bool skip_umbilic) {
  const RecoveredShape r = recover_shape_operator(m);
  const Rect& rc = r.forms.rect;
  RoundTrip out;
  out.tol = 100 * m.spec.h() * m.spec.h();
  auto near_umbilic = [&](int i, int j) {
    if (!skip_umbilic || !m.umbilic.size()) return false;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int a = i + di, b = j + dj;
        if (a >= 0 && b >= 0 && a < m.spec.nx && b < m.spec.ny && m.umbilic(a, b)) return true;
      }
    return false;
  };
  for (int j = 0; j < rc.nj; ++j)
    for (int i = 0; i < rc.ni; ++i) {
      const int gi = rc.i0 + i, gj = rc.j0 + j;
      if (near_umbilic(gi, gj) || !std::isfinite(r.A(i, j))) continue;
      const double Ag = m.A(gi, gj), Bg = m.B(gi, gj);
      if (std::isfinite(Ag)) out.A_error = std::max(out.A_error, std::abs(r.A(i, j) - Ag) / (1 + std::abs(Ag)));
      if (std::isfinite(Bg)) out.B_error = std::max(out.B_error, std::abs(r.B(i, j) - Bg) / (1 + std::abs(Bg)));
      const double k = r.A(i, j) * r.B(i, j);
      out.gauss = std::max(out.gauss, std::abs(r.forms.K_intrinsic(i, j) - k) / (1 + std::abs(k)));
    }
  out.pass = out.A_error <= out.tol && out.B_error <= out.tol && out.gauss <= out.tol;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Gauss image checks

namespace {

// unit normal of the best plane through pts and the max distance to it
std::pair<Vec3, double> fit_plane(const std::vector<Vec3>& pts, bool through_origin) {
  Vec3 c = Vec3::Zero();
  if (!through_origin) {
    for (const auto& p : pts) c += p;
    c /= double(pts.size());
  }
  Eigen::MatrixXd M(pts.size(), 3);
  for (size_t k = 0; k < pts.size(); ++k) M.row(k) = (pts[k] - c).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinV);
  const Vec3 n = svd.matrixV().col(2);
  double d = 0;
  for (const auto& p : pts) d = std::max(d, std::abs((p - c).dot(n)));
  return {n, d};
}

}  // namespace

CircleCheck circle_check(const VectorField& e3) {
  const GridSpec& s = e3[0].spec;
  CircleCheck out;
  for (int i = 0; i < s.nx; ++i) {
    std::vector<Vec3> pts;
    for (int j = 0; j < s.ny; ++j) pts.push_back(at_node(e3, i, j));
    auto [n, d] = fit_plane(pts, false);
    out.planarity = std::max(out.planarity, d);
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pts) mean += p;
    if (n.dot(mean) < 0) n = -n;
    out.centers.push_back(n);
  }
  out.great_circle = fit_plane(out.centers, true).second;
  return out;
}

double geodesic_curvature_check(const VectorField& e3, const Field& a) {
  const GridSpec& s = e3[0].spec;
  const bool analytic = e3[0].analytic() && e3[1].analytic() && e3[2].analytic();
  std::array<Field, 3> d1, d2;
  if (!analytic)
    for (int k = 0; k < 3; ++k) {
      d1[k] = partial_y(sampled(e3[k]), 4);
      d2[k] = partial_y(d1[k], 4);
    }
  double r = 0;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      Vec3 g, g1, g2;
      if (analytic) {
        for (int k = 0; k < 3; ++k) {
          const Jet jt = e3[k].source(s.x(i), s.y(j), 2);
          g(k) = jt.value();
          g1(k) = jt.derivative(0, 1);
          g2(k) = jt.derivative(0, 2);
        }
      } else {
        g = at_node(e3, i, j);
        g1 = at_node(d1, i, j);
        g2 = at_node(d2, i, j);
      }
      const double kg = std::abs(g.dot(g1.cross(g2))) / std::pow(g1.norm(), 3);
      const double ra = std::sqrt(a(i, j));
      if (std::isfinite(ra)) r = std::max(r, std::abs(kg - ra) / (1 + ra));
    }
  return r;
}

double confocal_check(const VectorField& e3, const LambdaTriple& l) {
  const GridSpec& s = e3[0].spec;
  const double lam[3] = {l.l1, l.l2, l.l3};
  double r = 0;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      const Vec3 e = at_node(e3, i, j);
      double fx = 0, fy = 0;
      for (int k = 0; k < 3; ++k) {
        fx += e(k) * e(k) / (lam[k] - s.x(i));
        fy += e(k) * e(k) / (lam[k] - s.y(j));
      }
      r = std::max({r, std::abs(fx), std::abs(fy)});
    }
  return r;
}

ImplicitCheck implicit_check(const SurfaceMesh& m, const std::string& kind, const LambdaTriple& l) {
  ImplicitCheck out;
  out.kind = kind;
  std::vector<Vec3> pts;
  for (int j = 0; j < m.spec.ny; ++j)
    for (int i = 0; i < m.spec.nx; ++i)
      if (m.mask(i, j) && m.point(i, j).allFinite()) pts.push_back(m.point(i, j));
  if (pts.empty()) fail(ErrorKind::MaskTooSmall, "no valid vertices");
  if (kind == "hyperboloid") {
    const double c = 1 / (l.l1 * l.l2 * l.l3);
    for (const auto& p : pts)
      out.residual = std::max(out.residual, std::abs(l.l1 * p(0) * p(0) + l.l2 * p(1) * p(1) + l.l3 * p(2) * p(2) + c));
    out.params = {l.l1, l.l2, l.l3, c};
  } else if (kind == "minimal_t2") {
    const double k1 = std::sqrt((l.l2 - l.l1) * (l.l3 - l.l1)), k2 = std::sqrt((l.l2 - l.l1) * (l.l3 - l.l2)),
                 k3 = std::sqrt((l.l3 - l.l1) * (l.l3 - l.l2));
    for (const auto& p : pts) {
      const double v = (l.l2 - l.l3) * std::cosh(p(0) * k1) - (l.l3 - l.l1) * std::cos(p(1) * k2) -
                       (l.l1 - l.l2) * std::cosh(p(2) * k3);
      out.residual = std::max(out.residual, std::abs(v));
    }
  } else if (kind == "ellipsoid") {
    // a u^2 + b v^2 + c w^2 + d u + e v + f w = 1
    Eigen::MatrixXd M(pts.size(), 6);
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(pts.size());
    for (size_t k = 0; k < pts.size(); ++k) {
      const Vec3& p = pts[k];
      M.row(k) << p(0) * p(0), p(1) * p(1), p(2) * p(2), p(0), p(1), p(2);
    }
    const Eigen::VectorXd c = M.colPivHouseholderQr().solve(rhs);
    out.residual = (M * c - rhs).cwiseAbs().maxCoeff();
    out.params.assign(c.data(), c.data() + 6);
  } else if (kind == "sphere") {
    // |p|^2 + d.p + e = 0
    Eigen::MatrixXd M(pts.size(), 4);
    Eigen::VectorXd rhs(pts.size());
    for (size_t k = 0; k < pts.size(); ++k) {
      M.row(k) << pts[k](0), pts[k](1), pts[k](2), 1.0;
      rhs(k) = -pts[k].squaredNorm();
    }
    const Eigen::VectorXd c = M.colPivHouseholderQr().solve(rhs);
    const Vec3 ctr = -c.head<3>() / 2;
    const double rad = std::sqrt(ctr.squaredNorm() - c(3));
    for (const auto& p : pts) out.residual = std::max(out.residual, std::abs((p - ctr).norm() - rad));
    out.params = {ctr(0), ctr(1), ctr(2), rad};
  } else {
    fail(ErrorKind::UnknownKind, "unknown implicit check '" + kind + "'");
  }
  return out;
}

Similarity align_similarity(const std::vector<Vec3>& p, const std::vector<Vec3>& q, bool allow_reflection) {
  if (p.size() != q.size() || p.size() < 3) fail(ErrorKind::InputError, "alignment needs matching point sets");
  const double n = double(p.size());
  Vec3 mp = Vec3::Zero(), mq = Vec3::Zero();
  for (size_t k = 0; k < p.size(); ++k) {
    mp += p[k];
    mq += q[k];
  }
  mp /= n;
  mq /= n;
  Mat3 S = Mat3::Zero();
  double vp = 0, vq = 0;
  for (size_t k = 0; k < p.size(); ++k) {
    S += (q[k] - mq) * (p[k] - mp).transpose();
    vp += (p[k] - mp).squaredNorm();
    vq += (q[k] - mq).squaredNorm();
  }
  S /= n;
  vp /= n;
  vq /= n;
  Eigen::JacobiSVD<Mat3> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  if (!allow_reflection && (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) D(2, 2) = -1;
  Similarity out;
  out.R = svd.matrixU() * D * svd.matrixV().transpose();
  out.scale = (svd.singularValues().asDiagonal() * D).trace() / vp;
  out.t = mq - out.scale * out.R * mp;
  double e = 0;
  for (size_t k = 0; k < p.size(); ++k) e += (out.scale * out.R * p[k] + out.t - q[k]).squaredNorm();
  out.rms = std::sqrt(e / n);
  out.extent = std::sqrt(vq);
  return out;
}

Noncongruence noncongruence_check(const SurfaceMesh& a, const SurfaceMesh& b) {
  if (!(a.spec == b.spec)) fail(ErrorKind::GridMismatch, "meshes on different grids");
  SurfaceMesh both = a;
  both.mask = a.mask && b.mask;
  for (int j = 0; j < a.spec.ny; ++j)
    for (int i = 0; i < a.spec.nx; ++i)
      if (!a.point(i, j).allFinite() || !b.point(i, j).allFinite()) both.mask(i, j) = false;
  const Rect r = usable_rect(both);
  const FundamentalForms fa = forms_on(a, r), fb = forms_on(b, r);
  auto diff = [](const Field& x, const Field& y) { return (x.values - y.values).abs().maxCoeff(); };
  const double sI = std::max({fa.E.max_abs(), fa.G.max_abs(), fb.E.max_abs(), fb.G.max_abs()});
  const double sII = std::max({fa.L.max_abs(), fa.N.max_abs(), fb.L.max_abs(), fb.N.max_abs(), 1e-300});
  Noncongruence out;
  out.I_difference = std::max({diff(fa.E, fb.E), diff(fa.F, fb.F), diff(fa.G, fb.G)}) / sI;
  out.II_difference = std::max({diff(fa.L, fb.L), diff(fa.M, fb.M), diff(fa.N, fb.N)}) / sII;
  const RoundTrip ra = round_trip(a), rb = round_trip(b);
  out.shape_residual = std::max({ra.A_error, ra.B_error, rb.A_error, rb.B_error, 1e-15});
  out.noncongruent = out.I_difference > 1e3 * out.shape_residual;
  out.congruent = !out.noncongruent && out.II_difference <= 1e3 * out.shape_residual;
  return out;
}

double convergence_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

double structure_equation_residual(const Coframing& cf, const StructureFunctions& K) {
  const auto [r1, r2] = structure_reconstruction_residual(cf, K, 4);
  return std::max(r1.max_abs(), r2.max_abs());
}

}  // namespace preshape

namespace preshape {

Check& VerificationReport::add(const std::string& name, double value, double tol) {
  checks.push_back(Check{name, value, tol, std::isfinite(value) && value <= tol, false});
  return checks.back();
}

Check& VerificationReport::add_at_least(const std::string& name, double value, double bound) {
  checks.push_back(Check{name, value, bound, std::isfinite(value) && value >= bound, true});
  return checks.back();
}

Check& VerificationReport::require(const std::string& name, bool ok) {
  checks.push_back(Check{name, ok ? 1.0 : 0.0, 1.0, ok, true});
  return checks.back();
}

bool VerificationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass) out.push_back(c.name);
  return out;
}

void add_mesh_checks(VerificationReport& r, const SurfaceMesh& m, double tol_scale) {
  const RecoveredShape rs = recover_shape_operator(m);
  const RoundTrip rt = round_trip(m);
  const double tol = rt.tol * tol_scale;
  r.add("round_trip_A", rt.A_error, tol);
  r.add("round_trip_B", rt.B_error, tol);
  r.add("gauss_equation", rt.gauss, tol);
  // principal axes along the grid; judged where the curvatures are separated
  const Rect& rc = rs.forms.rect;
  double angle = 0, angle_all = 0;
  for (int j = 0; j < rc.nj; ++j)
    for (int i = 0; i < rc.ni; ++i) {
      const double t = rs.axis_angle(i, j);
      if (!std::isfinite(t)) continue;
      angle_all = std::max(angle_all, t);
      const double A = m.A(rc.i0 + i, rc.j0 + j), B = m.B(rc.i0 + i, rc.j0 + j);
      if (std::abs(A - B) >= 0.1 * (std::abs(A) + std::abs(B))) angle = std::max(angle, t);
    }
  r.metric("axis_angle_all_nodes", angle_all);
  r.add("axis_angle", angle, 1e-3 * tol_scale);
  r.metric("h", m.spec.h());
  r.metric("mask_fraction", double(m.mask.count()) / double(m.mask.size()));
}

}  // namespace preshape
