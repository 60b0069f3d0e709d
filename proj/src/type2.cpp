#include "preshape/type2.hpp"

#include <cmath>

#include "preshape/calculus.hpp"

namespace preshape {

std::array<double, 3> LambdaTriple::c() const {
  // (t - l1)(t - l2)(t - l3) = t^3 + 3 c2 t^2 + 3 c1 t + c0
  return {-l1 * l2 * l3, (l1 * l2 + l1 * l3 + l2 * l3) / 3, -(l1 + l2 + l3) / 3};
}

void LambdaTriple::validate() const {
  if (!(l1 < l2 && l2 < l3)) fail(ErrorKind::InputError, "need l1 < l2 < l3");
}

GridSpec CubicDomain::grid(int n) const {
  const double e = margin();
  return GridSpec{n, n, X_lo + e, X_hi - e, Y_lo + e, Y_hi - e};
}

CubicDomain cubic_domain(const LambdaTriple& l) {
  l.validate();
  CubicDomain d;
  d.lambda = l;
  d.X_lo = l.l2;
  d.X_hi = l.l3;
  d.Y_lo = l.l1;
  d.Y_hi = l.l2;
  return d;
}

CubicDomain cubic_domain(double c0, double c1, double c2) {
  // depressed cubic s^3 + p s + q with t = s - c2
  const double p = 3 * c1 - 3 * c2 * c2;
  const double q = 2 * c2 * c2 * c2 - 3 * c1 * c2 + c0;
  const double disc = -(4 * p * p * p + 27 * q * q);
  const double scale = std::pow(std::abs(p), 3) + q * q;
  if (!(p < 0) || !(disc > 1e-12 * (1 + scale)))
    fail(ErrorKind::NotThreeRealRoots, "cubic does not have three distinct real roots");
  const double m = 2 * std::sqrt(-p / 3);
  const double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
  const double th = std::acos(arg) / 3;
  std::array<double, 3> r;
  for (int k = 0; k < 3; ++k) {
    double t = m * std::cos(th - 2 * M_PI * k / 3) - c2;
    const double f = ((t + 3 * c2) * t + 3 * c1) * t + c0;
    const double df = (3 * t + 6 * c2) * t + 3 * c1;
    if (df != 0) t -= f / df;
    r[k] = t;
  }
  std::sort(r.begin(), r.end());
  if (!(r[0] < r[1] && r[1] < r[2])) fail(ErrorKind::NotThreeRealRoots, "roots not distinct");
  return cubic_domain(LambdaTriple{r[0], r[1], r[2]});
}

NaturalXY natural_coordinates(const Coframing& cf) {
  const GridSpec& spec = cf.s.spec;
  const auto [bi, bj] = spec.center();
  auto scaled = [](const Field& f, double k) {
    if (f.analytic()) {
      auto src = f.source;
      return Field::from_source(f.spec, [src, k](double x, double y, int n) { return k * src(x, y, n); });
    }
    return Field(f.spec, k * f.values);
  };
  NaturalXY out;
  PrimitiveOptions po;
  const auto logZ = path_primitive(OneForm2D{scaled(cf.s, -2), scaled(cf.t, -2)}, bi, bj, po);
  const Field::Array Z = logZ.F.values.exp();
  const Field w1(spec, -2 * Z * cf.s.values);
  const Field w2(spec, Field::Array::Zero(spec.nx, spec.ny));
  const auto Xp = path_primitive(OneForm2D{w1, w2}, bi, bj, po);
  out.X = Xp.F;
  out.Y = Field(spec, Xp.F.values - Z);
  out.path_discrepancy = std::max(logZ.path_discrepancy, Xp.path_discrepancy);

  // theta1 = dX / (2 (Y - X)), theta2 = dY / (2 (X - Y))
  const Field Xx = partial_x(out.X, 4), Xy = partial_y(out.X, 4), Yx = partial_x(out.Y, 4), Yy = partial_y(out.Y, 4);
  const Field::Array D = out.X.values - out.Y.values;
  const Field::Array r1 = (cf.s.values + Xx.values / (2 * D)).abs() / (1 + cf.s.values.abs());
  const Field::Array r2 = (cf.t.values - Yy.values / (2 * D)).abs() / (1 + cf.t.values.abs());
  const Field::Array r3 = (Xy.values / (2 * D)).abs().max((Yx.values / (2 * D)).abs());
  out.theta_residual = std::max({r1.maxCoeff(), r2.maxCoeff(), r3.maxCoeff()});
  return out;
}

namespace {

Jet cubic_jet(const std::array<double, 3>& c, const Jet& t) {
  return ((t + 3 * c[2]) * t + 3 * c[1]) * t + c[0];
}

FrobeniusSolution abp_from_sources(const GridSpec& spec, const std::array<double, 3>& c,
                                   std::function<std::pair<Jet, Jet>(double, double, int)> xy) {
  FrobeniusSolution sol;
  sol.system = "closed_form";
  sol.a = Field::from_source(spec, [c, xy](double x, double y, int n) {
    const auto [X, Y] = xy(x, y, n);
    const Jet d = Y - X;
    return cubic_jet(c, X) / (d * d * d);
  });
  sol.b = Field::from_source(spec, [c, xy](double x, double y, int n) {
    const auto [X, Y] = xy(x, y, n);
    const Jet d = X - Y;
    return cubic_jet(c, Y) / (d * d * d);
  });
  sol.p = Field::from_source(spec, [c, xy](double x, double y, int n) {
    const auto [X, Y] = xy(x, y, n);
    const Jet d = Y - X;
    const Jet num = Y * Y * Y - 3.0 * Y * Y * X - 3.0 * Y * X * X + X * X * X - 12 * c[2] * X * Y -
                    6 * c[1] * (X + Y) - 4 * c[0];
    return -num / (d * d * d);
  });
  const auto [bi, bj] = spec.center();
  sol.bi = bi;
  sol.bj = bj;
  sol.a0 = sol.a(bi, bj);
  sol.b0 = sol.b(bi, bj);
  sol.p0 = sol.p(bi, bj);
  sol.positive = (sol.a.values > 0) && (sol.b.values > 0);
  sol.positivity_lost = !sol.positive.all();
  return sol;
}

}  // namespace

FrobeniusSolution abp_closed_form_t2(const GridSpec& spec, const std::array<double, 3>& c) {
  return abp_from_sources(spec, c, [](double x, double y, int n) {
    return std::make_pair(Jet::var_x(x, n), Jet::var_y(y, n));
  });
}

FrobeniusSolution abp_closed_form_t2(const Field& X, const Field& Y, const std::array<double, 3>& c) {
  const GridSpec& spec = X.spec;
  if (X.analytic() && Y.analytic()) {
    auto sx = X.source, sy = Y.source;
    return abp_from_sources(spec, c, [sx, sy](double x, double y, int n) {
      return std::make_pair(sx(x, y, n), sy(x, y, n));
    });
  }
  FrobeniusSolution sol;
  sol.system = "closed_form";
  auto cub = [&c](const Field::Array& t) { return ((t + 3 * c[2]) * t + 3 * c[1]) * t + c[0]; };
  const Field::Array &Xv = X.values, &Yv = Y.values;
  const Field::Array d = Yv - Xv;
  sol.a = Field(spec, cub(Xv) / d.cube());
  sol.b = Field(spec, -cub(Yv) / d.cube());
  const Field::Array num = Yv.cube() - 3 * Yv.square() * Xv - 3 * Yv * Xv.square() + Xv.cube() -
                           12 * c[2] * Xv * Yv - 6 * c[1] * (Xv + Yv) - 4 * c[0];
  sol.p = Field(spec, -num / d.cube());
  const auto [bi, bj] = spec.center();
  sol.bi = bi;
  sol.bj = bj;
  sol.a0 = sol.a(bi, bj);
  sol.b0 = sol.b(bi, bj);
  sol.p0 = sol.p(bi, bj);
  sol.positive = (sol.a.values > 0) && (sol.b.values > 0);
  sol.positivity_lost = !sol.positive.all();
  return sol;
}

// ---------------------------------------------------------------------------------------------
// potentials

Jet EulerPotential::jet(double X, double Y, int order) const {
  if (in_domain && !in_domain(X, Y))
    fail(ErrorKind::DomainViolation,
         kind + " potential undefined at (X,Y) = (" + std::to_string(X) + "," + std::to_string(Y) + ")");
  return phi(X, Y, order);
}

Field EulerPotential::Phi(const GridSpec& s) const {
  const EulerPotential self = *this;
  return Field::from_source(s, [self](double X, double Y, int n) { return self.jet(X, Y, n); });
}

Field EulerPotential::PhiX(const GridSpec& s) const {
  const EulerPotential self = *this;
  return Field::from_source(s, [self](double X, double Y, int n) { return self.jet(X, Y, n + 1).dx(); });
}

Field EulerPotential::PhiY(const GridSpec& s) const {
  const EulerPotential self = *this;
  return Field::from_source(s, [self](double X, double Y, int n) { return self.jet(X, Y, n + 1).dy(); });
}

std::vector<double> homogeneous_coefficients(int d) {
  if (d < 1) fail(ErrorKind::InputError, "degree must be positive");
  std::vector<double> a(d + 1);
  a[0] = 1;
  for (int k = 0; k < d; ++k)
    a[k + 1] = a[k] * double(d - k) * double(2 * k + 1) / (double(k + 1) * double(2 * d - 2 * k - 1));
  const double norm = -double(2 * d - 1) / double(d) / a[d];
  for (auto& v : a) v *= norm;
  return a;
}

EulerPotential builtin_potential(const std::string& kind, PotentialParams params) {
  EulerPotential p;
  p.kind = kind;
  const double k = params.scale;
  if (kind == "quadric") {
    p.phi = [k](double X, double Y, int n) {
      const Jet x = Jet::var_x(X, n), y = Jet::var_y(Y, n);
      return 2.0 * k * pow(-(x * y), -0.5);
    };
    p.in_domain = [](double X, double Y) { return Y < 0 && X > 0; };
  } else if (kind == "elliptic") {
    p.phi = [k](double X, double Y, int n) {
      const Jet x = Jet::var_x(X, n), y = Jet::var_y(Y, n);
      return -2.0 * k * pow(x * y, -0.5);
    };
    p.in_domain = [](double X, double Y) { return (0 < Y && Y < X) || (Y < X && X < 0); };
  } else if (kind == "quadratic" || kind == "cubic" || kind == "homogeneous") {
    const int d = kind == "quadratic" ? 2 : kind == "cubic" ? 3 : params.degree;
    const std::vector<double> a = homogeneous_coefficients(d);
    p.phi = [a, k, d](double X, double Y, int n) {
      const Jet x = Jet::var_x(X, n), y = Jet::var_y(Y, n);
      Jet r(0.0, n);
      Jet xp(1.0, n);
      std::vector<Jet> yp(d + 1);
      yp[0] = Jet(1.0, n);
      for (int m = 1; m <= d; ++m) yp[m] = yp[m - 1] * y;
      for (int m = 0; m <= d; ++m) {
        r += (a[m] * k) * (xp * yp[d - m]);
        xp = xp * x;
      }
      return r;
    };
    p.in_domain = [](double X, double Y) { return Y <= X; };
    if (kind == "homogeneous") p.kind = "homogeneous_" + std::to_string(d);
  } else if (kind == "log") {
    p.phi = [k](double X, double Y, int n) {
      const Jet x = Jet::var_x(X, n), y = Jet::var_y(Y, n);
      return 2.0 * k * log(x - y);
    };
    p.in_domain = [](double X, double Y) { return Y < X; };
  } else {
    fail(ErrorKind::UnknownKind, "unknown potential kind '" + kind + "'");
  }
  return p;
}

namespace {

// nodes u in (0, 1) with weights, four panels of 20 points
const std::vector<std::pair<double, double>>& poisson_nodes() {
  static const auto nodes = [] {
    std::vector<std::pair<double, double>> r;
    const auto& g = gauss_rule<20>();
    const int panels = 4;
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double a = double(pnl) / panels, b = double(pnl + 1) / panels;
      for (size_t k = 0; k < g.first.size(); ++k)
        r.emplace_back((a + b) / 2 + (b - a) / 2 * g.first[k], (b - a) / 2 * g.second[k]);
    }
    return r;
  }();
  return nodes;
}

}  // namespace

EulerPotential poisson_potential(const Curve& phi, const Curve& psi) {
  EulerPotential p;
  p.kind = "poisson";
  const bool has_psi = !(psi.constant_value && *psi.constant_value == 0.0);
  p.in_domain = [phi, psi, has_psi](double X, double Y) {
    return Y < X && phi.contains(X) && phi.contains(Y) && (!has_psi || (psi.contains(X) && psi.contains(Y)));
  };
  p.phi = [phi, psi, has_psi](double Xv, double Yv, int n) {
    const Jet X = Jet::var_x(Xv, n), Y = Jet::var_y(Yv, n);
    const Jet D = X - Y;
    const Jet logD = log(D);
    Jet acc(0.0, n);
    for (const auto& [u, w] : poisson_nodes()) {
      // tau = (pi/2) S(u), S' = 140 u^3 (1-u)^3
      const double u2 = u * u;
      const double S = u2 * u2 * (35 - 84 * u + 70 * u2 - 20 * u2 * u);
      const double dS = 140 * u2 * u * std::pow(1 - u, 3);
      const double tau = M_PI / 2 * S;
      const double sn = std::sin(tau), cs = std::cos(tau);
      const double wt = w * M_PI / 2 * dS;
      if (wt == 0) continue;
      const Jet xi = Y + D * (sn * sn);
      Jet term = 2.0 * compose(phi, xi);
      if (has_psi) term += 2.0 * compose(psi, xi) * (-logD - 2 * std::log(sn * cs));
      acc += wt * term;
    }
    return acc;
  };
  return p;
}

double euler_residual(const EulerPotential& pot, const GridSpec& spec, int accuracy) {
  const Field P = sampled(pot.Phi(spec));
  const Field Px = partial_x(P, accuracy), Py = partial_y(P, accuracy);
  const Field Pxy = partial_y(Px, accuracy);
  double r = 0;
  const int m = accuracy >= 4 ? 2 : 1;
  for (int j = m; j < spec.ny - m; ++j)
    for (int i = m; i < spec.nx - m; ++i) {
      const double X = spec.x(i), Y = spec.y(j);
      r = std::max(r, std::abs(Pxy(i, j) - (Px(i, j) - Py(i, j)) / (2 * (X - Y))));
    }
  return r;
}

double euler_residual_exact(const EulerPotential& pot, const GridSpec& spec) {
  double r = 0;
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const double X = spec.x(i), Y = spec.y(j);
      const Jet f = pot.jet(X, Y, 2);
      r = std::max(r, std::abs(f.derivative(1, 1) - (f.derivative(1, 0) - f.derivative(0, 1)) / (2 * (X - Y))));
    }
  return r;
}

// ---------------------------------------------------------------------------------------------
// frames and unfolding

VectorSource t2_e3_source(const LambdaTriple& l) {
  l.validate();
  const double l1 = l.l1, l2 = l.l2, l3 = l.l3;
  return [l1, l2, l3](double Xv, double Yv, int n) {
    if (!(Yv >= l1 && Yv <= l2 && Xv >= l2 && Xv <= l3))
      fail(ErrorKind::DomainViolation,
           "(X,Y) = (" + std::to_string(Xv) + "," + std::to_string(Yv) + ") outside the closed rectangle");
    const Jet X = Jet::var_x(Xv, n), Y = Jet::var_y(Yv, n);
    std::array<Jet, 3> e;
    e[0] = sqrt((X - l1) * (Y - l1) / ((l2 - l1) * (l3 - l1)));
    e[1] = sqrt((X - l2) * (l2 - Y) / ((l2 - l1) * (l3 - l2)));
    e[2] = sqrt((l3 - X) * (l3 - Y) / ((l3 - l1) * (l3 - l2)));
    return e;
  };
}

FrameField frame_e3_t2(const LambdaTriple& l, const GridSpec& spec) {
  const VectorSource src = t2_e3_source(l);
  VectorField e3 = vector_field(spec, src), ex, ey;
  for (int k = 0; k < 3; ++k) {
    ex[k] = partial_x(e3[k]);
    ey[k] = partial_y(e3[k]);
  }
  return frame_from_normal(e3, ex, ey);
}

ToralMap toral_unfold(const LambdaTriple& l) {
  l.validate();
  const double l1 = l.l1, l2 = l.l2, l3 = l.l3;
  ToralMap m;
  m.X = [l2, l3](double x, double, int n) {
    const Jet t = Jet::var_x(x, n);
    const Jet c = cos(t), s = sin(t);
    return l2 * c * c + l3 * s * s;
  };
  m.Y = [l1, l2](double, double y, int n) {
    const Jet t = Jet::var_y(y, n);
    const Jet c = cos(t), s = sin(t);
    return l1 * s * s + l2 * c * c;
  };
  m.e3 = [l1, l2, l3](double x, double y, int n) {
    const Jet tx = Jet::var_x(x, n), ty = Jet::var_y(y, n);
    const Jet cx = cos(tx), sx = sin(tx), cy = cos(ty), sy = sin(ty);
    std::array<Jet, 3> e;
    e[0] = cy * sqrt(((l3 - l1) * sx * sx + (l2 - l1) * cx * cx) / (l3 - l1));
    e[1] = sx * sy;
    e[2] = cx * sqrt(((l3 - l1) * sy * sy + (l3 - l2) * cy * cy) / (l3 - l1));
    return e;
  };
  return m;
}

Mat3 half_period_x() { return Eigen::Vector3d(1, -1, -1).asDiagonal(); }
Mat3 half_period_y() { return Eigen::Vector3d(-1, -1, 1).asDiagonal(); }

Vec3 quadric_closed_form(const LambdaTriple& l, double X, double Y) {
  const double l1 = l.l1, l2 = l.l2, l3 = l.l3, m = -X * Y;
  return Vec3(std::sqrt((Y - l1) * (X - l1) / ((l2 - l1) * (l3 - l1) * m)) / l1,
              std::sqrt((l2 - Y) * (X - l2) / ((l2 - l1) * (l3 - l2) * m)) / l2,
              std::sqrt((l3 - Y) * (l3 - X) / ((l3 - l1) * (l3 - l2) * m)) / l3);
}

Vec3 quadratic_closed_form(const LambdaTriple& l, double X, double Y) {
  const double l1 = l.l1, l2 = l.l2, l3 = l.l3;
  return Vec3((X + Y + 2 * l1) * std::sqrt((Y - l1) * (X - l1) / ((l2 - l1) * (l3 - l1))),
              (X + Y + 2 * l2) * std::sqrt((l2 - Y) * (X - l2) / ((l2 - l1) * (l3 - l2))),
              (X + Y + 2 * l3) * std::sqrt((l3 - Y) * (l3 - X) / ((l3 - l1) * (l3 - l2))));
}

Vec3 minimal_closed_form(const LambdaTriple& l, double X, double Y) {
  const double l1 = l.l1, l2 = l.l2, l3 = l.l3;
  const double a = std::sqrt(X - l1), b = std::sqrt(Y - l1);
  const double c = std::sqrt(l3 - Y), d = std::sqrt(l3 - X);
  return Vec3(std::log((a + b) / (a - b)) / std::sqrt((l2 - l1) * (l3 - l1)),
              -2 * std::atan(std::sqrt(X - l2) / std::sqrt(l2 - Y)) / std::sqrt((l2 - l1) * (l3 - l2)),
              std::log((c - d) / (c + d)) / std::sqrt((l3 - l1) * (l3 - l2)));
}

ShapeOperatorField type2_shape_field(const EulerPotential& pot, const GridSpec& spec, BuildOptions opt) {
  return build_from_reciprocals(pot.PhiX(spec), pot.PhiY(spec), opt);
}

}  // namespace preshape
