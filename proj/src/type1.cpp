#include "preshape/type1.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "preshape/calculus.hpp"

namespace preshape {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// derivatives 0..n of a solution phi of phi'' = -mu phi from (phi, phi') at t
void leibniz_derivs(const Curve& mu, double t, double phi, double dphi, int n, double* out) {
  std::array<double, kMaxCurveDeriv + 1> m{};
  if (n >= 2) mu.derivatives(t, std::min(n - 2, kMaxCurveDeriv), m.data());
  out[0] = phi;
  if (n >= 1) out[1] = dphi;
  for (int k = 0; k + 2 <= n; ++k) {
    double acc = 0, binom = 1;
    for (int j = 0; j <= k; ++j) {
      acc += binom * m[j] * out[k - j];
      binom = binom * double(k - j) / double(j + 1);
    }
    out[k + 2] = -acc;
  }
}

Curve trig_curve(std::function<void(double, int, double*)> d, double t0, double t1, const std::string& label) {
  Curve c;
  c.t0 = t0;
  c.t1 = t1;
  c.derivs = std::move(d);
  c.value = [dd = c.derivs](double t) {
    double v;
    dd(t, 0, &v);
    return v;
  };
  c.label = label;
  return c;
}

}  // namespace

NormalizedPair pair_mu0(double anchor, double t0, double t1) {
  NormalizedPair pr;
  pr.anchor = anchor;
  pr.mu = Curve::constant(0.0);
  pr.phi0 = Curve::constant(1.0);
  pr.phi1 = Curve::polynomial({-anchor, 1.0});
  pr.phi0.t0 = pr.phi1.t0 = pr.mu.t0 = t0;
  pr.phi0.t1 = pr.phi1.t1 = pr.mu.t1 = t1;
  pr.method = "closed_form";
  return pr;
}

NormalizedPair solve_normalized_pair(const Curve& mu, double t0, double t1, const std::optional<Curve>& anchor_curve,
                                     int steps) {
  if (!(t1 > t0)) fail(ErrorKind::InputError, "pair interval must be increasing");
  const double mid = 0.5 * (t0 + t1);
  NormalizedPair pr;
  pr.mu = mu;
  pr.anchor = mid;

  if (anchor_curve) {
    // L' = 1/f, J' = exp(-2L); phi1 = exp(L), phi0 = -phi1 J
    const Curve f = *anchor_curve;
    OdeRhs<double> rhs = [f](double t, const VecX<double>& y) {
      VecX<double> d(2);
      d(0) = 1.0 / f(t);
      d(1) = std::exp(-2 * y(0));
      return d;
    };
    VecX<double> y0 = VecX<double>::Zero(2);
    const int half = std::max(1, steps / 2);
    auto right = std::make_shared<OdeSolution<double>>(ode_solve_1d(rhs, y0, mid, t1, half));
    auto left = std::make_shared<OdeSolution<double>>(ode_solve_1d(rhs, y0, mid, t0, half));
    auto state = [right, left, mid, f, mu](double t) {
      const auto& s = t >= mid ? *right : *left;
      const VecX<double> y = s(t);
      const double p1 = std::exp(y(0)), p0 = -p1 * y(1);
      // phi1' = phi1 / f, phi0' from the Wronskian: phi0 phi1' - phi1 phi0' = 1
      const double d1 = p1 / f(t);
      const double d0 = (p0 * d1 - 1.0) / p1;
      return std::array<double, 4>{p0, d0, p1, d1};
    };
    pr.phi0 = trig_curve([state, mu](double t, int n, double* out) {
      const auto s = state(t);
      leibniz_derivs(mu, t, s[0], s[1], n, out);
    }, t0, t1, "phi0");
    pr.phi1 = trig_curve([state, mu](double t, int n, double* out) {
      const auto s = state(t);
      leibniz_derivs(mu, t, s[2], s[3], n, out);
    }, t0, t1, "phi1");
    pr.method = "anchor_curve";
    check_pair(pr);
    return pr;
  }

  if (mu.constant_value) {
    const double k = *mu.constant_value;
    if (k == 0.0) {
      pr = pair_mu0(mid, t0, t1);
      pr.mu = mu;
      check_pair(pr);
      return pr;
    }
    const double w = std::sqrt(std::abs(k));
    const bool osc = k > 0;
    // phi0 = cos(w (t - mid)), phi1 = sin(w (t - mid)) / w (hyperbolic when k < 0)
    pr.phi0 = trig_curve([w, mid, osc](double t, int n, double* out) {
      const double u = w * (t - mid);
      double f = 1;
      for (int j = 0; j <= n; ++j) {
        if (osc)
          out[j] = f * std::cos(u + j * M_PI / 2);
        else
          out[j] = f * (j % 2 ? std::sinh(u) : std::cosh(u));
        f *= w;
      }
    }, t0, t1, osc ? "cos" : "cosh");
    pr.phi1 = trig_curve([w, mid, osc](double t, int n, double* out) {
      const double u = w * (t - mid);
      double f = 1.0 / w;
      for (int j = 0; j <= n; ++j) {
        if (osc)
          out[j] = f * std::sin(u + j * M_PI / 2);
        else
          out[j] = f * (j % 2 ? std::cosh(u) : std::sinh(u));
        f *= w;
      }
    }, t0, t1, osc ? "sin" : "sinh");
    pr.method = "closed_form";
    check_pair(pr);
    return pr;
  }

  // general mu: (phi0, phi0', phi1, phi1') from (1, 0, 0, 1) at the midpoint
  OdeRhs<double> rhs = [mu](double t, const VecX<double>& y) {
    VecX<double> d(4);
    const double m = mu(t);
    d << y(1), -m * y(0), y(3), -m * y(2);
    return d;
  };
  VecX<double> y0(4);
  y0 << 1, 0, 0, 1;
  const int half = std::max(1, steps / 2);
  auto right = std::make_shared<OdeSolution<double>>(ode_solve_1d(rhs, y0, mid, t1, half));
  auto left = std::make_shared<OdeSolution<double>>(ode_solve_1d(rhs, y0, mid, t0, half));
  auto state = [right, left, mid](double t) { return t >= mid ? (*right)(t) : (*left)(t); };
  pr.phi0 = trig_curve([state, mu](double t, int n, double* out) {
    const VecX<double> s = state(t);
    leibniz_derivs(mu, t, s(0), s(1), n, out);
  }, t0, t1, "phi0");
  pr.phi1 = trig_curve([state, mu](double t, int n, double* out) {
    const VecX<double> s = state(t);
    leibniz_derivs(mu, t, s(2), s(3), n, out);
  }, t0, t1, "phi1");
  pr.method = "rk4";
  check_pair(pr);
  return pr;
}

void check_pair(NormalizedPair& pr, int samples) {
  const double t0 = pr.phi0.t0, t1 = pr.phi0.t1;
  double werr = 0, oerr = 0;
  const double h = 1e-3 * (t1 - t0);
  for (int k = 0; k < samples; ++k) {
    const double t = t0 + (t1 - t0) * (k + 0.5) / samples;
    double d0[2], d1[2];
    pr.phi0.derivatives(t, 1, d0);
    pr.phi1.derivatives(t, 1, d1);
    werr = std::max(werr, std::abs(d0[0] * d1[1] - d1[0] * d0[1] - 1.0));
    // second difference of the values, independent of the derivative callbacks
    for (const Curve* c : {&pr.phi0, &pr.phi1}) {
      if (t - h < t0 || t + h > t1) continue;
      const double f0 = (*c)(t), fp = (*c)(t + h), fm = (*c)(t - h);
      const double dd = (fp - 2 * f0 + fm) / (h * h);
      oerr = std::max(oerr, std::abs(dd + pr.mu(t) * f0) / (1 + std::abs(f0)));
    }
  }
  pr.wronskian_error = werr;
  pr.ode_residual = oerr;
}

PairJets pair_jets(const NormalizedPair& pr, const Jet& x) {
  return {compose(pr.phi0, x), compose(pr.phi1, x), compose(pr.phi0, x, 1), compose(pr.phi1, x, 1)};
}

// ---------------------------------------------------------------------------------------------
// mu = 0 parameter domain

void Mu0Domain::validate() const {
  if (!(xi > eta)) fail(ErrorKind::InputError, "need xi > eta");
  if (!(std::abs(lambda) < 1)) fail(ErrorKind::InputError, "need |lambda| < 1");
}

double Mu0Domain::X_lo() const { return xi; }
double Mu0Domain::X_hi() const { return lambda < 0 ? eta - (xi - eta) / lambda : kInf; }
double Mu0Domain::Y_lo() const { return lambda > 0 ? eta / lambda + xi * (1 - 1 / lambda) : -kInf; }
double Mu0Domain::Y_hi() const { return eta; }

bool Mu0Domain::contains(double X, double Y, double margin) const {
  return X > X_lo() + margin && X < X_hi() - margin && Y > Y_lo() + margin && Y < Y_hi() - margin;
}

std::array<double, 3> Mu0Domain::c_mu0() const {
  const double d = xi - eta, d2 = d * d;
  const double c2 = 2 * lambda / d2;
  const double c1 = (d - lambda * (xi + eta)) / d2;
  const double c0 = 1 + 2 * (lambda * xi * eta - xi * d) / d2;
  return {c0, c1, c2};
}

std::array<double, 3> Mu0Domain::c_general() const { return mu0_to_general(c_mu0()); }

std::array<double, 3> mu0_to_general(const std::array<double, 3>& cp) {
  return {-(1 + cp[0]) / 2, -cp[1] / 2, -cp[2] / 2};
}

std::array<double, 3> general_to_mu0(const std::array<double, 3>& c) {
  return {-2 * c[0] - 1, -2 * c[1], -2 * c[2]};
}

// ---------------------------------------------------------------------------------------------
// (U, V), coframing and (a, b, p) in natural coordinates

std::pair<Field, Field> uv_general_solution(const NormalizedPair& pr, const Curve& f, const Curve& g,
                                            const GridSpec& spec) {
  Field U = Field::from_source(spec, [pr, f, g](double x, double y, int n) {
    const Jet X = Jet::var_x(x, n), Y = Jet::var_y(y, n);
    const PairJets ph = pair_jets(pr, X);
    const Jet P = ph.p1 - Y * ph.p0, Q = ph.d1 - Y * ph.d0;
    return compose(f, X) - compose(g, Y) / Q - (P / Q) * compose(f, X, 1);
  });
  Field V = Field::from_source(spec, [pr, f, g](double x, double y, int n) {
    const Jet X = Jet::var_x(x, n), Y = Jet::var_y(y, n);
    const PairJets ph = pair_jets(pr, X);
    const Jet P = ph.p1 - Y * ph.p0;
    return compose(f, X) - ph.p0 * compose(g, Y) - P * compose(g, Y, 1);
  });
  return {U, V};
}

Coframing natural_coframing(const NormalizedPair& pr, const GridSpec& spec) {
  Coframing cf;
  cf.s = Field::from_source(spec, [pr](double x, double y, int n) {
    const Jet X = Jet::var_x(x, n), Y = Jet::var_y(y, n);
    const PairJets ph = pair_jets(pr, X);
    return (ph.d1 - Y * ph.d0) / (ph.p1 - Y * ph.p0);
  });
  cf.t = Field::from_source(spec, [pr](double x, double y, int n) {
    const Jet X = Jet::var_x(x, n), Y = Jet::var_y(y, n);
    const PairJets ph = pair_jets(pr, X);
    return -1.0 / ((ph.p1 - Y * ph.p0) * (ph.d1 - Y * ph.d0));
  });
  return cf;
}

double uv_pde_residual(const NormalizedPair& pr, const Field& U, const Field& V) {
  const Coframing cf = natural_coframing(pr, U.spec);
  const Field Uy = partial_y(U), Vx = partial_x(V);
  const auto r1 = (Uy.values - cf.t.values * (U.values - V.values)).abs();
  const auto r2 = (Vx.values - cf.s.values * (V.values - U.values)).abs();
  return std::max(r1.maxCoeff(), r2.maxCoeff());
}

FrobeniusSolution abp_closed_form(const NormalizedPair& pr, const std::array<double, 3>& c, const GridSpec& spec) {
  const double c0 = c[0], c1 = c[1], c2 = c[2];
  if (!(c1 * c1 - c0 * c2 > 0)) fail(ErrorKind::NeverPositive, "c1^2 - c0 c2 must be positive");
  auto F = [pr, c0, c1, c2](const Jet& X) {
    const PairJets ph = pair_jets(pr, X);
    return -c0 * ph.p0 * ph.p0 - 2.0 * c1 * ph.p0 * ph.p1 - c2 * ph.p1 * ph.p1;
  };
  FrobeniusSolution sol;
  sol.system = "closed_form";
  sol.a = Field::from_source(spec, [F](double x, double, int n) { return F(Jet::var_x(x, n)) - 1.0; });
  sol.b = Field::from_source(spec, [pr, c0, c1, c2](double x, double y, int n) {
    const Jet X = Jet::var_x(x, n), Y = Jet::var_y(y, n);
    const PairJets ph = pair_jets(pr, X);
    const Jet Q = ph.d1 - Y * ph.d0;
    return (c0 + 2.0 * c1 * Y + c2 * Y * Y) / (Q * Q);
  });
  sol.p = Field::from_source(spec, [pr, F](double x, double y, int n) {
    const Jet X = Jet::var_x(x, n + 1), Y = Jet::var_y(y, n);
    const Jet Fx = F(X);
    const Jet Fd = Fx.dx();
    const Jet Xn = Jet::var_x(x, n);
    const PairJets ph = pair_jets(pr, Xn);
    const Jet z = (ph.p1 - Y * ph.p0) / (ph.d1 - Y * ph.d0);
    return 1.0 - 2.0 * Fx.truncated(n) + z * Fd;
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

// ---------------------------------------------------------------------------------------------
// normal form of a Type I coframing

NormalForm normal_form_coords(const Coframing& cf, const StructureFunctions& K, NormalFormOptions opt) {
  const GridSpec& spec = cf.s.spec;
  const auto [bi, bj] = spec.center();
  const double h = spec.h();
  // |K2 - 1| judged against the local scale 1 + |K2|
  const double tol_k = opt.tol_scale * std::max(1e-6, 100 * h * h);
  const Field::Array km1 = K.K2.values - 1;
  const Field::Array rel = km1.abs() / (1 + K.K2.values.abs());
  const double min_abs = rel.minCoeff(), max_abs = rel.maxCoeff();

  NormalForm nf;
  Field z;
  if (!opt.force_general && min_abs > tol_k) {
    nf.path = "shortcut";
    if (K.K2.analytic()) {
      auto src = K.K2.source;
      z = Field::from_source(spec, [src](double x, double y, int n) {
        const Jet k = src(x, y, n) - 1.0;
        return sqrt(k.value() < 0 ? -k : k);
      });
    } else {
      z = Field(spec, km1.abs().sqrt());
    }
  } else if (!opt.force_general && max_abs <= tol_k) {
    nf.path = "k2_one";
    // theta1 + theta2 = dz / z
    OneForm2D w{cf.s, cf.t};
    PrimitiveOptions po;
    po.tol_closed = 1e-3;
    const auto prim = path_primitive(w, bi, bj, po);
    z = Field(spec, prim.F.values.exp());
  } else {
    nf.path = "general";
    if (!opt.force_general)
      nf.warnings.push_back("MixedVanishing: K2 - 1 vanishes on part of the grid; general quadrature used");
    // w_y = t along columns from the base row
    OneForm2D w{Field(spec, Field::Array::Zero(spec.nx, spec.ny)), cf.t};
    if (cf.t.analytic()) w.px = Field::constant(spec, 0.0);
    const auto W = detail::integrate_legs(w, bi, bj, true, 8);
    z = Field(spec, W.exp());
  }

  // x from z theta1 = dx (constant along columns)
  const Field::Array xu_field = z.values * cf.s.values;
  std::vector<double> xu(spec.nx);
  for (int i = 0; i < spec.nx; ++i) xu[i] = xu_field(i, bj);
  const std::vector<double> x0 = detail::cumulative(xu, spec.hx());

  // mu = (1 - K2) / z^2, y-averaged per column
  const Field::Array mu_f = (1 - K.K2.values) / (z.values * z.values);
  std::vector<double> mu(spec.nx);
  double dev = 0;
  for (int i = 0; i < spec.nx; ++i) {
    mu[i] = mu_f.row(i).mean();
    dev = std::max(dev, (mu_f.row(i) - mu[i]).abs().maxCoeff() / (1 + std::abs(mu[i])));
  }

  // nu = f''/f' removes the remaining freedom so theta2 = (dz - (mu z^2 + 1) dx) / z
  const Field zu = partial_x(sampled(z), 4);
  std::vector<double> nu(spec.nx), nu_dx(spec.nx);
  for (int i = 0; i < spec.nx; ++i) {
    double acc = 0;
    for (int j = 0; j < spec.ny; ++j) {
      const double zz = z(i, j);
      const double m = -zu(i, j) / xu_field(i, j);
      acc += (m + 1 + mu[i] * zz * zz) / zz;
    }
    nu[i] = acc / spec.ny;
    nu_dx[i] = nu[i] * xu[i];
  }
  const std::vector<double> lognu = detail::cumulative(nu_dx, spec.hx());
  std::vector<double> fp(spec.nx), fx(spec.nx);
  for (int i = 0; i < spec.nx; ++i) {
    fp[i] = std::exp(lognu[i] - lognu[bi]);
    fx[i] = fp[i] * xu[i];
  }
  const std::vector<double> F = detail::cumulative(fx, spec.hx());

  Field::Array X(spec.nx, spec.ny), Z(spec.nx, spec.ny);
  std::vector<double> xs(spec.nx), mus(spec.nx);
  for (int i = 0; i < spec.nx; ++i) {
    xs[i] = F[i] - F[bi];
    mus[i] = mu[i] / (fp[i] * fp[i]);
    for (int j = 0; j < spec.ny; ++j) {
      X(i, j) = xs[i];
      Z(i, j) = fp[i] * z(i, j);
    }
  }
  nf.x = Field(spec, X);
  nf.z = Field(spec, Z);
  nf.mu_samples = mus;
  nf.mu_y_deviation = dev;
  nf.mu = Curve::interpolate(xs, mus);

  // theta2 residual of the normal form
  const Field Zu = partial_x(nf.z, 4), Zv = partial_y(nf.z, 4);
  double r = 0;
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const double zz = Z(i, j);
      const double ru = (Zu(i, j) - (mus[i] * zz * zz + 1) * fp[i] * xu[i]) / zz;
      const double rv = cf.t(i, j) - Zv(i, j) / zz;
      r = std::max(r, std::max(std::abs(ru), std::abs(rv)) / (1 + std::abs(cf.t(i, j))));
    }
  nf.theta2_residual = r;
  return nf;
}

NaturalY natural_y(const Field& x, const Field& z, const NormalizedPair& pr) {
  const GridSpec& spec = x.spec;
  NaturalY out;
  Field::Array y(spec.nx, spec.ny);
  double res = 0;
  double den_sign = 0;
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const double xv = x(i, j), zv = z(i, j);
      double d0[2], d1[2];
      pr.phi0.derivatives(xv, 1, d0);
      pr.phi1.derivatives(xv, 1, d1);
      const double den = d0[0] - zv * d0[1];
      const double scale = std::abs(d0[0]) + std::abs(zv * d0[1]);
      if (!(std::abs(den) > 1e-12 * (1 + scale)) || (den_sign != 0 && den * den_sign < 0))
        fail(ErrorKind::RectangularityViolation,
             "phi0 - z phi0' vanishes near node (" + std::to_string(i) + "," + std::to_string(j) + ")");
      den_sign = den > 0 ? 1 : -1;
      y(i, j) = (d1[0] - zv * d1[1]) / den;
      const double P = d1[0] - y(i, j) * d0[0], Q = d1[1] - y(i, j) * d0[1];
      if (!(P > 0 && Q > 0)) out.positive = false;

      // theta2 = -dy / (PQ) against (dz - (mu z^2 + 1) dx) / z, in the (x, z) chart
      const Jet X = Jet::var_x(xv, 1), Zj = Jet::var_y(zv, 1);
      const PairJets ph = pair_jets(pr, X);
      const Jet yj = (ph.p1 - Zj * ph.d1) / (ph.p0 - Zj * ph.d0);
      const Jet yv = Jet(yj.value(), 0);
      const double Pv = (ph.p1 - yv * ph.p0).value(), Qv = (ph.d1 - yv * ph.d0).value();
      const double m = pr.mu(xv);
      const double rx = -yj.derivative(1, 0) / (Pv * Qv) + (m * zv * zv + 1) / zv;
      const double rz = -yj.derivative(0, 1) / (Pv * Qv) - 1 / zv;
      res = std::max(res, std::max(std::abs(rx), std::abs(rz)) * std::abs(zv) / (1 + std::abs(m * zv * zv)));
    }
  out.y = Field(spec, y);
  out.theta2_residual = res;
  return out;
}

// ---------------------------------------------------------------------------------------------
// frames

VectorSource mu0_e3_source(const Mu0Domain& dom) {
  dom.validate();
  const double xi = dom.xi, eta = dom.eta, lam = dom.lambda;
  return [dom, xi, eta, lam](double Xv, double Yv, int n) {
    if (!dom.contains(Xv, Yv))
      fail(ErrorKind::DomainViolation, "(X,Y) = (" + std::to_string(Xv) + "," + std::to_string(Yv) + ") outside D");
    const Jet X = Jet::var_x(Xv, n), Y = Jet::var_y(Yv, n);
    const Jet D = X - Y;
    const double d = xi - eta;
    std::array<Jet, 3> e;
    e[0] = 2.0 * sqrt((X - xi) * (lam * (X - eta) + d)) / ((1 + lam) * D);
    e[1] = 2.0 * sqrt((eta - Y) * (lam * (Y - xi) + d)) / ((1 - lam) * D);
    e[2] = (2 * d - 2 * lam * (xi + eta) - (1 - lam) * (1 - lam) * X + (1 + lam) * (1 + lam) * Y) /
           ((1 - lam * lam) * D);
    return e;
  };
}

FrameField frame_from_normal(const VectorField& e3, const VectorField& e3x, const VectorField& e3y) {
  const GridSpec& s = e3[0].spec;
  FrameField fr;
  fr.e3 = e3;
  for (int k = 0; k < 3; ++k) {
    fr.e1[k] = Field(s, Field::Array(s.nx, s.ny));
    fr.e2[k] = Field(s, Field::Array(s.nx, s.ny));
  }
  int negative = 0;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      const Vec3 a = -at_node(e3x, i, j).normalized(), b = -at_node(e3y, i, j).normalized();
      if (a.cross(b).dot(at_node(e3, i, j)) < 0) ++negative;
      for (int k = 0; k < 3; ++k) {
        fr.e1[k].values(i, j) = a(k);
        fr.e2[k].values(i, j) = b(k);
      }
    }
  if (2 * negative > s.nx * s.ny) {
    fr.flipped_e2 = true;
    for (int k = 0; k < 3; ++k) fr.e2[k].values = -fr.e2[k].values;
  }
  return fr;
}

namespace {

FrameField frame_from_source(const GridSpec& spec, const VectorSource& src, const Mat3& R = Mat3::Identity()) {
  VectorField e3, ex, ey;
  for (int k = 0; k < 3; ++k) {
    e3[k] = Field(spec, Field::Array(spec.nx, spec.ny));
    ex[k] = e3[k];
    ey[k] = e3[k];
  }
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const auto e = src(spec.x(i), spec.y(j), 1);
      Vec3 v, vx, vy;
      for (int k = 0; k < 3; ++k) {
        v(k) = e[k].value();
        vx(k) = e[k].derivative(1, 0);
        vy(k) = e[k].derivative(0, 1);
      }
      v = R * v;
      vx = R * vx;
      vy = R * vy;
      for (int k = 0; k < 3; ++k) {
        e3[k].values(i, j) = v(k);
        ex[k].values(i, j) = vx(k);
        ey[k].values(i, j) = vy(k);
      }
    }
  FrameField fr = frame_from_normal(e3, ex, ey);
  // keep the analytic source on e3 for downstream quadrature
  for (int k = 0; k < 3; ++k)
    fr.e3[k].source = [src, R, k](double x, double y, int n) {
      const auto e = src(x, y, n);
      return R(k, 0) * e[0] + R(k, 1) * e[1] + R(k, 2) * e[2];
    };
  return fr;
}

}  // namespace

FrameField mu0_frame_e3(const Mu0Domain& dom, const GridSpec& spec) {
  return frame_from_source(spec, mu0_e3_source(dom));
}

GeneralE3 general_frame_e3(const NormalizedPair& pr, const std::array<double, 3>& c, const GridSpec& spec,
                           const Mat3& rotation) {
  const double c0 = c[0], c1 = c[1], c2 = c[2];
  const double D2 = c1 * c1 - c0 * c2;
  if (!(D2 > 0)) fail(ErrorKind::NeverPositive, "c1^2 - c0 c2 must be positive");
  const double D = std::sqrt(D2);
  auto a_jet = [pr, c0, c1, c2](const Jet& X) {
    const PairJets ph = pair_jets(pr, X);
    return -1.0 - c0 * ph.p0 * ph.p0 - 2.0 * c1 * ph.p0 * ph.p1 - c2 * ph.p1 * ph.p1;
  };
  auto sigma = [a_jet, D](const Jet& X) {
    const Jet a = a_jet(X);
    return D / ((1.0 + a) * sqrt(a));
  };
  const auto [bi, bj] = spec.center();
  const double xa = spec.x(bi);

  GeneralE3 out;
  out.S.t0 = spec.x0;
  out.S.t1 = spec.x1;
  out.S.label = "S";
  // S(x) = int_{xa}^{x} sigma, Gauss on a subdivided interval
  auto S_value = [sigma, xa](double x) {
    const auto& rule = gauss_rule<16>();
    const int pieces = 8;
    double acc = 0;
    for (int p = 0; p < pieces; ++p) {
      const double a = xa + (x - xa) * p / pieces, b = xa + (x - xa) * (p + 1) / pieces;
      const double mid = (a + b) / 2, half = (b - a) / 2;
      for (size_t k = 0; k < rule.first.size(); ++k)
        acc += rule.second[k] * half * sigma(Jet(mid + half * rule.first[k], 0)).value();
    }
    return acc;
  };
  out.S.value = S_value;
  out.S.derivs = [S_value, sigma](double x, int n, double* o) {
    o[0] = S_value(x);
    if (n >= 1) {
      const Jet sg = sigma(Jet::var_x(x, std::min(n - 1, Jet::kCapacity)));
      for (int k = 1; k <= n; ++k) o[k] = k - 1 <= sg.order() ? sg.derivative(k - 1, 0) : 0.0;
    }
  };
  const Curve S = out.S;
  const double xlo = spec.x0, xhi = spec.x1, ylo = spec.y0, yhi = spec.y1;
  out.source = [pr, c0, c1, c2, D, a_jet, S, xlo, xhi, ylo, yhi](double x, double y, int n) {
    const Jet X = Jet::var_x(x, n), Y = Jet::var_y(y, n);
    const PairJets ph = pair_jets(pr, X);
    const Jet a = a_jet(X);
    const Jet q = c0 + 2.0 * c1 * Y + c2 * Y * Y;
    if (!(a.value() > 0) || !(q.value() > 0))
      fail(ErrorKind::DomainViolation, "a or b not positive at (" + std::to_string(x) + "," + std::to_string(y) + ")");
    const Jet P = ph.p1 - Y * ph.p0;
    const Jet s = compose(S, X);
    const Jet cs = cos(s), sn = sin(s);
    const Jet A1 = sqrt(a) / sqrt(1.0 + a);
    const Jet B1 = (c0 * ph.p0 + c1 * (ph.p1 + Y * ph.p0) + c2 * Y * ph.p1) / (P * sqrt(1.0 + a) * D);
    std::array<Jet, 3> e;
    e[0] = cs * A1 - sn * B1;
    e[1] = sqrt(q) / (P * D);
    e[2] = sn * A1 + cs * B1;
    return e;
  };
  out.frame = frame_from_source(spec, out.source, rotation);
  if (!rotation.isIdentity()) {
    const VectorSource base = out.source;
    out.source = [base, rotation](double x, double y, int n) {
      const auto e = base(x, y, n);
      std::array<Jet, 3> r;
      for (int k = 0; k < 3; ++k) r[k] = rotation(k, 0) * e[0] + rotation(k, 1) * e[1] + rotation(k, 2) * e[2];
      return r;
    };
  }
  return out;
}

Unfolding unfold_mu0(const Mu0Domain& dom, const GridSpec& spec) {
  dom.validate();
  const double xi = dom.xi, eta = dom.eta, lam = dom.lambda, d = xi - eta;
  Unfolding u;
  if (lam == 0) {
    u.X = [xi](double x, double, int n) {
      const Jet X = Jet::var_x(x, n);
      return xi + X * X;
    };
    u.Y = [eta](double, double y, int n) {
      const Jet Y = Jet::var_y(y, n);
      return eta - Y * Y;
    };
    u.e3 = [d](double x, double y, int n) {
      const Jet X = Jet::var_x(x, n), Y = Jet::var_y(y, n);
      const Jet r2 = X * X + Y * Y;
      const Jet den = d + r2;
      const double sd = std::sqrt(d);
      return std::array<Jet, 3>{2.0 * sd * X / den, 2.0 * sd * Y / den, (d - r2) / den};
    };
  } else if (lam > 0) {
    const double ymin = dom.Y_lo();
    u.X = [xi](double x, double, int n) {
      const Jet X = Jet::var_x(x, n);
      return xi + X * X;
    };
    u.Y = [eta, ymin](double, double y, int n) {
      const Jet Y = Jet::var_y(y, n);
      const Jet c = cos(Y), s = sin(Y);
      return eta * c * c + ymin * s * s;
    };
    u.e3 = [xi, eta, lam, d, ymin](double x, double y, int n) {
      const Jet x1 = Jet::var_x(x, n), y1 = Jet::var_y(y, n);
      const Jet c = cos(y1), s = sin(y1);
      const Jet X = xi + x1 * x1, Y = eta * c * c + ymin * s * s;
      const Jet D = X - Y;
      std::array<Jet, 3> e;
      e[0] = 2.0 * x1 * sqrt(lam * (X - eta) + d) / ((1 + lam) * D);
      e[1] = 2.0 * std::sqrt(lam) * (eta - ymin) * s * c / ((1 - lam) * D);
      e[2] = (2 * d - 2 * lam * (xi + eta) - (1 - lam) * (1 - lam) * X + (1 + lam) * (1 + lam) * Y) /
             ((1 - lam * lam) * D);
      return e;
    };
  } else {
    const double xmax = dom.X_hi();
    u.X = [xi, xmax](double x, double, int n) {
      const Jet X = Jet::var_x(x, n);
      const Jet c = cos(X), s = sin(X);
      return xi * c * c + xmax * s * s;
    };
    u.Y = [eta](double, double y, int n) {
      const Jet Y = Jet::var_y(y, n);
      return eta - Y * Y;
    };
    u.e3 = [xi, eta, lam, d, xmax](double x, double y, int n) {
      const Jet x1 = Jet::var_x(x, n), y1 = Jet::var_y(y, n);
      const Jet c = cos(x1), s = sin(x1);
      const Jet X = xi * c * c + xmax * s * s, Y = eta - y1 * y1;
      const Jet D = X - Y;
      std::array<Jet, 3> e;
      e[0] = 2.0 * std::sqrt(-lam) * (xmax - xi) * s * c / ((1 + lam) * D);
      e[1] = 2.0 * y1 * sqrt(lam * (Y - xi) + d) / ((1 - lam) * D);
      e[2] = (2 * d - 2 * lam * (xi + eta) - (1 - lam) * (1 - lam) * X + (1 + lam) * (1 + lam) * Y) /
             ((1 - lam * lam) * D);
      return e;
    };
  }
  u.Xf = Field::from_source(spec, u.X);
  u.Yf = Field::from_source(spec, u.Y);
  u.e3f = vector_field(spec, u.e3);
  return u;
}

Vec3 x_linear_closed_form(const Mu0Domain& dom, double X, double Y) {
  const double xi = dom.xi, eta = dom.eta, lam = dom.lambda;
  const double D = X - Y;
  Vec3 r;
  r(0) = -2 * Y * std::sqrt((X - xi) * (lam * (X - eta) + xi - eta)) / ((1 + lam) * D);
  r(1) = -2 * X * std::sqrt((eta - Y) * (lam * (Y - xi) + xi - eta)) / ((1 - lam) * D);
  r(2) = ((X + Y) * (lam * (xi + eta) - xi + eta) - 4 * lam * X * Y) / ((1 - lam * lam) * D);
  return r;
}

Vec3 enneper_reference(double x, double y) {
  return (2.0 / 3.0) * Vec3(x * x * x - 3 * x * y * y - 3 * x, 3 * x * x * y - y * y * y + 3 * y, 3 * x * x - 3 * y * y);
}

}  // namespace preshape
