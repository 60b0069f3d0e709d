#include "preshape/classifier.hpp"

#include <cmath>

#include "preshape/ode.hpp"

namespace preshape {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::TypeI_first: return "TypeI_first";
    case Verdict::TypeI_dual: return "TypeI_dual";
    case Verdict::TypeII: return "TypeII";
    case Verdict::DegenerateMolding_Ay0: return "DegenerateMolding_Ay0";
    case Verdict::DegenerateMolding_Bx0: return "DegenerateMolding_Bx0";
    case Verdict::Cylinder: return "Cylinder";
    case Verdict::Generic: return "Generic";
  }
  return "?";
}

std::array<Field, 4> frobenius_residuals(const StructureFunctions& K) {
  const auto& s = K.K1.spec;
  const auto &K1 = K.K1.values, &K2 = K.K2.values, &K11 = K.K11.values, &K22 = K.K22.values;
  const auto &K12 = K.K12.values, &K21 = K.K21.values, &K111 = K.K111.values, &K222 = K.K222.values;
  return {Field(s, 8 - 2 * K1 - 2 * K2 - 4 * K1 * K2 + 3 * K11 + 3 * K22),
          Field(s, K11 - K22 - 2 * K1 + 2 * K2),
          Field(s, (1 + K2) * K11 - (1 - K1) * K21 - K111),
          Field(s, (1 - K2) * K12 - (1 + K1) * K22 + K222)};
}

std::vector<std::pair<int, int>> run_lengths(const Eigen::ArrayXXi& m, int row) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < m.rows(); ++i) {
    const int v = m(i, row);
    if (!out.empty() && out.back().first == v)
      ++out.back().second;
    else
      out.emplace_back(v, 1);
  }
  return out;
}

namespace {

ResidualSummary summarize(const std::string& name, const Field::Array& v) {
  return {name, v.abs().maxCoeff(), v.abs().mean()};
}

bool all_zero(const Field& f) { return f.values.abs().maxCoeff() <= tol_zero_for(f); }

}  // namespace

ClassificationReport classify(const ShapeOperatorField& sf_in, ClassifyOptions opt) {
  ClassificationReport r;
  r.h = sf_in.spec.h();
  r.nondegeneracy = nondegeneracy_report(sf_in);
  const auto& nd = r.nondegeneracy;
  if (nd.Ay_zero_everywhere && nd.Bx_zero_everywhere) {
    const bool cyl = all_zero(sf_in.A) || all_zero(sf_in.B);
    r.verdict = cyl ? Verdict::Cylinder : Verdict::Generic;
    if (!cyl) r.notes.push_back("A_y = B_x = 0 with A, B nonzero: last linear equation incompatible");
    return r;
  }
  if (nd.Ay_zero_everywhere || nd.Bx_zero_everywhere) {
    r.verdict = nd.Ay_zero_everywhere ? Verdict::DegenerateMolding_Ay0 : Verdict::DegenerateMolding_Bx0;
    return r;
  }

  // restrict to the largest invertible block
  ShapeOperatorField sf = sf_in;
  if (!sf_in.fully_invertible) {
    const Rect rc = largest_true_rectangle(sf_in.invertible);
    if (rc.ni < 3 || rc.nj < 3) fail(ErrorKind::MaskTooSmall, "no invertible 3x3 block");
    r.coverage = double(rc.area()) / double(sf_in.spec.nx * sf_in.spec.ny);
    sf = build_from_curvatures(sub_field(sf_in.A, rc), sub_field(sf_in.B, rc), {true});
    r.notes.push_back("non-invertible nodes masked");
  }
  const CoframeData d = coframe_data(sf, opt.accuracy);
  const auto& K = d.K;
  r.frobenius = frobenius_residuals(K);
  r.tol = opt.tol_scale * std::max(1e-6, 100 * r.h * r.h);

  const Field::Array first = (K.K1.values - 1).abs(), dual = (K.K2.values - 1).abs();
  const Field::Array second = (K.K1.values + 2).abs().max((K.K2.values + 2).abs());
  r.max_first = first.maxCoeff();
  r.max_dual = dual.maxCoeff();
  r.max_second = second.maxCoeff();
  for (int k = 0; k < 4; ++k) r.residuals.push_back(summarize("frobenius_" + std::to_string(k + 1), r.frobenius[k].values));
  r.residuals.push_back(summarize("first_system", first));
  r.residuals.push_back(summarize("first_system_dual", dual));
  r.residuals.push_back(summarize("second_system", second));

  r.partition = Eigen::ArrayXXi::Zero(sf.spec.nx, sf.spec.ny);
  for (int j = 0; j < sf.spec.ny; ++j)
    for (int i = 0; i < sf.spec.nx; ++i)
      r.partition(i, j) = (first(i, j) < r.tol ? 1 : 0) | (dual(i, j) < r.tol ? 2 : 0);

  const bool ok_first = r.max_first < r.tol, ok_dual = r.max_dual < r.tol, ok_second = r.max_second < r.tol;
  // among the passing systems the smallest residual wins; ties go to the first system
  struct Cand {
    Verdict v;
    double res;
    bool ok;
  };
  const Cand cands[3] = {{Verdict::TypeI_first, r.max_first, ok_first},
                         {Verdict::TypeI_dual, r.max_dual, ok_dual},
                         {Verdict::TypeII, r.max_second, ok_second}};
  const Cand* best = nullptr;
  for (const auto& c : cands)
    if (c.ok && (!best || c.res < best->res - 1e-15 * (1 + best->res))) best = &c;
  if (best) {
    r.verdict = best->v;
    if (ok_first && ok_dual) {
      r.verdict = Verdict::TypeI_first;
      r.dual_also_holds = true;
      r.notes.push_back("both Type I systems hold; reported as first");
    }
    return r;
  }
  // mixed Type I domains: every node in one of the two systems
  const bool covered = (r.partition > 0).all();
  bool some_first = false, some_dual = false;
  for (int j = 0; j < sf.spec.ny; ++j)
    for (int i = 0; i < sf.spec.nx; ++i) {
      some_first = some_first || (r.partition(i, j) & 1);
      some_dual = some_dual || (r.partition(i, j) & 2);
    }
  if (covered && some_first && some_dual) {
    r.verdict = Verdict::TypeI_first;
    r.mixed = true;
    r.notes.push_back("mixed Type I domain; see partition map");
    return r;
  }
  r.verdict = Verdict::Generic;
  return r;
}

namespace {

// coefficients of u' + f u + g = 0 for the A_y = 0 case
std::pair<Field, Field> molding_coefficients(const ShapeOperatorField& sf, int accuracy) {
  if (sf.A.analytic() && sf.B.analytic()) {
    auto A = sf.A.source, B = sf.B.source;
    Field f = Field::from_source(sf.spec, [A, B](double x, double y, int n) {
      const Jet a = A(x, y, n + 2), b = B(x, y, n + 2);
      const Jet ax = a.dx(), bx = b.dx(), bxx = bx.dx();
      return 2.0 * (bx * ax - 2.0 * bx * bx + bxx * (b - a)) / ((b - a) * bx);
    });
    Field g = Field::from_source(sf.spec, [A, B](double x, double y, int n) {
      const Jet a = A(x, y, n + 1), b = B(x, y, n + 1);
      const Jet bx = b.dx();
      return -2.0 * a * b * (a - b) * (a - b) / ((b - a) * bx);
    });
    return {f, g};
  }
  const Field Ax = partial_x(sampled(sf.A), accuracy), Bx = partial_x(sampled(sf.B), accuracy);
  const Field Bxx = partial_x(Bx, accuracy);
  const auto &a = sf.A.values, &b = sf.B.values;
  Field f(sf.spec, 2 * (Bx.values * Ax.values - 2 * Bx.values * Bx.values + Bxx.values * (b - a)) /
                       ((b - a) * Bx.values));
  Field g(sf.spec, -2 * a * b * (a - b) * (a - b) / ((b - a) * Bx.values));
  return {f, g};
}

Curve row_curve(const Field& f, double y) {
  Curve c;
  c.t0 = f.spec.x0;
  c.t1 = f.spec.x1;
  c.value = [f, y](double x) { return f.at(x, y); };
  return c;
}

}  // namespace

Curve MoldingFamily::solve_u(double u0, int steps) const {
  if (!(u0 > 0)) fail(ErrorKind::InputError, "family parameter u0 must be positive");
  const Curve fc = f_of_x, gc = g_of_x;
  OdeRhs<double> rhs = [fc, gc](double x, const VecX<double>& u) {
    VecX<double> d(1);
    d(0) = -fc(x) * u(0) - gc(x);
    return d;
  };
  VecX<double> y0(1);
  y0(0) = u0;
  const double len = fc.t1 - fc.t0;
  const int sr = std::max(1, int(std::ceil(steps * (fc.t1 - x_base) / len)));
  const int sl = std::max(1, int(std::ceil(steps * (x_base - fc.t0) / len)));
  auto right = std::make_shared<OdeSolution<double>>(ode_solve_1d(rhs, y0, x_base, fc.t1, sr));
  auto left = std::make_shared<OdeSolution<double>>(ode_solve_1d(rhs, y0, x_base, fc.t0, sl));
  const double xb = x_base;
  Curve u;
  u.t0 = fc.t0;
  u.t1 = fc.t1;
  u.value = [right, left, xb](double x) { return x >= xb ? (*right)(x)(0) : (*left)(x)(0); };
  u.derivs = [right, left, xb, fc, gc](double x, int n, double* out) {
    const auto& s = x >= xb ? *right : *left;
    out[0] = s(x)(0);
    if (n >= 1) out[1] = s.derivative(x)(0);
    for (int k = 2; k <= n; ++k) out[k] = 0;  // higher derivatives not tracked
    if (n >= 2) {
      // differentiate the equation once: u'' = -f' u - f u' - g'
      out[2] = -fc.derivative(x, 1) * out[0] - fc(x) * out[1] - gc.derivative(x, 1);
    }
  };
  u.label = "molding_u";
  return u;
}

MoldingFamily degenerate_molding_solve(const ShapeOperatorField& sf_in, ClassifyOptions opt) {
  const auto nd = nondegeneracy_report(sf_in);
  MoldingFamily fam;
  ShapeOperatorField sf = sf_in;
  if (nd.Ay_zero_everywhere && !nd.Bx_zero_everywhere) {
  } else if (nd.Bx_zero_everywhere && !nd.Ay_zero_everywhere) {
    sf = transposed(sf_in);
    fam.swapped = true;
  } else {
    fail(ErrorKind::PreconditionViolation, "operator is not of molding type");
  }
  const auto& s = sf.spec;
  auto [f, g] = molding_coefficients(sf, opt.accuracy);
  if (!f.all_finite() || !g.all_finite()) fail(ErrorKind::NoRealization, "molding coefficients not finite (B_x = 0 somewhere)");
  fam.f = f;
  fam.g = g;
  const double h2 = s.h() * s.h();
  const double base_tol = opt.tol_scale * ((f.analytic() && g.analytic()) ? 1e-8 : std::max(1e-6, 100 * h2));
  const Field fy = partial_y(f, opt.accuracy), gy = partial_y(g, opt.accuracy);
  const double tol_f = base_tol * (1 + f.max_abs()), tol_g = base_tol * (1 + g.max_abs());
  const double fy_max = fy.max_abs(), gy_max = gy.max_abs();
  auto [ci, cj] = s.center();
  fam.x_base = s.x(ci);
  fam.y_line = s.y(cj);

  if (fy_max <= tol_f && gy_max > tol_g) {
    fam.test = "f_y = 0 while g_y != 0";
    fail(ErrorKind::NoRealization, fam.test);
  }
  if (fy_max > tol_f) {
    fam.branch = MoldingFamily::Branch::Unique;
    // candidate u = -g_y / f_y must depend on x alone, be positive and solve the ODE
    Eigen::ArrayXd u(s.nx);
    double spread = 0;
    for (int i = 0; i < s.nx; ++i) {
      double acc = 0, wsum = 0;
      std::vector<double> vals;
      for (int j = 0; j < s.ny; ++j)
        if (std::abs(fy(i, j)) > tol_f) {
          vals.push_back(-gy(i, j) / fy(i, j));
          acc += vals.back();
          wsum += 1;
        }
      if (wsum == 0) {
        fam.test = "f_y u + g_y = 0 has no solution on a column";
        fail(ErrorKind::NoRealization, fam.test);
      }
      u(i) = acc / wsum;
      for (double v : vals) spread = std::max(spread, std::abs(v - u(i)) / (1 + std::abs(u(i))));
    }
    if (spread > std::max(1e-6, 100 * h2) * opt.tol_scale) {
      fam.test = "candidate u = -g_y/f_y depends on y";
      fail(ErrorKind::NoRealization, fam.test);
    }
    if ((u <= 0).any()) {
      fam.test = "candidate u = -g_y/f_y not positive";
      fail(ErrorKind::NoRealization, fam.test);
    }
    Field uf = Field::sample(s, [&](double, double) { return 0.0; });
    for (int j = 0; j < s.ny; ++j) uf.values.col(j) = u;
    const Field ux = partial_x(uf, opt.accuracy);
    const Field::Array res = ux.values + f.values * uf.values + g.values;
    fam.ode_residual = res.abs().maxCoeff();
    if (fam.ode_residual > std::max(1e-6, 100 * h2) * opt.tol_scale * (1 + u.abs().maxCoeff() * (1 + f.max_abs()) + g.max_abs())) {
      fam.test = "candidate u fails u' + f u + g = 0";
      fail(ErrorKind::NoRealization, fam.test);
    }
    fam.test = "unique candidate u = -g_y/f_y";
    Field ucol = uf;
    fam.unique_u = row_curve(ucol, fam.y_line);
    fam.f_of_x = row_curve(f, fam.y_line);
    fam.g_of_x = row_curve(g, fam.y_line);
    return fam;
  }
  fam.branch = MoldingFamily::Branch::OneParameter;
  fam.test = "f_y = g_y = 0: one-parameter ODE family";
  fam.f_of_x = row_curve(f, fam.y_line);
  fam.g_of_x = row_curve(g, fam.y_line);
  return fam;
}

Field type1_quadratic_invariant(const ShapeOperatorField& sf, ClassifyOptions opt) {
  const auto rep = classify(sf, opt);
  if (rep.verdict != Verdict::TypeI_first)
    fail(ErrorKind::PreconditionViolation, std::string("quadratic invariant needs TypeI_first, got ") + to_string(rep.verdict));
  const CoframeData d = coframe_data(sf, opt.accuracy);
  return Field(sf.spec, (1 - d.K.K2.values) * d.cf.s.values * d.cf.s.values);
}

}  // namespace preshape
