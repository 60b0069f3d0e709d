#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <vector>

#include "preshape/grid.hpp"

namespace preshape {

// Gauss-Legendre nodes/weights on [-1, 1]
template <int N>
const std::pair<std::vector<double>, std::vector<double>>& gauss_rule() {
  static const auto rule = [] {
    using G = boost::math::quadrature::gauss<double, N>;
    std::vector<double> x, w;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    for (size_t k = 0; k < a.size(); ++k) {
      if (a[k] == 0.0) {
        x.push_back(0.0);
        w.push_back(wt[k]);
      } else {
        x.push_back(a[k]);
        w.push_back(wt[k]);
        x.push_back(-a[k]);
        w.push_back(wt[k]);
      }
    }
    return std::make_pair(x, w);
  }();
  return rule;
}

namespace detail {

// derivative along one axis of a sampled array; axis 0 = first index
template <class Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> difference(
    const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v, int axis, Scalar h, int accuracy) {
  const int n = axis == 0 ? int(v.rows()) : int(v.cols());
  auto at = [&](int k, int m) -> Scalar { return axis == 0 ? v(k, m) : v(m, k); };
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> r(v.rows(), v.cols());
  const int lines = axis == 0 ? int(v.cols()) : int(v.rows());
  for (int m = 0; m < lines; ++m)
    for (int k = 0; k < n; ++k) {
      Scalar d;
      if (accuracy >= 4 && n >= 5) {
        if (k >= 2 && k <= n - 3) {
          d = (at(k - 2, m) - Scalar(8) * at(k - 1, m) + Scalar(8) * at(k + 1, m) - at(k + 2, m)) / (12 * h);
        } else {
          // one-sided fourth order on a five point stencil
          static const Scalar c[5][5] = {{-25, 48, -36, 16, -3},
                                         {-3, -10, 18, -6, 1},
                                         {1, -8, 0, 8, -1},
                                         {-1, 6, -18, 10, 3},
                                         {3, -16, 36, -48, 25}};
          const int s = k < 2 ? 0 : n - 5;
          const int row = k - s;
          d = 0;
          for (int q = 0; q < 5; ++q) d += c[row][q] * at(s + q, m);
          d /= 12 * h;
        }
      } else if (k == 0) {
        d = (-3 * at(0, m) + 4 * at(1, m) - at(2, m)) / (2 * h);
      } else if (k == n - 1) {
        d = (3 * at(n - 1, m) - 4 * at(n - 2, m) + at(n - 3, m)) / (2 * h);
      } else {
        d = (at(k + 1, m) - at(k - 1, m)) / (2 * h);
      }
      if (axis == 0)
        r(k, m) = d;
      else
        r(m, k) = d;
    }
  return r;
}

// cumulative integral of samples along a line, cubic exact interval rule
template <class Scalar>
std::vector<Scalar> cumulative(const std::vector<Scalar>& f, Scalar h) {
  const int n = int(f.size());
  std::vector<Scalar> F(n, Scalar(0));
  for (int k = 0; k + 1 < n; ++k) {
    Scalar piece;
    if (n < 4) {
      piece = h * (f[k] + f[k + 1]) / 2;
    } else if (k == 0) {
      piece = h * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24;
    } else if (k == n - 2) {
      piece = h * (9 * f[n - 1] + 19 * f[n - 2] - 5 * f[n - 3] + f[n - 4]) / 24;
    } else {
      piece = h * (-f[k - 1] + 13 * f[k] + 13 * f[k + 1] - f[k + 2]) / 24;
    }
    F[k + 1] = F[k] + piece;
  }
  return F;
}

}  // namespace detail

// accuracy = 2 gives the central/one-sided second order stencils; 4 the five point ones
template <class Scalar>
ScalarField2D<Scalar> partial_x(const ScalarField2D<Scalar>& f, int accuracy = 2) {
  if (f.analytic()) {
    auto src = f.source;
    return ScalarField2D<Scalar>::from_source(
        f.spec, [src](Scalar x, Scalar y, int n) { return src(x, y, n + 1).dx(); });
  }
  return ScalarField2D<Scalar>(f.spec, detail::difference<Scalar>(f.values, 0, f.spec.hx(), accuracy));
}

template <class Scalar>
ScalarField2D<Scalar> partial_y(const ScalarField2D<Scalar>& f, int accuracy = 2) {
  if (f.analytic()) {
    auto src = f.source;
    return ScalarField2D<Scalar>::from_source(
        f.spec, [src](Scalar x, Scalar y, int n) { return src(x, y, n + 1).dy(); });
  }
  return ScalarField2D<Scalar>(f.spec, detail::difference<Scalar>(f.values, 1, f.spec.hy(), accuracy));
}

// sampled copy: drops the analytic source so downstream work is finite-difference based
template <class Scalar>
ScalarField2D<Scalar> sampled(const ScalarField2D<Scalar>& f) {
  return ScalarField2D<Scalar>(f.spec, f.values);
}

template <class Scalar>
ScalarField2D<Scalar> closedness_residual(const OneForm2DT<Scalar>& w, int accuracy = 2) {
  if (!(w.px.spec == w.py.spec)) fail(ErrorKind::GridMismatch, "one-form components on different grids");
  const auto a = partial_y(w.px, accuracy);
  const auto b = partial_x(w.py, accuracy);
  return ScalarField2D<Scalar>(w.px.spec, a.values - b.values);
}

struct PrimitiveOptions {
  double tol_closed = -1;  // < 0 selects the default for the source kind
  bool check_closed = true;
  int accuracy = 2;
  int gauss_points = 8;
};

template <class Scalar>
struct Primitive {
  ScalarField2D<Scalar> F;
  Scalar path_discrepancy = 0;  // row-then-column vs column-then-row
  Scalar max_residual = 0;
};

template <class Scalar>
Scalar default_tol_closed(const ScalarField2D<Scalar>& f) {
  return f.analytic() ? Scalar(1e-6) : Scalar(50) * f.spec.h() * f.spec.h();
}

namespace detail {

template <class Scalar>
Scalar line_integral(const SourceT<Scalar>& src, bool along_x, Scalar fixed, Scalar a, Scalar b,
                     int points) {
  const auto& rule = points <= 8 ? gauss_rule<8>() : gauss_rule<16>();
  const Scalar mid = (a + b) / 2, half = (b - a) / 2;
  Scalar s(0);
  for (size_t k = 0; k < rule.first.size(); ++k) {
    const Scalar t = mid + half * Scalar(rule.first[k]);
    s += Scalar(rule.second[k]) * (along_x ? src(t, fixed, 0).value() : src(fixed, t, 0).value());
  }
  return s * half;
}

// F(i, j) from F(base) = 0, first leg along `first_x` direction through the base
template <class Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> integrate_legs(const OneForm2DT<Scalar>& w, int bi,
                                                                    int bj, bool first_x, int points) {
  const auto& s = w.px.spec;
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> F(s.nx, s.ny);
  const bool analytic = w.px.analytic() && w.py.analytic();
  // leg 1: along the base line
  const int n1 = first_x ? s.nx : s.ny;
  const int b1 = first_x ? bi : bj;
  std::vector<Scalar> base(n1, Scalar(0));
  if (analytic) {
    const auto& src = first_x ? w.px.source : w.py.source;
    const Scalar fixed = first_x ? s.y(bj) : s.x(bi);
    for (int k = b1 + 1; k < n1; ++k) {
      const Scalar a = first_x ? s.x(k - 1) : s.y(k - 1), b = first_x ? s.x(k) : s.y(k);
      base[k] = base[k - 1] + line_integral(src, first_x, fixed, a, b, points);
    }
    for (int k = b1 - 1; k >= 0; --k) {
      const Scalar a = first_x ? s.x(k + 1) : s.y(k + 1), b = first_x ? s.x(k) : s.y(k);
      base[k] = base[k + 1] + line_integral(src, first_x, fixed, a, b, points);
    }
  } else {
    std::vector<Scalar> f(n1);
    for (int k = 0; k < n1; ++k) f[k] = first_x ? w.px(k, bj) : w.py(bi, k);
    auto C = cumulative(f, first_x ? s.hx() : s.hy());
    for (int k = 0; k < n1; ++k) base[k] = C[k] - C[b1];
  }
  // leg 2: perpendicular lines from each base-line node
  const int n2 = first_x ? s.ny : s.nx;
  const int b2 = first_x ? bj : bi;
  for (int k = 0; k < n1; ++k) {
    std::vector<Scalar> line(n2, Scalar(0));
    if (analytic) {
      const auto& src = first_x ? w.py.source : w.px.source;
      const Scalar fixed = first_x ? s.x(k) : s.y(k);
      for (int m = b2 + 1; m < n2; ++m) {
        const Scalar a = first_x ? s.y(m - 1) : s.x(m - 1), b = first_x ? s.y(m) : s.x(m);
        line[m] = line[m - 1] + line_integral(src, !first_x, fixed, a, b, points);
      }
      for (int m = b2 - 1; m >= 0; --m) {
        const Scalar a = first_x ? s.y(m + 1) : s.x(m + 1), b = first_x ? s.y(m) : s.x(m);
        line[m] = line[m + 1] + line_integral(src, !first_x, fixed, a, b, points);
      }
    } else {
      std::vector<Scalar> f(n2);
      for (int m = 0; m < n2; ++m) f[m] = first_x ? w.py(k, m) : w.px(m, k);
      auto C = cumulative(f, first_x ? s.hy() : s.hx());
      for (int m = 0; m < n2; ++m) line[m] = C[m] - C[b2];
    }
    for (int m = 0; m < n2; ++m) {
      if (first_x)
        F(k, m) = base[k] + line[m];
      else
        F(m, k) = base[k] + line[m];
    }
  }
  return F;
}

}  // namespace detail

template <class Scalar>
Primitive<Scalar> path_primitive(const OneForm2DT<Scalar>& w, int bi, int bj, PrimitiveOptions opt = {}) {
  const auto& s = w.px.spec;
  if (!(s == w.py.spec)) fail(ErrorKind::GridMismatch, "one-form components on different grids");
  if (bi < 0 || bj < 0 || bi >= s.nx || bj >= s.ny) fail(ErrorKind::InputError, "base node outside grid");
  Primitive<Scalar> out;
  if (opt.check_closed) {
    const Scalar tol = opt.tol_closed > 0 ? Scalar(opt.tol_closed) : default_tol_closed(w.px);
    const auto r = closedness_residual(w, opt.accuracy);
    const Scalar scale = std::max(w.px.max_abs(), w.py.max_abs());
    out.max_residual = r.values.abs().maxCoeff();
    if (!(out.max_residual <= tol * (1 + scale)))
      fail(ErrorKind::NotClosed, "max closedness residual " + std::to_string(double(out.max_residual)));
  }
  auto F1 = detail::integrate_legs(w, bi, bj, true, opt.gauss_points);
  auto F2 = detail::integrate_legs(w, bi, bj, false, opt.gauss_points);
  out.path_discrepancy = (F1 - F2).abs().maxCoeff();
  out.F = ScalarField2D<Scalar>(s, std::move(F1));
  return out;
}

}  // namespace preshape
