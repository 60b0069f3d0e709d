#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "preshape/error.hpp"
#include "preshape/jet.hpp"

namespace preshape {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
struct GridSpecT {
  int nx = 3, ny = 3;
  Scalar x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  Scalar hx() const { return (x1 - x0) / Scalar(nx - 1); }
  Scalar hy() const { return (y1 - y0) / Scalar(ny - 1); }
  Scalar x(int i) const { return x0 + hx() * Scalar(i); }
  Scalar y(int j) const { return y0 + hy() * Scalar(j); }
  Scalar h() const { return std::max(hx(), hy()); }
  Scalar diameter() const { return std::hypot(x1 - x0, y1 - y0); }

  void validate() const {
    if (nx < 3 || ny < 3) fail(ErrorKind::InputError, "grid needs at least 3x3 nodes");
    if (!(x1 > x0) || !(y1 > y0)) fail(ErrorKind::InputError, "grid bounds must be increasing");
  }
  bool operator==(const GridSpecT& o) const {
    return nx == o.nx && ny == o.ny && x0 == o.x0 && x1 == o.x1 && y0 == o.y0 && y1 == o.y1;
  }

  // node nearest the rectangle center
  std::pair<int, int> center() const { return {(nx - 1) / 2, (ny - 1) / 2}; }

  static GridSpecT square(int n, Scalar a0, Scalar a1, Scalar b0, Scalar b1) {
    return GridSpecT{n, n, a0, a1, b0, b1};
  }
};

using GridSpec = GridSpecT<double>;

// (x, y, order) -> Taylor jet of the function at (x, y)
template <class Scalar>
using SourceT = std::function<Jet2<Scalar>(Scalar, Scalar, int)>;
using Source = SourceT<double>;

template <class Scalar>
struct ScalarField2D {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GridSpecT<Scalar> spec;
  Array values;  // values(i, j) at (x_i, y_j)
  SourceT<Scalar> source;

  ScalarField2D() = default;
  ScalarField2D(const GridSpecT<Scalar>& s, Array v) : spec(s), values(std::move(v)) {
    if (values.rows() != spec.nx || values.cols() != spec.ny)
      fail(ErrorKind::GridMismatch, "value array does not match grid");
  }

  static ScalarField2D from_source(const GridSpecT<Scalar>& s, SourceT<Scalar> src) {
    ScalarField2D f;
    f.spec = s;
    f.source = std::move(src);
    f.values.resize(s.nx, s.ny);
    for (int j = 0; j < s.ny; ++j)
      for (int i = 0; i < s.nx; ++i) f.values(i, j) = f.source(s.x(i), s.y(j), 0).value();
    return f;
  }
  static ScalarField2D constant(const GridSpecT<Scalar>& s, Scalar c) {
    return from_source(s, [c](Scalar, Scalar, int n) { return Jet2<Scalar>(c, n); });
  }
  template <class F>
  static ScalarField2D sample(const GridSpecT<Scalar>& s, F&& fn) {
    Array v(s.nx, s.ny);
    for (int j = 0; j < s.ny; ++j)
      for (int i = 0; i < s.nx; ++i) v(i, j) = fn(s.x(i), s.y(j));
    return ScalarField2D(s, std::move(v));
  }

  bool analytic() const { return static_cast<bool>(source); }
  Scalar operator()(int i, int j) const { return values(i, j); }

  Jet2<Scalar> jet(Scalar x, Scalar y, int order) const {
    if (!source) fail(ErrorKind::PreconditionViolation, "jet requested from sampled field");
    return source(x, y, order);
  }

  // value anywhere in the rectangle; bicubic Lagrange for samples
  Scalar at(Scalar x, Scalar y) const {
    if (source) return source(x, y, 0).value();
    const Scalar u = (x - spec.x0) / spec.hx(), v = (y - spec.y0) / spec.hy();
    const int i0 = std::clamp(int(std::floor(u)) - 1, 0, spec.nx - 4 < 0 ? 0 : spec.nx - 4);
    const int j0 = std::clamp(int(std::floor(v)) - 1, 0, spec.ny - 4 < 0 ? 0 : spec.ny - 4);
    const int mi = std::min(4, spec.nx), mj = std::min(4, spec.ny);
    auto weights = [](Scalar t, int base, int m, Scalar* w) {
      for (int a = 0; a < m; ++a) {
        Scalar p(1);
        for (int b = 0; b < m; ++b)
          if (b != a) p *= (t - Scalar(base + b)) / Scalar(a - b);
        w[a] = p;
      }
    };
    Scalar wx[4], wy[4];
    weights(u, i0, mi, wx);
    weights(v, j0, mj, wy);
    Scalar r(0);
    for (int b = 0; b < mj; ++b)
      for (int a = 0; a < mi; ++a) r += wx[a] * wy[b] * values(i0 + a, j0 + b);
    return r;
  }

  Scalar max_abs() const { return values.abs().maxCoeff(); }
  bool all_finite() const { return values.allFinite(); }
};

using Field = ScalarField2D<double>;

template <class Scalar>
struct OneForm2DT {
  ScalarField2D<Scalar> px, py;
};
using OneForm2D = OneForm2DT<double>;

using VectorField = std::array<Field, 3>;

inline Vec3 at_node(const VectorField& v, int i, int j) {
  return Vec3(v[0](i, j), v[1](i, j), v[2](i, j));
}

// jets of the three components at once
using VectorSource = std::function<std::array<Jet, 3>(double, double, int)>;

inline VectorField vector_field(const GridSpec& s, const VectorSource& src) {
  VectorField v;
  for (int k = 0; k < 3; ++k)
    v[k] = Field::from_source(s, [src, k](double x, double y, int n) { return src(x, y, n)[k]; });
  return v;
}

inline Mask full_mask(const GridSpec& s, bool value = true) {
  return Mask::Constant(s.nx, s.ny, value);
}

// pointwise combination of analytic fields, kept analytic
template <class F>
Field combine(const Field& a, const Field& b, F op) {
  if (a.analytic() && b.analytic()) {
    auto sa = a.source, sb = b.source;
    return Field::from_source(a.spec, [sa, sb, op](double x, double y, int n) {
      return op(sa(x, y, n), sb(x, y, n));
    });
  }
  return Field(a.spec, op(a.values, b.values));
}

struct Rect {
  int i0 = 0, j0 = 0, ni = 0, nj = 0;
  int area() const { return ni * nj; }
};

// largest axis-aligned block of true entries (histogram method)
inline Rect largest_true_rectangle(const Mask& m) {
  const int nx = int(m.rows()), ny = int(m.cols());
  std::vector<int> height(nx, 0);
  Rect best;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) height[i] = m(i, j) ? height[i] + 1 : 0;
    std::vector<int> stack;
    for (int i = 0; i <= nx; ++i) {
      const int hcur = i < nx ? height[i] : 0;
      while (!stack.empty() && height[stack.back()] >= hcur) {
        const int hh = height[stack.back()];
        stack.pop_back();
        const int left = stack.empty() ? 0 : stack.back() + 1;
        const int w = i - left;
        if (w * hh > best.area()) best = Rect{left, j - hh + 1, w, hh};
      }
      stack.push_back(i);
    }
  }
  return best;
}

inline GridSpec sub_spec(const GridSpec& s, const Rect& r) {
  return GridSpec{r.ni, r.nj, s.x(r.i0), s.x(r.i0 + r.ni - 1), s.y(r.j0), s.y(r.j0 + r.nj - 1)};
}

inline Field sub_field(const Field& f, const Rect& r) {
  Field g;
  g.spec = sub_spec(f.spec, r);
  g.values = f.values.block(r.i0, r.j0, r.ni, r.nj);
  g.source = f.source;
  return g;
}

}  // namespace preshape
