#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>

namespace preshape {

// Truncated bivariate Taylor polynomial around a point (x0, y0).
// Coefficient (i, j) multiplies dx^i dy^j, so it equals
// d^{i+j} f / dx^i dy^j divided by i! j!.
template <class Scalar, int Cap = 6>
class Jet2 {
 public:
  static constexpr int kCapacity = Cap;
  static constexpr int kSize = (Cap + 1) * (Cap + 2) / 2;

  Jet2() { c_.fill(Scalar(0)); }
  explicit Jet2(Scalar v, int order = 0) : order_(order) {
    c_.fill(Scalar(0));
    c_[0] = v;
  }

  static Jet2 constant(Scalar v, int order) { return Jet2(v, order); }
  static Jet2 var_x(Scalar x, int order) {
    Jet2 r(x, order);
    if (order >= 1) r.c_[index(1, 0)] = Scalar(1);
    return r;
  }
  static Jet2 var_y(Scalar y, int order) {
    Jet2 r(y, order);
    if (order >= 1) r.c_[index(0, 1)] = Scalar(1);
    return r;
  }

  static constexpr int index(int i, int j) {
    const int d = i + j;
    return d * (d + 1) / 2 + j;
  }
  static constexpr int count(int order) { return (order + 1) * (order + 2) / 2; }

  int order() const { return order_; }
  Scalar value() const { return c_[0]; }
  Scalar coeff(int i, int j) const { return c_[index(i, j)]; }
  Scalar& coeff(int i, int j) { return c_[index(i, j)]; }
  Scalar operator[](int k) const { return c_[k]; }
  Scalar& operator[](int k) { return c_[k]; }

  // mixed partial d^{i+j} / dx^i dy^j at the expansion point
  Scalar derivative(int i, int j) const {
    if (i + j > order_) return Scalar(0);
    return c_[index(i, j)] * factorial(i) * factorial(j);
  }

  Jet2 truncated(int order) const {
    Jet2 r = *this;
    r.order_ = std::min(order, order_);
    for (int k = count(r.order_); k < kSize; ++k) r.c_[k] = Scalar(0);
    return r;
  }

  // partial derivative as a jet of one order less
  Jet2 dx() const {
    assert(order_ >= 1);
    Jet2 r;
    r.order_ = order_ - 1;
    for (int d = 0; d <= r.order_; ++d)
      for (int j = 0; j <= d; ++j) {
        const int i = d - j;
        r.c_[index(i, j)] = Scalar(i + 1) * c_[index(i + 1, j)];
      }
    return r;
  }
  Jet2 dy() const {
    assert(order_ >= 1);
    Jet2 r;
    r.order_ = order_ - 1;
    for (int d = 0; d <= r.order_; ++d)
      for (int j = 0; j <= d; ++j) {
        const int i = d - j;
        r.c_[index(i, j)] = Scalar(j + 1) * c_[index(i, j + 1)];
      }
    return r;
  }

  Jet2& operator+=(const Jet2& o) {
    order_ = std::min(order_, o.order_);
    for (int k = 0; k < count(order_); ++k) c_[k] += o.c_[k];
    zero_tail();
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    order_ = std::min(order_, o.order_);
    for (int k = 0; k < count(order_); ++k) c_[k] -= o.c_[k];
    zero_tail();
    return *this;
  }
  Jet2& operator*=(const Jet2& o) {
    *this = *this * o;
    return *this;
  }
  Jet2& operator/=(const Jet2& o) {
    *this = *this / o;
    return *this;
  }
  Jet2& operator+=(Scalar s) {
    c_[0] += s;
    return *this;
  }
  Jet2& operator-=(Scalar s) {
    c_[0] -= s;
    return *this;
  }
  Jet2& operator*=(Scalar s) {
    for (int k = 0; k < count(order_); ++k) c_[k] *= s;
    return *this;
  }
  Jet2& operator/=(Scalar s) {
    for (int k = 0; k < count(order_); ++k) c_[k] /= s;
    return *this;
  }

  friend Jet2 operator-(Jet2 a) {
    for (int k = 0; k < count(a.order_); ++k) a.c_[k] = -a.c_[k];
    return a;
  }
  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator+(Jet2 a, Scalar s) { return a += s; }
  friend Jet2 operator+(Scalar s, Jet2 a) { return a += s; }
  friend Jet2 operator-(Jet2 a, Scalar s) { return a -= s; }
  friend Jet2 operator-(Scalar s, const Jet2& a) { return (-a) += s; }
  friend Jet2 operator*(Jet2 a, Scalar s) { return a *= s; }
  friend Jet2 operator*(Scalar s, Jet2 a) { return a *= s; }
  friend Jet2 operator/(Jet2 a, Scalar s) { return a /= s; }

  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.order_ = std::min(a.order_, b.order_);
    const int n = r.order_;
    for (int d1 = 0; d1 <= n; ++d1)
      for (int j1 = 0; j1 <= d1; ++j1) {
        const Scalar av = a.c_[index(d1 - j1, j1)];
        if (av == Scalar(0)) continue;
        for (int d2 = 0; d2 <= n - d1; ++d2)
          for (int j2 = 0; j2 <= d2; ++j2)
            r.c_[index(d1 - j1 + d2 - j2, j1 + j2)] += av * b.c_[index(d2 - j2, j2)];
      }
    return r;
  }
  friend Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
  friend Jet2 operator/(Scalar s, const Jet2& b) { return reciprocal(b) * s; }

  // g(f) from the derivatives g(f0), g'(f0), ... , g^(n)(f0)
  template <class Derivs>
  Jet2 compose(const Derivs& g) const {
    Jet2 delta = *this;
    delta.c_[0] = Scalar(0);
    Jet2 r(g[order_] / factorial(order_), order_);
    for (int k = order_ - 1; k >= 0; --k) {
      r = r * delta;
      r.c_[0] += g[k] / factorial(k);
    }
    return r;
  }

  static Scalar factorial(int n) {
    Scalar f(1);
    for (int k = 2; k <= n; ++k) f *= Scalar(k);
    return f;
  }

 private:
  void zero_tail() {
    for (int k = count(order_); k < kSize; ++k) c_[k] = Scalar(0);
  }

  friend Jet2 reciprocal(const Jet2& b) {
    std::array<Scalar, Cap + 1> g{};
    const Scalar inv = Scalar(1) / b.c_[0];
    Scalar p = inv;
    for (int k = 0; k <= b.order_; ++k) {
      g[k] = (k % 2 ? -p : p) * factorial(k);
      p *= inv;
    }
    return b.compose(g);
  }

  std::array<Scalar, kSize> c_;
  int order_ = 0;
};

template <class S, int C>
Jet2<S, C> exp(const Jet2<S, C>& f) {
  std::array<S, C + 1> g;
  g.fill(std::exp(f.value()));
  return f.compose(g);
}

template <class S, int C>
Jet2<S, C> log(const Jet2<S, C>& f) {
  std::array<S, C + 1> g{};
  const S v = f.value();
  g[0] = std::log(v);
  S p = S(1) / v;
  for (int k = 1; k <= f.order(); ++k) {
    g[k] = (k % 2 ? S(1) : S(-1)) * Jet2<S, C>::factorial(k - 1) * p;
    p /= v;
  }
  return f.compose(g);
}

template <class S, int C>
Jet2<S, C> pow(const Jet2<S, C>& f, S alpha) {
  std::array<S, C + 1> g{};
  const S v = f.value();
  S coef(1);
  for (int k = 0; k <= f.order(); ++k) {
    g[k] = coef * std::pow(v, alpha - S(k));
    coef *= alpha - S(k);
  }
  return f.compose(g);
}

template <class S, int C>
Jet2<S, C> sqrt(const Jet2<S, C>& f) {
  return pow(f, S(0.5));
}

template <class S, int C>
Jet2<S, C> sin(const Jet2<S, C>& f) {
  std::array<S, C + 1> g{};
  const S s = std::sin(f.value()), c = std::cos(f.value());
  const S cyc[4] = {s, c, -s, -c};
  for (int k = 0; k <= f.order(); ++k) g[k] = cyc[k % 4];
  return f.compose(g);
}

template <class S, int C>
Jet2<S, C> cos(const Jet2<S, C>& f) {
  std::array<S, C + 1> g{};
  const S s = std::sin(f.value()), c = std::cos(f.value());
  const S cyc[4] = {c, -s, -c, s};
  for (int k = 0; k <= f.order(); ++k) g[k] = cyc[k % 4];
  return f.compose(g);
}

template <class S, int C>
Jet2<S, C> sinh(const Jet2<S, C>& f) {
  std::array<S, C + 1> g{};
  const S s = std::sinh(f.value()), c = std::cosh(f.value());
  for (int k = 0; k <= f.order(); ++k) g[k] = k % 2 ? c : s;
  return f.compose(g);
}

template <class S, int C>
Jet2<S, C> cosh(const Jet2<S, C>& f) {
  std::array<S, C + 1> g{};
  const S s = std::sinh(f.value()), c = std::cosh(f.value());
  for (int k = 0; k <= f.order(); ++k) g[k] = k % 2 ? s : c;
  return f.compose(g);
}

template <class S, int C>
Jet2<S, C> square(const Jet2<S, C>& f) {
  return f * f;
}

// G(X, Y) where G is a jet in its own variables around (X.value(), Y.value())
template <class S, int C>
Jet2<S, C> compose2(const Jet2<S, C>& G, const Jet2<S, C>& X, const Jet2<S, C>& Y) {
  const int n = std::min({G.order(), X.order(), Y.order()});
  Jet2<S, C> dX = X.truncated(n), dY = Y.truncated(n);
  dX[0] = S(0);
  dY[0] = S(0);
  std::array<Jet2<S, C>, C + 1> px, py;
  px[0] = Jet2<S, C>(S(1), n);
  py[0] = Jet2<S, C>(S(1), n);
  for (int k = 1; k <= n; ++k) {
    px[k] = px[k - 1] * dX;
    py[k] = py[k - 1] * dY;
  }
  Jet2<S, C> r(S(0), n);
  for (int d = 0; d <= n; ++d)
    for (int j = 0; j <= d; ++j) {
      const S c = G.coeff(d - j, j);
      if (c != S(0)) r += (px[d - j] * py[j]) * c;
    }
  return r;
}

using Jet = Jet2<double>;

}  // namespace preshape
