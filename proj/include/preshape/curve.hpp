#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "preshape/error.hpp"
#include "preshape/jet.hpp"

namespace preshape {

inline constexpr int kMaxCurveDeriv = 10;

// Real function of one variable on [t0, t1]; derivative callback optional.
template <class Scalar>
struct Curve1D {
  using Derivs = std::function<void(Scalar, int, Scalar*)>;

  Scalar t0 = -1e300, t1 = 1e300;
  std::function<Scalar(Scalar)> value;
  Derivs derivs;  // fills out[0..n] with f, f', ..., f^(n)
  std::optional<Scalar> constant_value;
  std::string label;

  Scalar operator()(Scalar t) const { return value(t); }

  static Scalar h1d(Scalar t) { return Scalar(1e-5) * (Scalar(1) + std::abs(t)); }

  void derivatives(Scalar t, int n, Scalar* out) const {
    if (derivs) {
      derivs(t, n, out);
      return;
    }
    out[0] = value(t);
    for (int k = 1; k <= n; ++k) {
      // k-th central difference; step grows with k to keep roundoff bounded
      const Scalar h = k <= 2 ? h1d(t) : std::pow(Scalar(1e-16), Scalar(1) / Scalar(k + 2)) * (1 + std::abs(t));
      Scalar acc(0), binom(1);
      for (int m = 0; m <= k; ++m) {
        const Scalar arg = t + (Scalar(k) / 2 - Scalar(m)) * h;
        acc += (m % 2 ? -binom : binom) * value(arg);
        binom = binom * Scalar(k - m) / Scalar(m + 1);
      }
      out[k] = acc / std::pow(h, Scalar(k));
    }
  }
  Scalar derivative(Scalar t, int k) const {
    std::array<Scalar, kMaxCurveDeriv + 1> d{};
    derivatives(t, k, d.data());
    return d[k];
  }
  bool contains(Scalar t, Scalar slack = Scalar(1e-12)) const {
    return t >= t0 - slack * (1 + std::abs(t0)) && t <= t1 + slack * (1 + std::abs(t1));
  }

  static Curve1D constant(Scalar c) {
    Curve1D r;
    r.value = [c](Scalar) { return c; };
    r.derivs = [c](Scalar, int n, Scalar* out) {
      out[0] = c;
      for (int k = 1; k <= n; ++k) out[k] = Scalar(0);
    };
    r.constant_value = c;
    r.label = "const";
    return r;
  }

  // sum_k c[k] t^k
  static Curve1D polynomial(std::vector<Scalar> c) {
    Curve1D r;
    if (c.empty()) c.push_back(Scalar(0));
    bool is_const = true;
    for (size_t k = 1; k < c.size(); ++k) is_const = is_const && c[k] == Scalar(0);
    if (is_const) r.constant_value = c[0];
    r.value = [c](Scalar t) {
      Scalar v(0);
      for (size_t k = c.size(); k-- > 0;) v = v * t + c[k];
      return v;
    };
    r.derivs = [c](Scalar t, int n, Scalar* out) {
      std::vector<Scalar> d = c;
      for (int k = 0; k <= n; ++k) {
        Scalar v(0);
        for (size_t m = d.size(); m-- > 0;) v = v * t + d[m];
        out[k] = v;
        for (size_t m = 0; m + 1 < d.size(); ++m) d[m] = d[m + 1] * Scalar(m + 1);
        if (!d.empty()) d.pop_back();
      }
    };
    r.label = "poly";
    return r;
  }

  // local cubic Lagrange interpolant through (ts[k], vs[k]); ts strictly monotone
  static Curve1D interpolate(std::vector<Scalar> ts, std::vector<Scalar> vs) {
    if (ts.size() != vs.size() || ts.size() < 2) fail(ErrorKind::InputError, "interpolate needs matching samples");
    if (ts.front() > ts.back()) {
      std::reverse(ts.begin(), ts.end());
      std::reverse(vs.begin(), vs.end());
    }
    for (size_t k = 1; k < ts.size(); ++k)
      if (!(ts[k] > ts[k - 1])) fail(ErrorKind::InputError, "interpolation nodes not monotone");
    Curve1D r;
    r.t0 = ts.front();
    r.t1 = ts.back();
    r.label = "samples";
    r.value = [ts, vs](Scalar t) {
      const int n = int(ts.size());
      const int m = std::min(4, n);
      int k = int(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 2;
      k = std::clamp(k, 0, n - m);
      Scalar v(0);
      for (int a = 0; a < m; ++a) {
        Scalar w(1);
        for (int b = 0; b < m; ++b)
          if (b != a) w *= (t - ts[k + b]) / (ts[k + a] - ts[k + b]);
        v += w * vs[k + a];
      }
      return v;
    };
    return r;
  }

  // f(t) = amp * name(freq * t + phase) + offset
  static Curve1D named(const std::string& name, Scalar amp = 1, Scalar freq = 1, Scalar phase = 0,
                       Scalar offset = 0) {
    Curve1D r;
    r.label = name;
    std::function<void(Scalar, int, Scalar*)> base;
    if (name == "sin" || name == "cos") {
      const Scalar shift = name == "cos" ? Scalar(1) : Scalar(0);
      base = [shift](Scalar u, int n, Scalar* out) {
        for (int k = 0; k <= n; ++k) out[k] = std::sin(u + (Scalar(k) + shift) * Scalar(M_PI / 2));
      };
    } else if (name == "exp") {
      base = [](Scalar u, int n, Scalar* out) {
        for (int k = 0; k <= n; ++k) out[k] = std::exp(u);
      };
    } else if (name == "sinh" || name == "cosh") {
      const bool c = name == "cosh";
      base = [c](Scalar u, int n, Scalar* out) {
        for (int k = 0; k <= n; ++k) out[k] = ((k % 2 == 0) != c) ? std::sinh(u) : std::cosh(u);
      };
    } else if (name == "identity") {
      base = [](Scalar u, int n, Scalar* out) {
        out[0] = u;
        for (int k = 1; k <= n; ++k) out[k] = k == 1 ? Scalar(1) : Scalar(0);
      };
    } else if (name == "zero") {
      return constant(Scalar(0));
    } else {
      fail(ErrorKind::UnknownKind, "unknown builtin function '" + name + "'");
    }
    r.derivs = [=](Scalar t, int n, Scalar* out) {
      base(freq * t + phase, n, out);
      Scalar f(1);
      for (int k = 0; k <= n; ++k) {
        out[k] *= amp * f;
        f *= freq;
      }
      out[0] += offset;
    };
    r.value = [d = r.derivs](Scalar t) {
      Scalar v;
      d(t, 0, &v);
      return v;
    };
    return r;
  }
};

using Curve = Curve1D<double>;

// f(jet) using the curve's derivatives at the jet's value; shift k gives f^(k)(jet)
template <class Scalar, int C>
Jet2<Scalar, C> compose(const Curve1D<Scalar>& f, const Jet2<Scalar, C>& j, int shift = 0) {
  std::array<Scalar, kMaxCurveDeriv + 1> d{};
  f.derivatives(j.value(), j.order() + shift, d.data());
  std::array<Scalar, C + 1> g{};
  for (int k = 0; k <= j.order(); ++k) g[k] = d[k + shift];
  return j.compose(g);
}

// Build derivative callback of a curve from a jet-valued expression in one variable.
template <class Scalar>
typename Curve1D<Scalar>::Derivs derivs_from_jet(std::function<Jet2<Scalar>(Scalar, int)> expr) {
  return [expr](Scalar t, int n, Scalar* out) {
    const int m = std::min(n, Jet2<Scalar>::kCapacity);
    const Jet2<Scalar> j = expr(t, m);
    for (int k = 0; k <= m; ++k) out[k] = j.derivative(k, 0);
    for (int k = m + 1; k <= n; ++k) out[k] = Scalar(0);
  };
}

}  // namespace preshape
