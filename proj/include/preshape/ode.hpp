#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "preshape/curve.hpp"
#include "preshape/error.hpp"

namespace preshape {

template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using OdeRhs = std::function<VecX<Scalar>(Scalar, const VecX<Scalar>&)>;

template <class Scalar>
VecX<Scalar> rk4_step(const OdeRhs<Scalar>& f, Scalar t, const VecX<Scalar>& y, Scalar h) {
  const VecX<Scalar> k1 = f(t, y);
  const VecX<Scalar> k2 = f(t + h / 2, y + (h / 2) * k1);
  const VecX<Scalar> k3 = f(t + h / 2, y + (h / 2) * k2);
  const VecX<Scalar> k4 = f(t + h, y + h * k3);
  return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// RK4 trajectory with cubic Hermite dense output
template <class Scalar>
struct OdeSolution {
  std::vector<Scalar> t;
  std::vector<VecX<Scalar>> y, dy;

  Scalar t_begin() const { return std::min(t.front(), t.back()); }
  Scalar t_end() const { return std::max(t.front(), t.back()); }

  VecX<Scalar> operator()(Scalar s) const { return eval(s, false); }
  VecX<Scalar> derivative(Scalar s) const { return eval(s, true); }

  VecX<Scalar> eval(Scalar s, bool deriv) const {
    const int n = int(t.size());
    if (n == 1) return deriv ? dy[0] : y[0];
    const bool inc = t.back() > t.front();
    // locate interval
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if ((t[mid] <= s) == inc)
        lo = mid;
      else
        hi = mid;
    }
    const Scalar h = t[hi] - t[lo];
    const Scalar u = (s - t[lo]) / h;
    const Scalar u2 = u * u, u3 = u2 * u;
    if (!deriv) {
      const Scalar h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
      return h00 * y[lo] + h10 * h * dy[lo] + h01 * y[hi] + h11 * h * dy[hi];
    }
    const Scalar d00 = 6 * u2 - 6 * u, d10 = 3 * u2 - 4 * u + 1, d01 = -6 * u2 + 6 * u, d11 = 3 * u2 - 2 * u;
    return (d00 * y[lo] + d01 * y[hi]) / h + d10 * dy[lo] + d11 * dy[hi];
  }

  // component k as a curve, with first derivative from the right hand side
  Curve1D<Scalar> component(int k) const {
    Curve1D<Scalar> c;
    c.t0 = t_begin();
    c.t1 = t_end();
    auto self = std::make_shared<OdeSolution>(*this);
    c.value = [self, k](Scalar s) { return (*self)(s)(k); };
    return c;
  }
};

template <class Scalar>
OdeSolution<Scalar> ode_solve_1d(const OdeRhs<Scalar>& rhs, const VecX<Scalar>& y0, Scalar t0, Scalar t1,
                                 int steps) {
  if (steps < 1) fail(ErrorKind::InputError, "ode_solve_1d needs at least one step");
  if (!y0.allFinite()) fail(ErrorKind::NonFinite, "non-finite initial value");
  OdeSolution<Scalar> sol;
  const Scalar h = (t1 - t0) / Scalar(steps);
  VecX<Scalar> y = y0;
  sol.t.reserve(steps + 1);
  sol.t.push_back(t0);
  sol.y.push_back(y);
  sol.dy.push_back(rhs(t0, y));
  for (int k = 0; k < steps; ++k) {
    const Scalar t = t0 + h * Scalar(k);
    y = rk4_step(rhs, t, y, h);
    const Scalar tn = k + 1 == steps ? t1 : t0 + h * Scalar(k + 1);
    if (!y.allFinite())
      fail(ErrorKind::NonFinite, "solution blew up at step " + std::to_string(k + 1) + " (t=" +
                                     std::to_string(double(tn)) + ")");
    sol.t.push_back(tn);
    sol.y.push_back(y);
    sol.dy.push_back(rhs(tn, y));
    if (!sol.dy.back().allFinite())
      fail(ErrorKind::NonFinite, "right hand side non-finite at t=" + std::to_string(double(tn)));
  }
  return sol;
}

}  // namespace preshape
