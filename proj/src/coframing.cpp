#include "preshape/coframing.hpp"

#include <string>

namespace preshape {

JetBundle jet_bundle(const Jet& U, const Jet& V, int levels) {
  JetBundle b;
  b.s = V.dx() / (V - U);
  b.t = U.dy() / (U - V);
  if (levels < 1 || b.s.order() < 1) return b;
  const Jet st = b.s * b.t;
  b.K1 = -b.s.dy() / st;
  b.K2 = -b.t.dx() / st;
  if (levels < 2 || b.K1.order() < 1) return b;
  b.K11 = b.K1.dx() / b.s;
  b.K12 = b.K1.dy() / b.t;
  b.K21 = b.K2.dx() / b.s;
  b.K22 = b.K2.dy() / b.t;
  if (levels < 3 || b.K11.order() < 1) return b;
  b.K111 = b.K11.dx() / b.s;
  b.K222 = b.K22.dy() / b.t;
  b.K121 = b.K12.dx() / b.s;
  b.K211 = b.K21.dx() / b.s;
  return b;
}

namespace {

void check_coframe(const Coframing& cf) {
  const auto& sp = cf.s.spec;
  const double ts = 1e-8 * std::max(1.0, cf.s.max_abs()), tt = 1e-8 * std::max(1.0, cf.t.max_abs());
  for (int j = 0; j < sp.ny; ++j)
    for (int i = 0; i < sp.nx; ++i) {
      const double s = cf.s(i, j), t = cf.t(i, j);
      if (!std::isfinite(s) || !std::isfinite(t) || std::abs(s) < ts || std::abs(t) < tt)
        fail(ErrorKind::DegenerateCoframe,
             "s or t vanishes at node (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
}

using Member = Jet JetBundle::*;

struct MemberInfo {
  Member m;
  int depth;  // derivative levels above U, V
};

Field bundle_field(const GridSpec& sp, const Source& U, const Source& V, MemberInfo info,
                   const Field::Array& values) {
  Field f;
  f.spec = sp;
  f.values = values;
  f.source = [U, V, info](double x, double y, int n) {
    const int m = n + info.depth;
    return jet_bundle(U(x, y, m), V(x, y, m), info.depth - 1).*(info.m);
  };
  return f;
}

}  // namespace

Coframing compute_coframing(const ShapeOperatorField& sf, int accuracy) {
  if (!sf.fully_invertible) fail(ErrorKind::DegenerateCoframe, "operator not invertible on the grid");
  Coframing cf;
  if (sf.U.analytic() && sf.V.analytic()) {
    auto U = sf.U.source, V = sf.V.source;
    cf.s = Field::from_source(sf.spec, [U, V](double x, double y, int n) {
      const Jet u = U(x, y, n + 1), v = V(x, y, n + 1);
      return v.dx() / (v - u);
    });
    cf.t = Field::from_source(sf.spec, [U, V](double x, double y, int n) {
      const Jet u = U(x, y, n + 1), v = V(x, y, n + 1);
      return u.dy() / (u - v);
    });
  } else {
    const Field Vx = partial_x(sampled(sf.V), accuracy), Uy = partial_y(sampled(sf.U), accuracy);
    cf.s = Field(sf.spec, Vx.values / (sf.V.values - sf.U.values));
    cf.t = Field(sf.spec, Uy.values / (sf.U.values - sf.V.values));
  }
  check_coframe(cf);
  return cf;
}

StructureFunctions compute_structure_functions(const Coframing& cf, int accuracy) {
  check_coframe(cf);
  StructureFunctions K;
  auto div = [](const Field& a, const Field& b) {
    return combine(a, b, [](const auto& p, const auto& q) { return p / q; });
  };
  auto mul = [](const Field& a, const Field& b) {
    return combine(a, b, [](const auto& p, const auto& q) { return p * q; });
  };
  auto neg = [](const Field& a) {
    if (a.analytic()) {
      auto s = a.source;
      return Field::from_source(a.spec, [s](double x, double y, int n) { return -s(x, y, n); });
    }
    return Field(a.spec, -a.values);
  };
  const Field st = mul(cf.s, cf.t);
  K.K1 = neg(div(partial_y(cf.s, accuracy), st));
  K.K2 = neg(div(partial_x(cf.t, accuracy), st));
  K.K11 = div(partial_x(K.K1, accuracy), cf.s);
  K.K12 = div(partial_y(K.K1, accuracy), cf.t);
  K.K21 = div(partial_x(K.K2, accuracy), cf.s);
  K.K22 = div(partial_y(K.K2, accuracy), cf.t);
  K.K111 = div(partial_x(K.K11, accuracy), cf.s);
  K.K222 = div(partial_y(K.K22, accuracy), cf.t);
  K.K121 = div(partial_x(K.K12, accuracy), cf.s);
  K.K211 = div(partial_x(K.K21, accuracy), cf.s);
  return K;
}

CoframeData coframe_data(const ShapeOperatorField& sf, int accuracy) {
  if (!(sf.U.analytic() && sf.V.analytic())) {
    CoframeData d;
    d.cf = compute_coframing(sf, accuracy);
    d.K = compute_structure_functions(d.cf, accuracy);
    return d;
  }
  if (!sf.fully_invertible) fail(ErrorKind::DegenerateCoframe, "operator not invertible on the grid");
  const auto& sp = sf.spec;
  const Member members[12] = {&JetBundle::s,    &JetBundle::t,    &JetBundle::K1,   &JetBundle::K2,
                              &JetBundle::K11,  &JetBundle::K12,  &JetBundle::K21,  &JetBundle::K22,
                              &JetBundle::K111, &JetBundle::K222, &JetBundle::K121, &JetBundle::K211};
  const int depth[12] = {1, 1, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4};
  std::vector<Field::Array> vals(12, Field::Array(sp.nx, sp.ny));
  auto U = sf.U.source, V = sf.V.source;
  for (int j = 0; j < sp.ny; ++j)
    for (int i = 0; i < sp.nx; ++i) {
      const JetBundle b = jet_bundle(U(sp.x(i), sp.y(j), 4), V(sp.x(i), sp.y(j), 4), 3);
      for (int k = 0; k < 12; ++k) vals[k](i, j) = (b.*members[k]).value();
    }
  std::vector<Field> f;
  for (int k = 0; k < 12; ++k) f.push_back(bundle_field(sp, U, V, {members[k], depth[k]}, vals[k]));
  CoframeData d;
  d.cf = Coframing{f[0], f[1]};
  check_coframe(d.cf);
  d.K = StructureFunctions{f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9], f[10], f[11]};
  (void)accuracy;
  return d;
}

std::pair<Field, Field> structure_reconstruction_residual(const Coframing& cf, const StructureFunctions& K,
                                                          int accuracy) {
  const Field sy = partial_y(cf.s, accuracy), tx = partial_x(cf.t, accuracy);
  const Field::Array st = cf.s.values * cf.t.values;
  return {Field(cf.s.spec, -sy.values - K.K1.values * st), Field(cf.s.spec, tx.values + K.K2.values * st)};
}

}  // namespace preshape
