#include "preshape/shape_field.hpp"

#include <string>

namespace preshape {

double tol_zero_for(const Field& f) { return 1e-8 * std::max(1.0, f.max_abs()); }

namespace {

Field reciprocal_field(const Field& f, const Mask& ok, bool all_ok) {
  if (f.analytic() && all_ok) {
    auto src = f.source;
    return Field::from_source(f.spec, [src](double x, double y, int n) { return 1.0 / src(x, y, n); });
  }
  Field::Array v = Field::Array::Zero(f.spec.nx, f.spec.ny);
  for (int j = 0; j < f.spec.ny; ++j)
    for (int i = 0; i < f.spec.nx; ++i)
      if (ok(i, j)) v(i, j) = 1.0 / f(i, j);
  return Field(f.spec, v);
}

ShapeOperatorField finish(ShapeOperatorField sf, BuildOptions opt) {
  const auto& s = sf.spec;
  s.validate();
  if (!sf.A.all_finite() || !sf.B.all_finite()) fail(ErrorKind::NonFinite, "curvature samples not finite");
  const double tol = 1e-8 * std::max({1.0, sf.A.max_abs(), sf.B.max_abs()});
  sf.umbilic = Mask::Constant(s.nx, s.ny, false);
  int pos = 0, neg = 0;
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      const double d = sf.A(i, j) - sf.B(i, j);
      if (std::abs(d) <= tol) {
        sf.umbilic(i, j) = true;
        if (!opt.allow_umbilics)
          fail(ErrorKind::UmbilicPresent, "A = B at node (" + std::to_string(i) + "," + std::to_string(j) + ")");
      } else if (d > 0) {
        ++pos;
      } else {
        ++neg;
      }
    }
  if (pos > 0 && neg > 0 && !opt.allow_umbilics)
    fail(ErrorKind::UmbilicPresent, "A - B changes sign on the grid");
  sf.ordering = neg > pos ? -1 : 1;
  return sf;
}

}  // namespace

ShapeOperatorField build_from_curvatures(const Field& A, const Field& B, BuildOptions opt) {
  if (!(A.spec == B.spec)) fail(ErrorKind::GridMismatch, "A and B on different grids");
  ShapeOperatorField sf;
  sf.spec = A.spec;
  sf.A = A;
  sf.B = B;
  sf = finish(std::move(sf), opt);
  const double tol = 1e-8 * std::max({1.0, A.max_abs(), B.max_abs()});
  Mask okA = A.values.abs() > tol, okB = B.values.abs() > tol;
  sf.invertible = okA && okB;
  sf.fully_invertible = sf.invertible.all();
  sf.U = reciprocal_field(A, okA, okA.all());
  sf.V = reciprocal_field(B, okB, okB.all());
  return sf;
}

ShapeOperatorField build_from_reciprocals(const Field& U, const Field& V, BuildOptions opt) {
  if (!(U.spec == V.spec)) fail(ErrorKind::GridMismatch, "U and V on different grids");
  const double tol = 1e-8 * std::max({1.0, U.max_abs(), V.max_abs()});
  Mask okU = U.values.abs() > tol, okV = V.values.abs() > tol;
  ShapeOperatorField sf;
  sf.spec = U.spec;
  sf.U = U;
  sf.V = V;
  sf.A = reciprocal_field(U, okU, okU.all());
  sf.B = reciprocal_field(V, okV, okV.all());
  sf.invertible = okU && okV;
  sf.fully_invertible = sf.invertible.all();
  return finish(std::move(sf), opt);
}

NondegeneracyReport nondegeneracy_report(const ShapeOperatorField& sf) {
  NondegeneracyReport r;
  const auto& s = sf.spec;
  const Field Ay = partial_y(sf.A), Bx = partial_x(sf.B);
  r.tol_zero = 1e-8 * std::max({1.0, sf.A.max_abs(), sf.B.max_abs()});
  auto interior = [&](const Field::Array& v) { return v.block(1, 1, s.nx - 2, s.ny - 2); };
  r.min_A_minus_B = interior((sf.A.values - sf.B.values).abs()).minCoeff();
  r.min_abs_A = interior(sf.A.values.abs()).minCoeff();
  r.min_abs_B = interior(sf.B.values.abs()).minCoeff();
  r.min_abs_Ay = interior(Ay.values.abs()).minCoeff();
  r.min_abs_Bx = interior(Bx.values.abs()).minCoeff();
  r.max_abs_Ay = interior(Ay.values.abs()).maxCoeff();
  r.max_abs_Bx = interior(Bx.values.abs()).maxCoeff();
  // derivatives of sampled data carry the O(h^2) floor
  double tol_d = r.tol_zero;
  if (!sf.A.analytic() || !sf.B.analytic())
    tol_d = std::max(tol_d, 100 * s.h() * s.h() * std::max({1.0, sf.A.max_abs(), sf.B.max_abs()}) * 1e-2);
  r.invertible = r.min_abs_A > r.tol_zero && r.min_abs_B > r.tol_zero;
  r.Ay_zero_everywhere = r.max_abs_Ay <= tol_d;
  r.Bx_zero_everywhere = r.max_abs_Bx <= tol_d;
  r.nondegenerate = r.min_A_minus_B > r.tol_zero && r.min_abs_Ay > tol_d && r.min_abs_Bx > tol_d;
  return r;
}

namespace {
Jet transpose_jet(const Jet& j) {
  Jet r(0.0, j.order());
  for (int d = 0; d <= j.order(); ++d)
    for (int b = 0; b <= d; ++b) r.coeff(d - b, b) = j.coeff(b, d - b);
  return r;
}
}  // namespace

Field transposed(const Field& f) {
  GridSpec t{f.spec.ny, f.spec.nx, f.spec.y0, f.spec.y1, f.spec.x0, f.spec.x1};
  if (f.analytic()) {
    auto src = f.source;
    Field r;
    r.spec = t;
    r.values = f.values.transpose();
    r.source = [src](double x, double y, int n) { return transpose_jet(src(y, x, n)); };
    return r;
  }
  return Field(t, f.values.transpose());
}

ShapeOperatorField transposed(const ShapeOperatorField& sf) {
  ShapeOperatorField r;
  r.spec = GridSpec{sf.spec.ny, sf.spec.nx, sf.spec.y0, sf.spec.y1, sf.spec.x0, sf.spec.x1};
  r.A = transposed(sf.B);
  r.B = transposed(sf.A);
  r.U = transposed(sf.V);
  r.V = transposed(sf.U);
  r.invertible = sf.invertible.transpose();
  r.umbilic = sf.umbilic.transpose();
  r.ordering = -sf.ordering;
  r.fully_invertible = sf.fully_invertible;
  return r;
}

}  // namespace preshape
