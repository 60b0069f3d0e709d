#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "preshape/coframing.hpp"
#include "preshape/curve.hpp"
#include "preshape/types.hpp"

namespace preshape {

// roots of c(t) = t^3 + 3 c2 t^2 + 3 c1 t + c0
struct LambdaTriple {
  double l1 = 0, l2 = 1, l3 = 2;
  std::array<double, 3> c() const;  // (c0, c1, c2)
  void validate() const;
};

struct CubicDomain {
  LambdaTriple lambda;
  // D: l1 < Y < l2 < X < l3
  double X_lo = 0, X_hi = 0, Y_lo = 0, Y_hi = 0;
  double margin() const { return 1e-2 * (lambda.l3 - lambda.l1); }
  GridSpec grid(int n) const;  // D shrunk by the margin
};

CubicDomain cubic_domain(double c0, double c1, double c2);
CubicDomain cubic_domain(const LambdaTriple& l);

struct NaturalXY {
  Field X, Y;
  double theta_residual = 0;
  double path_discrepancy = 0;
};
// d log Z = -2 (theta1 + theta2), dX = -2 Z theta1, Y = X - Z
NaturalXY natural_coordinates(const Coframing& cf);

// a = c(X)/(Y-X)^3, b = c(Y)/(X-Y)^3, p in the general sign convention
FrobeniusSolution abp_closed_form_t2(const Field& X, const Field& Y, const std::array<double, 3>& c);
// same with X, Y the grid coordinates (analytic)
FrobeniusSolution abp_closed_form_t2(const GridSpec& spec, const std::array<double, 3>& c);

struct EulerPotential {
  std::string kind;
  std::function<Jet(double, double, int)> phi;  // jets in (X, Y)
  std::function<bool(double, double)> in_domain;

  Jet jet(double X, double Y, int order) const;
  Field Phi(const GridSpec& s) const;
  Field PhiX(const GridSpec& s) const;
  Field PhiY(const GridSpec& s) const;
};

struct PotentialParams {
  int degree = 2;      // homogeneous kind
  double scale = 1.0;  // multiplies the potential
};

// quadric, elliptic, quadratic, cubic, log, homogeneous
EulerPotential builtin_potential(const std::string& kind, PotentialParams params = {});

// coefficient of X^k Y^(d-k); X^d coefficient -(2d-1)/d
std::vector<double> homogeneous_coefficients(int d);

// Poisson integrals, substituted xi = Y + (X - Y) sin^2(tau)
EulerPotential poisson_potential(const Curve& phi, const Curve& psi);

// Phi_XY - (Phi_X - Phi_Y) / (2 (X - Y)) by differences of the samples, interior nodes
double euler_residual(const EulerPotential& pot, const GridSpec& spec, int accuracy = 4);
// same from the jets
double euler_residual_exact(const EulerPotential& pot, const GridSpec& spec);

VectorSource t2_e3_source(const LambdaTriple& l);
FrameField frame_e3_t2(const LambdaTriple& l, const GridSpec& spec);

struct ToralMap {
  Source X, Y;
  VectorSource e3;
};
// X = l2 cos^2 x + l3 sin^2 x, Y = l1 sin^2 y + l2 cos^2 y
ToralMap toral_unfold(const LambdaTriple& l);
Mat3 half_period_x();  // e3(x + pi, y) = R e3(x, y)
Mat3 half_period_y();

Vec3 quadric_closed_form(const LambdaTriple& l, double X, double Y);
Vec3 quadratic_closed_form(const LambdaTriple& l, double X, double Y);
Vec3 minimal_closed_form(const LambdaTriple& l, double X, double Y);

// U = Phi_X, V = Phi_Y
ShapeOperatorField type2_shape_field(const EulerPotential& pot, const GridSpec& spec, BuildOptions opt = {});

}  // namespace preshape
