#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "preshape/classifier.hpp"
#include "preshape/type2.hpp"
#include "preshape/types.hpp"

namespace preshape {

enum class FrobeniusSystem { First, Dual, Second, General };

const char* to_string(FrobeniusSystem s);
FrobeniusSystem system_for(Verdict v);

struct FrobeniusOptions {
  int substeps = 1;         // RK4 steps per grid cell
  bool cross_path = true;   // also integrate column-first and record the discrepancy
};

// derivative of (a, b, p) along theta1 (along_x) or theta2
Eigen::Vector3d frobenius_rhs(FrobeniusSystem sys, const Eigen::Vector3d& abp, double K1, double K2, double K11,
                              double K22, bool along_x);

// RK4 along the base row, then along every column; nodes with a <= 0 or b <= 0 end their line
FrobeniusSolution frobenius_integrate(const Coframing& cf, const StructureFunctions& K, FrobeniusSystem sys,
                                      double a0, double b0, double p0, FrobeniusOptions opt = {});

// max over nodes of |d(a,b,p) - rhs| measured with fourth order differences
double governing_residual(const FrobeniusSolution& sol, const Coframing& cf, const StructureFunctions& K,
                          FrobeniusSystem sys);

// (1 - t) s0 + t s1; the systems are affine in (a, b, p)
FrobeniusSolution affine_family(const FrobeniusSolution& s0, const FrobeniusSolution& s1, double t);

// coefficients of the forms along one grid direction
struct ConnectionForms {
  double w1 = 0, w2 = 0, w12 = 0, w31 = 0, w32 = 0;
};
using ConnectionFn = std::function<ConnectionForms(double x, double y, bool along_x)>;

// e1' = -w12 e2 + w31 e3, e2' = w12 e1 + w32 e3, e3' = -w31 e1 - w32 e2, x' = w1 e1 + w2 e2
// integrated from the identity frame at the base node, row first
SurfaceMesh integrate_frames(const GridSpec& spec, const ConnectionFn& w, int bi, int bj,
                             const Mask& valid, int substeps = 1);

// frames and positions from a Frobenius solution: w1 = U theta1/sqrt(a), w31 = theta1/sqrt(a), ...
SurfaceMesh integrate_structure(const ShapeOperatorField& sf, const Coframing& cf, const FrobeniusSolution& sol,
                                int substeps = 1);

struct RealizeOptions {
  PrimitiveOptions primitive;
  double tol_path = -1;  // < 0: 10 tol_closed diameter
  bool check_path = true;
};

struct Realization {
  SurfaceMesh mesh;
  double path_discrepancy = 0;
  double closedness = 0;
  bool analytic = false;
};

// x = -int (U e3_x dx + V e3_y dy); analytic quadrature when U, V and e3 carry sources
Realization realize_surface(const ShapeOperatorField& sf, const FrameField& frame, RealizeOptions opt = {});

// moves the mesh so the base node sits at p
void translate_to(SurfaceMesh& m, const Vec3& p);

// patch of the toral chart: U = Phi_X(X(x), Y(y)) etc., e3 smooth up to the branch points
struct ToralPatch {
  ShapeOperatorField sf;
  FrameField frame;  // e3 with its analytic source
  Field X, Y;
};
ToralPatch toral_patch(const LambdaTriple& l, const EulerPotential& pot, const GridSpec& spec,
                       bool allow_umbilics = false);

struct TorusOptions {
  int n = 128;  // cells per period
  double tol_period_rel = 1e-6;
};

struct TorusResult {
  SurfaceMesh mesh;           // full grid on [-pi, pi]^2
  SurfaceMesh quotient;       // x in [0, pi], welded
  Vec3 period_x = Vec3::Zero(), period_y = Vec3::Zero();
  double period_error = 0;    // max over lines of the closing gap
  double tol_period = 0;
  double tau_error = 0;       // |x(p) - x(-p)|
  double diameter = 0;
  int umbilic_count = 0;      // distinct umbilic vertices after welding
  bool umbilic_circle = false;
  bool positive = true;       // Phi_X, Phi_Y > 0 away from umbilics
};

TorusResult torus_realize(const LambdaTriple& l, const EulerPotential& pot, TorusOptions opt = {});

struct DegenerateOptions {
  double u0 = 1.0;  // a at the base column
  double b0 = 1.0;  // b at the base node
  int substeps = 1;
};

struct DegenerateResult {
  SurfaceMesh mesh;
  MoldingFamily family;
  Field a, b;
  bool swapped = false;
};

// molding case: a = u(x), b = v b_bar with log b_bar' = 2 B_x/(B - A); cylinders take a = b = 1
DegenerateResult degenerate_realize(const ShapeOperatorField& sf, DegenerateOptions opt = {},
                                    ClassifyOptions copt = {});
SurfaceMesh cylinder_realize(const ShapeOperatorField& sf, int substeps = 1);

}  // namespace preshape
