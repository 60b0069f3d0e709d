#pragma once

#include <limits>
#include <string>
#include <vector>

#include "preshape/type2.hpp"
#include "preshape/types.hpp"

namespace preshape {

// I = E dx^2 + 2F dx dy + G dy^2, II likewise, on the largest masked rectangle
struct FundamentalForms {
  GridSpec spec;  // the rectangle
  Rect rect;      // inside the mesh grid
  Field E, F, G, L, M, N;
  Field K_intrinsic;  // Brioschi, from I alone
};

// fourth order differences; needs at least a 5x5 rectangle (MaskTooSmall)
FundamentalForms recover_fundamental_forms(const SurfaceMesh& m);

struct RecoveredShape {
  FundamentalForms forms;
  Field A, B;           // eigenvalues of I^{-1} II, A along the x direction
  Field axis_angle;     // angle between the A eigenvector and d/dx, radians
  Field H, K;
  double max_axis_angle = 0;
};

// IndefiniteMetric when EG - F^2 <= 0 somewhere
RecoveredShape recover_shape_operator(const SurfaceMesh& m);

struct RoundTrip {
  double A_error = 0, B_error = 0;  // max |rec - given| / (1 + |given|)
  double gauss = 0;                 // max |K_intrinsic - A_rec B_rec| / (1 + |A_rec B_rec|)
  double tol = 0;                   // 100 h^2
  bool pass = false;
};
// skip_umbilic leaves out nodes flagged umbilic and their neighbours
RoundTrip round_trip(const SurfaceMesh& m, bool skip_umbilic = true);

struct CircleCheck {
  double planarity = 0;     // max distance of a column's Gauss image to its fitted plane
  double great_circle = 0;  // max distance of the spherical centers to their fitted great circle
  std::vector<Vec3> centers;
};
// Gauss images of the x = const lines
CircleCheck circle_check(const VectorField& e3);

// max |det(g, g', g'')/|g'|^3 - sqrt(a)| / (1 + sqrt(a)) along x = const lines of the Gauss image
double geodesic_curvature_check(const VectorField& e3, const Field& a);

// max |sum_k e_k^2 / (l_k - X)| and the same for Y; X, Y the grid coordinates
double confocal_check(const VectorField& e3, const LambdaTriple& l);

struct ImplicitCheck {
  std::string kind;
  double residual = 0;
  std::vector<double> params;  // fitted coefficients where applicable
};
// hyperboloid, minimal_t2 (need l), ellipsoid (axis-aligned fit), sphere (fit)
ImplicitCheck implicit_check(const SurfaceMesh& m, const std::string& kind, const LambdaTriple& l = {});

struct Similarity {
  double scale = 1;
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  double rms = 0;        // after alignment
  double extent = 0;     // RMS radius of the target about its centroid
};
// best s R p + t onto q (least squares); R a rotation unless reflections are allowed
Similarity align_similarity(const std::vector<Vec3>& p, const std::vector<Vec3>& q, bool allow_reflection = false);

struct Noncongruence {
  double I_difference = 0;   // relative sup difference of E, F, G
  double II_difference = 0;  // same for L, M, N
  double shape_residual = 0; // max round-trip error of both meshes
  bool noncongruent = false;
  bool congruent = false;
};
Noncongruence noncongruence_check(const SurfaceMesh& a, const SurfaceMesh& b);

struct Check {
  std::string name;
  double value = 0, tol = 0;
  bool pass = false;  // value finite and <= tol (or >= tol for lower bounds)
  bool lower_bound = false;
};

struct VerificationReport {
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> metrics;  // reported, not judged
  std::vector<std::string> notes;
  double convergence_order = std::numeric_limits<double>::quiet_NaN();

  Check& add(const std::string& name, double value, double tol);
  Check& add_at_least(const std::string& name, double value, double bound);
  Check& require(const std::string& name, bool ok);
  void metric(const std::string& name, double v) { metrics.emplace_back(name, v); }
  bool pass() const;
  std::vector<std::string> failures() const;
};

// round-trip, Gauss equation and axis alignment of a mesh, appended to r; the axis angle
// is judged where |A - B| >= 0.1 (|A| + |B|)
void add_mesh_checks(VerificationReport& r, const SurfaceMesh& m, double tol_scale = 1.0);

// log2(e_coarse / e_fine) for grids related by halving h
double convergence_order(double e_coarse, double e_fine);

// max |d theta1 - K1 theta1^theta2|, |d theta2 - K2 theta2^theta1| from the recovered forms
double structure_equation_residual(const Coframing& cf, const StructureFunctions& K);

}  // namespace preshape
