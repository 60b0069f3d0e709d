#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "preshape/classifier.hpp"
#include "preshape/ode.hpp"
#include "preshape/types.hpp"

namespace preshape {

// phi'' + mu phi = 0 with phi0 phi1' - phi1 phi0' = 1
struct NormalizedPair {
  Curve phi0, phi1, mu;
  double anchor = 0;
  double wronskian_error = 0;
  double ode_residual = 0;
  std::string method;
};

// (1, x - anchor)
NormalizedPair pair_mu0(double anchor, double t0, double t1);

// Closed forms for constant mu, otherwise RK4 from the interval midpoint.  With an
// anchor curve f (f' = 1 + mu f^2) phi1 = exp(int 1/f) and phi0 follows from the Wronskian.
NormalizedPair solve_normalized_pair(const Curve& mu, double t0, double t1,
                                     const std::optional<Curve>& anchor_curve = std::nullopt, int steps = 4000);

// fills wronskian_error and ode_residual from `samples` interior points
void check_pair(NormalizedPair& pr, int samples = 64);

struct PairJets {
  Jet p0, p1, d0, d1;  // phi0, phi1, phi0', phi1'
};
PairJets pair_jets(const NormalizedPair& pr, const Jet& x);

// Parameters (xi, eta, lambda) of the mu = 0 closed forms.
struct Mu0Domain {
  double xi = 1, eta = -1, lambda = 0;

  void validate() const;
  double X_lo() const;
  double X_hi() const;
  double Y_lo() const;
  double Y_hi() const;
  bool contains(double X, double Y, double margin = 0) const;
  // encoding used by the closed forms: c2'/2, c1', (c0'-1)/2 rational in (xi, eta, lambda)
  std::array<double, 3> c_mu0() const;
  // encoding used by the (a, b, p) integrals
  std::array<double, 3> c_general() const;
};

std::array<double, 3> mu0_to_general(const std::array<double, 3>& cp);
std::array<double, 3> general_to_mu0(const std::array<double, 3>& c);

struct Type1Family {
  NormalizedPair pair;
  Curve f, g;
  std::array<double, 3> c{};  // general encoding
  GridSpec domain;            // natural (x, y)
  std::string label;
};

// U = f - g/Q - (P/Q) f', V = f - phi0 g - P g' with P = phi1 - y phi0, Q = phi1' - y phi0'
std::pair<Field, Field> uv_general_solution(const NormalizedPair& pr, const Curve& f, const Curve& g,
                                            const GridSpec& spec);
// max of |U_y - t (U - V)| and |V_x - s (V - U)| on the natural coframing
double uv_pde_residual(const NormalizedPair& pr, const Field& U, const Field& V);

// s = Q/P, t = -1/(PQ)
Coframing natural_coframing(const NormalizedPair& pr, const GridSpec& spec);

// a = -1 + F, b = (c0 + 2 c1 y + c2 y^2)/Q^2, p = 1 - 2F + (P/Q) F'
FrobeniusSolution abp_closed_form(const NormalizedPair& pr, const std::array<double, 3>& c, const GridSpec& spec);

struct NormalForm {
  Field x, z;
  Curve mu;
  std::vector<double> mu_samples;  // one per grid column
  double mu_y_deviation = 0;
  double theta2_residual = 0;
  std::string path;  // "shortcut", "k2_one" or "general"
  std::vector<std::string> warnings;
};

struct NormalFormOptions {
  double tol_scale = 1.0;
  bool force_general = false;
};

NormalForm normal_form_coords(const Coframing& cf, const StructureFunctions& K, NormalFormOptions opt = {});

struct NaturalY {
  Field y;
  bool positive = true;  // phi1 - y phi0 and phi1' - y phi0' positive
  double theta2_residual = 0;
};
NaturalY natural_y(const Field& x, const Field& z, const NormalizedPair& pr);

// classical e3 on a grid in (X, Y); e1, e2 negative normalized partials
VectorSource mu0_e3_source(const Mu0Domain& dom);
FrameField mu0_frame_e3(const Mu0Domain& dom, const GridSpec& spec);

// e3 assembled from the s-quadrature form, optionally rotated
struct GeneralE3 {
  VectorSource source;
  FrameField frame;
  Curve S;  // S' = sqrt(c1^2 - c0 c2) / ((1 + a) sqrt(a))
};
GeneralE3 general_frame_e3(const NormalizedPair& pr, const std::array<double, 3>& c, const GridSpec& spec,
                           const Mat3& rotation = Mat3::Identity());

// (x, y) -> (X, Y) and the resolved e3 of the unfolded chart
struct Unfolding {
  Source X, Y;
  VectorSource e3;
  Field Xf, Yf;
  VectorField e3f;
};
Unfolding unfold_mu0(const Mu0Domain& dom, const GridSpec& spec);

// realization of U = Y, V = X on D (closed form)
Vec3 x_linear_closed_form(const Mu0Domain& dom, double X, double Y);
// Enneper's surface in the unfolded lambda = 0 chart with xi - eta = 1
Vec3 enneper_reference(double x, double y);

}  // namespace preshape
