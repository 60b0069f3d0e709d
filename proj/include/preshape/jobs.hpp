#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "preshape/io.hpp"
#include "preshape/realization.hpp"
#include "preshape/type1.hpp"
#include "preshape/type2.hpp"
#include "preshape/verify.hpp"

namespace preshape {

// 1D function from JSON: number (constant), array (polynomial coefficients),
// string (builtin name) or {name, amp, freq, phase, offset}
Curve curve_from_json(const json& j);

// fields common to every job
struct JobSettings {
  int resolution = 128;
  double tol_scale = 1.0;
  std::uint64_t seed = 0;
};
JobSettings job_settings(const json& cfg);

// a prescribed operator plus what its generator knows about it
struct Instance {
  std::string family;  // type1, type2, custom, revolution
  std::string label;
  ShapeOperatorField sf;
  JobSettings settings;

  // type1
  std::optional<NormalizedPair> pair;
  std::optional<std::array<double, 3>> c;  // general encoding

  // type2
  std::optional<LambdaTriple> lambda;
  std::optional<EulerPotential> potential;
  std::string chart = "toral";  // toral, natural
  bool torus = false;
  bool sampled_path = false;      // FD frames and quadrature instead of analytic ones
  std::optional<FrameField> frame;

  // revolution
  double R = 0, r = 0;

  std::optional<std::array<double, 3>> initial;  // (a0, b0, p0)
  json description;
};

// reads family, grid, potential, ... (InputError on anything malformed)
Instance build_instance(const json& cfg);

// default rectangle of a Type II job: the cubic domain, clipped to where the potential is defined
GridSpec type2_default_grid(const LambdaTriple& l, const std::string& kind, int n);

// toral chart rectangle [0.2, pi/2 - 0.2]^2, clipped for the quadric potential
GridSpec toral_default_grid(const LambdaTriple& l, const std::string& kind, int n);

struct RealizeResult {
  SurfaceMesh mesh;
  std::optional<SurfaceMesh> quotient;  // torus jobs
  VerificationReport report;
  ClassificationReport classification;
  std::optional<FrobeniusSolution> solution;
  std::optional<FrameField> frame;  // the frame the quadrature used, when there is one
  ShapeOperatorField sf;            // operator of the emitted mesh (full torus grid for torus jobs)
};

RealizeResult realize_instance(const Instance& inst);

// (a0, b0, p0) for the instance: explicit, from c, or (1, 1, 0)
std::array<double, 3> initial_triple(const Instance& inst, const Coframing& cf);

struct FamilyResult {
  std::vector<std::array<double, 3>> triples;
  std::vector<SurfaceMesh> meshes;
  std::vector<std::vector<Noncongruence>> matrix;
  double S_mismatch = 0;  // max |A_rec - A_rec'| / (1 + |A|) over pairs, same for B
  double S_tol = 0;
  bool pass = false;
  VerificationReport report;
};

// realizes each triple with the Frobenius system of the verdict
FamilyResult family_instance(const Instance& inst, std::vector<std::array<double, 3>> triples, int count);

struct CompareResult {
  RealizeResult a, b;
  Noncongruence congruence;
  double S_mismatch = 0;  // max |A_rec - A_rec'| / (1 + |A_rec|) over common nodes, same for B
  double S_tol = 0;
  VerificationReport report;
};

// two jobs on the same grid: expected to share S and differ as immersions
CompareResult compare_instances(const Instance& a, const Instance& b);

// the same realization from sampled U, V and e3 (differences and trapezoid quadrature)
SurfaceMesh sampled_realization(const ShapeOperatorField& sf, const FrameField& frame);

// max |(p - p_base) - (q - q_base)| over common nodes, divided by the diameter of q
double realization_error(const SurfaceMesh& p, const SurfaceMesh& q);

json to_json(const VerificationReport& r);
json to_json(const Noncongruence& n);

// exit code of a thrown error: 2 for input problems, 3 otherwise
int exit_code_for(const Error& e);

}  // namespace preshape
