#pragma once

#include "preshape/shape_field.hpp"

namespace preshape {

// theta1 = s dx, theta2 = t dy
struct Coframing {
  Field s, t;
};

struct StructureFunctions {
  Field K1, K2;
  Field K11, K12, K21, K22;
  Field K111, K222, K121, K211;
};

// Node-level jets of the coframing data, used by the analytic path.
struct JetBundle {
  Jet s, t, K1, K2, K11, K12, K21, K22, K111, K222, K121, K211;
};

// U, V jets of order m give s, t of order m-1 down to third level K of order m-4
JetBundle jet_bundle(const Jet& U, const Jet& V, int levels = 3);

Coframing compute_coframing(const ShapeOperatorField& sf, int accuracy = 2);
StructureFunctions compute_structure_functions(const Coframing& cf, int accuracy = 2);

// Coframing and structure functions directly from analytic U, V in one pass per node.
struct CoframeData {
  Coframing cf;
  StructureFunctions K;
};
CoframeData coframe_data(const ShapeOperatorField& sf, int accuracy = 2);

// d(theta1) - K1 theta1^theta2 and d(theta2) - K2 theta2^theta1 as coefficient fields of dx^dy
std::pair<Field, Field> structure_reconstruction_residual(const Coframing& cf, const StructureFunctions& K,
                                                          int accuracy = 2);

}  // namespace preshape
