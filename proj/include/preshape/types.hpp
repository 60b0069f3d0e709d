#pragma once

#include <optional>
#include <string>
#include <vector>

#include "preshape/grid.hpp"

namespace preshape {

// Frobenius data (a, b, p) over a coframing; parametrizes one congruence class
struct FrobeniusSolution {
  Field a, b, p;
  double a0 = 0, b0 = 0, p0 = 0;
  int bi = 0, bj = 0;
  Mask positive;                // a > 0 and b > 0
  bool positivity_lost = false;
  double cross_path = 0;        // row-first vs column-first discrepancy
  std::string system;           // "first", "dual", "second", "general" or "closed_form"
};

struct FrameField {
  VectorField e1, e2, e3;
  bool flipped_e2 = false;  // e2 negated to make det(e1, e2, e3) = +1
};

struct SurfaceMesh {
  GridSpec spec;
  VectorField x;
  FrameField frame;
  Field A, B;  // prescribed curvatures at the vertices
  Mask mask;
  Mask umbilic;
  int bi = 0, bj = 0;
  // optional vertex identification (closed meshes): node index i + nx*j -> representative
  std::vector<int> weld;
  std::string label;

  Vec3 point(int i, int j) const { return at_node(x, i, j); }
  Vec3 normal(int i, int j) const { return at_node(frame.e3, i, j); }
};

// e1 = -e3_x/|e3_x|, e2 = -e3_y/|e3_y| from e3 and its partial fields
FrameField frame_from_normal(const VectorField& e3, const VectorField& e3x, const VectorField& e3y);

}  // namespace preshape
