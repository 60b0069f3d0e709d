#pragma once

#include "preshape/calculus.hpp"
#include "preshape/grid.hpp"

namespace preshape {

struct ShapeOperatorField {
  GridSpec spec;
  Field A, B, U, V;
  Mask invertible;      // A != 0 and B != 0
  Mask umbilic;         // |A - B| at or below tol_zero
  int ordering = 1;     // sign of A - B over the grid
  bool fully_invertible = true;
};

struct BuildOptions {
  bool allow_umbilics = false;  // record umbilic nodes instead of failing
};

// A, B must be sampled on the same grid; analytic sources are kept for derivatives
ShapeOperatorField build_from_curvatures(const Field& A, const Field& B, BuildOptions opt = {});
ShapeOperatorField build_from_reciprocals(const Field& U, const Field& V, BuildOptions opt = {});

struct NondegeneracyReport {
  double min_A_minus_B = 0, min_abs_A = 0, min_abs_B = 0, min_abs_Ay = 0, min_abs_Bx = 0;
  double max_abs_Ay = 0, max_abs_Bx = 0;
  double tol_zero = 0;
  bool invertible = false, nondegenerate = false, Ay_zero_everywhere = false, Bx_zero_everywhere = false;
};

NondegeneracyReport nondegeneracy_report(const ShapeOperatorField& sf);

// swap the roles of x and y (and of A and B)
ShapeOperatorField transposed(const ShapeOperatorField& sf);
Field transposed(const Field& f);

double tol_zero_for(const Field& f);

}  // namespace preshape
