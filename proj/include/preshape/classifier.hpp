#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "preshape/coframing.hpp"
#include "preshape/curve.hpp"
#include "preshape/shape_field.hpp"

namespace preshape {

enum class Verdict { TypeI_first, TypeI_dual, TypeII, DegenerateMolding_Ay0, DegenerateMolding_Bx0, Cylinder, Generic };

const char* to_string(Verdict v);

struct ResidualSummary {
  std::string name;
  double max = 0, mean = 0;
};

struct ClassificationReport {
  Verdict verdict = Verdict::Generic;
  std::array<Field, 4> frobenius;  // empty fields in the degenerate branches
  std::vector<ResidualSummary> residuals;
  double tol = 0;
  double h = 0;
  double max_first = 0, max_dual = 0, max_second = 0;  // max|K1-1|, max|K2-1|, max(|K1+2|,|K2+2|)
  bool dual_also_holds = false;
  bool mixed = false;
  // per node: bit 0 first system holds, bit 1 dual system holds
  Eigen::ArrayXXi partition;
  double coverage = 1.0;  // fraction of nodes used for the residuals
  NondegeneracyReport nondegeneracy;
  std::vector<std::string> notes;
};

std::array<Field, 4> frobenius_residuals(const StructureFunctions& K);

struct ClassifyOptions {
  double tol_scale = 1.0;
  int accuracy = 2;
};

ClassificationReport classify(const ShapeOperatorField& sf, ClassifyOptions opt = {});

// run-length encoding of one partition row: pairs (value, count)
std::vector<std::pair<int, int>> run_lengths(const Eigen::ArrayXXi& m, int row);

struct MoldingFamily {
  enum class Branch { Unique, OneParameter } branch = Branch::OneParameter;
  bool swapped = false;     // solved on the transposed field (B_x = 0 case)
  Field f, g;               // coefficients of u' + f u + g = 0
  double x_base = 0;        // where the family parameter u(x_base) is imposed
  double y_line = 0;        // row used for the x-only coefficients
  Curve f_of_x, g_of_x;     // along y_line
  std::optional<Curve> unique_u;
  std::string test;         // which test decided the branch
  double ode_residual = 0;
  // u for the one-parameter branch, u(x_base) = u0
  Curve solve_u(double u0, int steps = 4000) const;
};

// sf must be DegenerateMolding (Ay0 directly, Bx0 via the transposed field)
MoldingFamily degenerate_molding_solve(const ShapeOperatorField& sf, ClassifyOptions opt = {});

// (1 - K2) s^2, the dx^2 coefficient of the Type I quadratic invariant
Field type1_quadratic_invariant(const ShapeOperatorField& sf, ClassifyOptions opt = {});

}  // namespace preshape
