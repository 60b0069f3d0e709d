#pragma once

#include <optional>
#include <string>
#include <vector>

#include "preshape/jobs.hpp"

namespace preshape {

// linear, index_zero, enneper, quadric, ovaloid, minimal
const std::vector<std::string>& gallery_names();

struct GalleryItem {
  std::string name;
  int resolution = 0;
  SurfaceMesh mesh;
  std::optional<SurfaceMesh> quotient;
  VerificationReport report;
  double error = 0;  // sampled path against the analytic mesh; its convergence is reported
  std::string failure;  // message of a thrown error
};

// one item at n nodes (cells per period for the ovaloid); errors are caught into the report
GalleryItem gallery_item(const std::string& name, int n, double tol_scale = 1.0);

struct GalleryOptions {
  int resolution = 128;
  double tol_scale = 1.0;
  int jobs = 1;
  std::vector<std::string> only;  // empty: all
  bool convergence = true;        // also run at resolution / 2 and report the order
};

// items in gallery_names() order regardless of jobs
std::vector<GalleryItem> run_gallery(const GalleryOptions& opt);

json to_json(const GalleryItem& item);

}  // namespace preshape
