#include "preshape/gallery.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "preshape/calculus.hpp"

namespace preshape {

namespace {

// U(X(x), Y(y)), V(...) in the unfolded mu = 0 chart
struct Mu0Chart {
  Mu0Domain dom;
  GridSpec spec;
  Unfolding uf;
  ShapeOperatorField sf;
  FrameField frame;
};

using UVJet = std::function<std::pair<Jet, Jet>(const Jet& X, const Jet& Y)>;

Mu0Chart mu0_chart(const Mu0Domain& dom, const GridSpec& spec, UVJet uv, bool allow_umbilics) {
  Mu0Chart c;
  c.dom = dom;
  c.spec = spec;
  c.uf = unfold_mu0(dom, spec);
  const Source Xs = c.uf.X, Ys = c.uf.Y;
  const Field U = Field::from_source(spec, [=](double x, double y, int n) { return uv(Xs(x, y, n), Ys(x, y, n)).first; });
  const Field V = Field::from_source(spec, [=](double x, double y, int n) { return uv(Xs(x, y, n), Ys(x, y, n)).second; });
  BuildOptions bo;
  bo.allow_umbilics = allow_umbilics;
  c.sf = build_from_reciprocals(U, V, bo);
  const VectorField e3 = vector_field(spec, c.uf.e3);
  VectorField ex, ey;
  for (int k = 0; k < 3; ++k) {
    ex[k] = partial_x(e3[k]);
    ey[k] = partial_y(e3[k]);
  }
  c.frame = frame_from_normal(e3, ex, ey);
  return c;
}

std::vector<Vec3> mesh_points(const SurfaceMesh& m, const std::function<bool(int, int)>& keep) {
  std::vector<Vec3> p;
  for (int j = 0; j < m.spec.ny; ++j)
    for (int i = 0; i < m.spec.nx; ++i)
      if (m.mask(i, j) && keep(i, j)) p.push_back(m.point(i, j));
  return p;
}

void item_linear(GalleryItem& it, int n, double ts) {
  const Mu0Domain dom{1, -1, 0};
  const GridSpec g{n, n, -1, 1, -1, 1};
  const Mu0Chart c = mu0_chart(dom, g, [](const Jet& X, const Jet& Y) { return std::make_pair(Y, X); }, false);
  it.mesh = realize_surface(c.sf, c.frame).mesh;
  it.mesh.label = "linear";
  it.error = realization_error(sampled_realization(c.sf, c.frame), it.mesh);
  // first quadrant of the unfolding is D itself
  auto keep = [&](int i, int j) { return g.x(i) >= 0 && g.y(j) >= 0; };
  const auto p = mesh_points(it.mesh, keep);
  std::vector<Vec3> q;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (it.mesh.mask(i, j) && keep(i, j))
        q.push_back(x_linear_closed_form(dom, c.uf.Xf(i, j), c.uf.Yf(i, j)));
  const Similarity al = align_similarity(p, q, true);
  it.report.add("closed_form_similarity", al.rms / al.extent, 1e-6 * ts);
  it.report.add("closed_form_scale", std::abs(al.scale - 1), 1e-6 * ts);
}

void item_index_zero(GalleryItem& it, int n, double) {
  // f = 1 + (X-1)^3, g = 1 - (Y+1)^3; U, V shifted by 1 so the umbilic (1, -1) has U = V = 1
  const Mu0Domain dom{0.5, -0.5, 0};
  const double r = std::sqrt(0.5);
  const GridSpec g{n, n, r - 0.15, r + 0.15, r - 0.15, r + 0.15};
  auto uv = [](const Jet& X, const Jet& Y) {
    const Jet a = X - 1.0, b = Y + 1.0;
    const Jet f = 1.0 + a * a * a, fp = 3.0 * a * a;
    const Jet gg = 1.0 - b * b * b, gp = -3.0 * b * b;
    const Jet d = X - Y;
    return std::make_pair(f - gg - d * fp + 1.0, f - gg - d * gp + 1.0);
  };
  const Mu0Chart c = mu0_chart(dom, g, uv, true);
  it.mesh = realize_surface(c.sf, c.frame).mesh;
  it.mesh.label = "index_zero";
  it.error = realization_error(sampled_realization(c.sf, c.frame), it.mesh);
  // the umbilic sits where U = V; U - V = -3 (X - Y)((X-1)^2 + (Y+1)^2)
  double gap = 1e300;
  int ui = 0, uj = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(c.sf.U(i, j) - c.sf.V(i, j));
      if (d < gap) {
        gap = d;
        ui = i;
        uj = j;
      }
    }
  it.report.require("umbilic_inside", ui > 0 && uj > 0 && ui < n - 1 && uj < n - 1);
  it.report.metric("umbilic_x", g.x(ui));
  it.report.metric("umbilic_y", g.y(uj));
  it.report.metric("min_U_minus_V", gap);
  it.report.require("U_V_positive", (c.sf.U.values > 0).all() && (c.sf.V.values > 0).all());
}

void item_enneper(GalleryItem& it, int n, double ts) {
  const Mu0Domain dom{1, 0, 0};
  const GridSpec g{n, n, -1, 1, -1, 1};
  // U = (X - Y)^2 = (1 + x^2 + y^2)^2 in the unfolded chart
  const Mu0Chart c = mu0_chart(dom, g, [](const Jet& X, const Jet& Y) {
    const Jet d = X - Y;
    return std::make_pair(d * d, -(d * d));
  }, false);
  it.mesh = realize_surface(c.sf, c.frame).mesh;
  it.mesh.label = "enneper";
  it.error = realization_error(sampled_realization(c.sf, c.frame), it.mesh);
  const RecoveredShape rs = recover_shape_operator(it.mesh);
  double H = 0;
  for (int k = 0; k < rs.H.values.size(); ++k)
    if (std::isfinite(rs.H.values(k))) H = std::max(H, std::abs(rs.H.values(k)));
  it.report.add("mean_curvature", H, 1e-4 * ts);
  const auto p = mesh_points(it.mesh, [](int, int) { return true; });
  std::vector<Vec3> q;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (it.mesh.mask(i, j)) q.push_back(enneper_reference(g.x(i), g.y(j)));
  const Similarity al = align_similarity(p, q, true);
  it.report.add("enneper_similarity", al.rms, 1e-3 * al.extent * ts);
  it.report.metric("enneper_scale", al.scale);
}

void item_job(GalleryItem& it, const json& cfg) {
  const RealizeResult r = realize_instance(build_instance(cfg));
  it.mesh = r.mesh;
  it.quotient = r.quotient;
  it.report = r.report;
  it.error = realization_error(sampled_realization(r.sf, *r.frame), it.mesh);
}

void item_ovaloid(GalleryItem& it, int n, double ts) {
  item_job(it, json{{"family", "type2"},
                    {"potential", {{"kind", "cubic"}, {"params", {{"scale", -1.0}}}}},
                    {"lambda", {0.5, 1.0, 2.0}},
                    {"torus", true},
                    {"resolution", n},
                    {"tol_scale", ts}});
  double count = -1;
  for (const auto& [k, v] : it.report.metrics)
    if (k == "umbilic_count") count = v;
  it.report.require("four_umbilics", count == 4);
  it.mesh.label = "ovaloid";
}

}  // namespace

const std::vector<std::string>& gallery_names() {
  static const std::vector<std::string> names{"linear", "index_zero", "enneper", "quadric", "ovaloid", "minimal"};
  return names;
}

GalleryItem gallery_item(const std::string& name, int n, double ts) {
  GalleryItem it;
  it.name = name;
  it.resolution = n;
  try {
    if (name == "linear") {
      item_linear(it, n, ts);
    } else if (name == "index_zero") {
      item_index_zero(it, n, ts);
    } else if (name == "enneper") {
      item_enneper(it, n, ts);
    } else if (name == "quadric") {
      item_job(it, json{{"family", "type2"}, {"potential", "quadric"}, {"lambda", {-1.0, 0.5, 2.0}},
                        {"resolution", n}, {"tol_scale", ts}});
      it.mesh.label = "quadric";
    } else if (name == "ovaloid") {
      item_ovaloid(it, n, ts);
    } else if (name == "minimal") {
      item_job(it, json{{"family", "type2"}, {"potential", "log"}, {"lambda", {-0.5, 1.0, 2.5}},
                        {"resolution", n}, {"tol_scale", ts}});
      it.mesh.label = "minimal";
    } else {
      fail(ErrorKind::UnknownKind, "no gallery item '" + name + "'");
    }
    // the job items already carry mesh checks
    if (name == "linear" || name == "index_zero" || name == "enneper") add_mesh_checks(it.report, it.mesh, ts);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnknownKind) throw;
    it.failure = e.what();
    it.report.require(std::string("no_error:") + to_string(e.kind()), false);
    it.error = std::numeric_limits<double>::quiet_NaN();
  }
  return it;
}

std::vector<GalleryItem> run_gallery(const GalleryOptions& opt) {
  std::vector<std::string> names;
  for (const auto& n : gallery_names())
    if (opt.only.empty() || std::find(opt.only.begin(), opt.only.end(), n) != opt.only.end()) names.push_back(n);
  for (const auto& o : opt.only)
    if (std::find(gallery_names().begin(), gallery_names().end(), o) == gallery_names().end())
      fail(ErrorKind::InputError, "no gallery item '" + o + "'");
  // tasks: (item, fine) and optionally (item, coarse)
  struct Task {
    size_t item;
    bool coarse;
  };
  std::vector<Task> tasks;
  for (size_t k = 0; k < names.size(); ++k) {
    tasks.push_back({k, false});
    if (opt.convergence) tasks.push_back({k, true});
  }
  std::vector<GalleryItem> fine(names.size()), coarse(names.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t t; (t = next++) < tasks.size();) {
      const Task& task = tasks[t];
      const int n = task.coarse ? opt.resolution / 2 : opt.resolution;
      (task.coarse ? coarse : fine)[task.item] = gallery_item(names[task.item], n, opt.tol_scale);
    }
  };
  const int nt = std::max(1, std::min<int>(opt.jobs, int(tasks.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  if (opt.convergence)
    for (size_t k = 0; k < names.size(); ++k) {
      GalleryItem& f = fine[k];
      const GalleryItem& c = coarse[k];
      const double hf = f.mesh.spec.h(), hc = c.mesh.spec.h();
      double order = std::numeric_limits<double>::quiet_NaN();
      if (f.failure.empty() && c.failure.empty() && hf > 0 && hc > hf)
        order = std::log(c.error / f.error) / std::log(hc / hf);
      f.report.convergence_order = order;
      f.report.metric("coarse_error", c.error);
      f.report.metric("fine_error", f.error);
      f.report.add_at_least("convergence_order", order, 1.8);
    }
  return fine;
}

json to_json(const GalleryItem& item) {
  json j;
  j["name"] = item.name;
  j["resolution"] = item.resolution;
  j["pass"] = item.report.pass() && item.failure.empty();
  if (!item.failure.empty()) j["error"] = item.failure;
  j["realization_error"] = number(item.error);
  j["verification"] = to_json(item.report);
  return j;
}

}  // namespace preshape
