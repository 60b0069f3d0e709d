// preshape: classify, realize, family, verify, gallery
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "preshape/classifier.hpp"
#include "preshape/coframing.hpp"
#include "preshape/gallery.hpp"
#include "preshape/jobs.hpp"

namespace fs = std::filesystem;
using namespace preshape;

namespace {

constexpr int kPass = 0, kInput = 2, kFail = 3;

struct Options {
  std::string config;
  std::string family;
  std::vector<double> lambda, c;
  std::optional<int> resolution;
  std::string out = ".";
  std::string format = "obj";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> only;
  std::optional<double> tol_scale;
  std::string potential;
  std::string csv_a, csv_b;
  int count = 3;
  bool dump_k = false;
  bool stdout_report = false;
};

void add_common(CLI::App* s, Options& o) {
  s->add_option("--config", o.config, "job config (JSON)");
  s->add_option("--family", o.family, "type1, type2, custom, revolution or a gallery item");
  s->add_option("--lambda", o.lambda, "lambda1,lambda2,lambda3")->delimiter(',')->expected(3);
  s->add_option("--c", o.c, "c0,c1,c2")->delimiter(',')->expected(3);
  s->add_option("--resolution", o.resolution, "nodes per side")->check(CLI::Range(4, 1 << 14));
  s->add_option("--out", o.out, "output directory");
  s->add_option("--format", o.format, "mesh format")->check(CLI::IsMember({"obj", "ply", "csv"}));
  s->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  s->add_option("--seed", o.seed, "seed for sampled initial data");
  s->add_option("--tol-scale", o.tol_scale, "multiplies every tolerance")->check(CLI::PositiveNumber);
  s->add_option("--potential", o.potential, "Type II potential kind");
  s->add_option("--csv", o.csv_a, "A samples (x,y,value)");
  s->add_option("--csv-b", o.csv_b, "B samples (x,y,value)");
}

// config file, then flags on top
json job_config(const Options& o) {
  json cfg = json::object();
  if (!o.config.empty()) {
    cfg = parse_json_file(o.config);
    if (!cfg.is_object()) fail(ErrorKind::InputError, "config must be a JSON object");
  }
  if (!o.family.empty()) cfg["family"] = o.family;
  if (!o.lambda.empty()) cfg["lambda"] = o.lambda;
  if (!o.c.empty()) cfg["c"] = o.c;
  if (o.resolution) cfg["resolution"] = *o.resolution;
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.tol_scale) cfg["tol_scale"] = *o.tol_scale;
  if (!o.potential.empty()) {
    if (cfg.contains("potential") && cfg["potential"].is_object())
      cfg["potential"]["kind"] = o.potential;
    else
      cfg["potential"] = o.potential;
  }
  if (!o.csv_a.empty() || !o.csv_b.empty()) {
    if (o.csv_a.empty() || o.csv_b.empty()) fail(ErrorKind::InputError, "--csv and --csv-b go together");
    cfg["family"] = "custom";
    cfg["A"] = json{{"csv", o.csv_a}};
    cfg["B"] = json{{"csv", o.csv_b}};
  }
  if (!cfg.contains("family") && !cfg.contains("compare")) fail(ErrorKind::InputError, "no family given");
  return cfg;
}

std::string out_path(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  return (fs::path(o.out) / name).string();
}

void emit_mesh(const Options& o, const SurfaceMesh& m, const std::string& stem) {
  const MeshFormat f = parse_mesh_format(o.format);
  const std::string p = out_path(o, stem + extension(f));
  write_mesh(m, p, f);
  spdlog::info("wrote {} ({} triangles)", p, triangle_count(m));
}

void log_failures(const VerificationReport& r) {
  for (const auto& c : r.checks)
    if (!c.pass) spdlog::error("check {} failed: {:.3e} (tol {:.3e})", c.name, c.value, c.tol);
}

bool is_gallery_name(const std::string& s) {
  const auto& n = gallery_names();
  return std::find(n.begin(), n.end(), s) != n.end();
}

int cmd_classify(const Options& o) {
  const json cfg = job_config(o);
  const Instance inst = build_instance(cfg);
  ClassifyOptions co;
  co.tol_scale = inst.settings.tol_scale;
  const ClassificationReport r = classify(inst.sf, co);
  json j;
  j["label"] = inst.label;
  j["grid"] = grid_to_json(inst.sf.spec);
  j["classification"] = to_json(r);
  write_json_file(j, out_path(o, inst.label + "_classification.json"));
  if (o.dump_k) {
    const CoframeData cd = coframe_data(inst.sf);
    std::ofstream k1(out_path(o, inst.label + "_K1.csv")), k2(out_path(o, inst.label + "_K2.csv"));
    write_csv_field(cd.K.K1, k1);
    write_csv_field(cd.K.K2, k2);
  }
  std::cout << to_string(r.verdict) << "\n";
  return kPass;
}

json realize_report(const json& cfg, const RealizeResult& r) {
  json j;
  j["job"] = cfg;
  j["verdict"] = to_string(r.classification.verdict);
  j["grid"] = grid_to_json(r.mesh.spec);
  j["verification"] = to_json(r.report);
  return j;
}

int cmd_realize(const Options& o) {
  const json cfg = job_config(o);
  const std::string fam = cfg.value("family", "");
  if (is_gallery_name(fam)) {
    const JobSettings s = job_settings(cfg);
    const GalleryItem it = gallery_item(fam, s.resolution, s.tol_scale);
    if (!it.failure.empty()) spdlog::error("{}", it.failure);
    if (it.failure.empty()) {
      emit_mesh(o, it.mesh, fam);
      if (it.quotient) emit_mesh(o, *it.quotient, fam + "_quotient");
    }
    write_json_file(to_json(it), out_path(o, fam + "_report.json"));
    log_failures(it.report);
    return it.failure.empty() && it.report.pass() ? kPass : kFail;
  }
  const Instance inst = build_instance(cfg);
  const RealizeResult r = realize_instance(inst);
  emit_mesh(o, r.mesh, inst.label);
  if (r.quotient) emit_mesh(o, *r.quotient, inst.label + "_quotient");
  write_json_file(realize_report(cfg, r), out_path(o, inst.label + "_report.json"));
  log_failures(r.report);
  return r.report.pass() ? kPass : kFail;
}

int cmd_family(const Options& o) {
  const json cfg = job_config(o);
  const Instance inst = build_instance(cfg);
  std::vector<std::array<double, 3>> triples;
  if (cfg.contains("triples")) {
    if (!cfg["triples"].is_array()) fail(ErrorKind::InputError, "triples must be an array");
    for (const auto& t : cfg["triples"]) {
      if (!t.is_array() || t.size() != 3) fail(ErrorKind::InputError, "each triple needs three numbers");
      triples.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
    }
  }
  const int count = cfg.value("count", o.count);
  if (count < 1) fail(ErrorKind::InputError, "count must be positive");
  const FamilyResult f = family_instance(inst, triples, count);
  json j;
  j["job"] = cfg;
  j["triples"] = f.triples;
  json mat = json::array();
  for (size_t a = 0; a < f.matrix.size(); ++a) {
    json row = json::array();
    for (size_t b = 0; b < f.matrix.size(); ++b) row.push_back(a == b ? json(nullptr) : to_json(f.matrix[a][b]));
    mat.push_back(row);
  }
  j["noncongruence"] = mat;
  j["S_mismatch"] = number(f.S_mismatch);
  j["S_tol"] = number(f.S_tol);
  j["verification"] = to_json(f.report);
  for (size_t k = 0; k < f.meshes.size(); ++k) emit_mesh(o, f.meshes[k], inst.label + "_" + std::to_string(k));
  write_json_file(j, out_path(o, inst.label + "_family.json"));
  log_failures(f.report);
  return f.pass ? kPass : kFail;
}

// one job at N and N/2, or two jobs compared on a common grid
int cmd_verify(const Options& o) {
  json cfg = job_config(o);
  if (cfg.contains("compare")) {
    const json& c = cfg["compare"];
    if (!c.is_array() || c.size() != 2) fail(ErrorKind::InputError, "compare needs two job configs");
    json ja = c[0], jb = c[1];
    for (json* jj : {&ja, &jb}) {
      if (!jj->is_object()) fail(ErrorKind::InputError, "compare entries must be objects");
      for (const char* k : {"resolution", "tol_scale", "domain", "grid"})
        if (cfg.contains(k) && !jj->contains(k)) (*jj)[k] = cfg[k];
    }
    const CompareResult r = compare_instances(build_instance(ja), build_instance(jb));
    json j;
    j["job"] = cfg;
    j["first"] = realize_report(ja, r.a);
    j["second"] = realize_report(jb, r.b);
    j["congruence"] = to_json(r.congruence);
    j["S_mismatch"] = number(r.S_mismatch);
    j["verification"] = to_json(r.report);
    write_json_file(j, out_path(o, cfg.value("label", "compare") + "_verify.json"));
    log_failures(r.report);
    return r.report.pass() ? kPass : kFail;
  }
  const JobSettings s = job_settings(cfg);
  json coarse_cfg = cfg;
  coarse_cfg["resolution"] = s.resolution / 2;
  const Instance fi = build_instance(cfg), ci = build_instance(coarse_cfg);
  const RealizeResult fr = realize_instance(fi), cr = realize_instance(ci);
  VerificationReport rep = fr.report;
  // sampled path against the analytic mesh when there is a frame; round trip otherwise
  auto err = [](const RealizeResult& r) {
    if (r.frame) return realization_error(sampled_realization(r.sf, *r.frame), r.mesh);
    const RoundTrip rt = round_trip(r.mesh);
    return std::max(rt.A_error, rt.B_error);
  };
  const double ef = err(fr), ec = err(cr);
  rep.metric("fine_error", ef);
  rep.metric("coarse_error", ec);
  rep.convergence_order = std::log(ec / ef) / std::log(cr.mesh.spec.h() / fr.mesh.spec.h());
  json j;
  j["job"] = cfg;
  j["verdict"] = to_string(fr.classification.verdict);
  j["fine"] = grid_to_json(fr.mesh.spec);
  j["coarse"] = grid_to_json(cr.mesh.spec);
  j["coarse_verification"] = to_json(cr.report);
  j["verification"] = to_json(rep);
  write_json_file(j, out_path(o, fi.label + "_verify.json"));
  log_failures(rep);
  spdlog::info("convergence order {:.3f}", rep.convergence_order);
  return rep.pass() ? kPass : kFail;
}

int cmd_gallery(const Options& o) {
  GalleryOptions g;
  json cfg = json::object();
  if (!o.config.empty()) cfg = parse_json_file(o.config);
  const JobSettings s = job_settings(cfg);
  g.resolution = o.resolution.value_or(s.resolution);
  g.tol_scale = o.tol_scale.value_or(s.tol_scale);
  g.jobs = o.jobs;
  g.only = o.only;
  const std::vector<GalleryItem> items = run_gallery(g);
  json summary = json::array();
  bool ok = true;
  for (const auto& it : items) {
    const bool pass = it.failure.empty() && it.report.pass();
    ok = ok && pass;
    if (it.failure.empty()) {
      emit_mesh(o, it.mesh, it.name);
      if (it.quotient) emit_mesh(o, *it.quotient, it.name + "_quotient");
    } else {
      spdlog::error("{}: {}", it.name, it.failure);
    }
    write_json_file(to_json(it), out_path(o, it.name + "_report.json"));
    log_failures(it.report);
    summary.push_back({{"name", it.name},
                       {"pass", pass},
                       {"convergence_order", number(it.report.convergence_order)}});
    std::cout << (pass ? "pass " : "FAIL ") << it.name << "\n";
  }
  write_json_file(json{{"resolution", g.resolution}, {"items", summary}}, out_path(o, "gallery.json"));
  return ok ? kPass : kFail;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("preshape");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* lv = std::getenv("PRESHAPE_LOG");
  spdlog::set_level(lv ? spdlog::level::from_str(lv) : spdlog::level::warn);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"prescribed shape operators: classification and realization"};
  app.require_subcommand(1);
  Options o;
  auto* classify_cmd = app.add_subcommand("classify", "classify a prescribed operator");
  auto* realize_cmd = app.add_subcommand("realize", "realize a job as a mesh with a verification report");
  auto* family_cmd = app.add_subcommand("family", "realize several initial triples and compare them");
  auto* verify_cmd = app.add_subcommand("verify", "convergence study, or a comparison of two jobs");
  auto* gallery_cmd = app.add_subcommand("gallery", "build the example gallery");
  for (auto* s : {classify_cmd, realize_cmd, family_cmd, verify_cmd, gallery_cmd}) add_common(s, o);
  classify_cmd->add_flag("--dump-k", o.dump_k, "also write K1, K2 as CSV");
  family_cmd->add_option("--count", o.count, "number of sampled triples");
  gallery_cmd->add_option("--only", o.only, "restrict to these items");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInput;
  }
  try {
    if (*classify_cmd) return cmd_classify(o);
    if (*realize_cmd) return cmd_realize(o);
    if (*family_cmd) return cmd_family(o);
    if (*verify_cmd) return cmd_verify(o);
    return cmd_gallery(o);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e);
  } catch (const json::exception& e) {
    std::cerr << "InputError: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kFail;
  }
}
