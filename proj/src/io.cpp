#include "preshape/io.hpp"

#include <cmath>
#include <cstdint>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace preshape {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, int line) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    fail(ErrorKind::InputError, "line " + std::to_string(line) + ": bad number '" + t + "'");
  return v;
}

// sorted distinct coordinates; checks uniform spacing
std::vector<double> axis_of(std::vector<double> v, const char* name) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() < 3) fail(ErrorKind::InputError, std::string("need at least 3 distinct ") + name + " values");
  const double h = (v.back() - v.front()) / double(v.size() - 1);
  for (size_t k = 0; k < v.size(); ++k)
    if (std::abs(v[k] - (v.front() + h * double(k))) > 1e-9 * (1 + std::abs(v[k])))
      fail(ErrorKind::InputError, std::string(name) + " spacing is not uniform");
  return v;
}

int vertex_index(const SurfaceMesh& m, int i, int j) {
  const int k = i + m.spec.nx * j;
  return m.weld.empty() ? k : m.weld[k];
}

template <class F>
void for_each_triangle(const SurfaceMesh& m, F&& emit) {
  for (int j = 0; j + 1 < m.spec.ny; ++j)
    for (int i = 0; i + 1 < m.spec.nx; ++i) {
      if (!(m.mask(i, j) && m.mask(i + 1, j) && m.mask(i, j + 1) && m.mask(i + 1, j + 1))) continue;
      const int a = vertex_index(m, i, j), b = vertex_index(m, i + 1, j);
      const int c = vertex_index(m, i + 1, j + 1), d = vertex_index(m, i, j + 1);
      if (a != b && b != c && a != c) emit(a, b, c);
      if (a != c && c != d && a != d) emit(a, c, d);
    }
}

// vertices that survive welding, in node order
std::vector<int> emitted_vertices(const SurfaceMesh& m, std::vector<int>& remap) {
  const int n = m.spec.nx * m.spec.ny;
  remap.assign(n, -1);
  std::vector<int> out;
  for (int k = 0; k < n; ++k) {
    const int r = m.weld.empty() ? k : m.weld[k];
    if (r != k) continue;
    remap[k] = int(out.size());
    out.push_back(k);
  }
  return out;
}

float as_float(double v) { return std::isfinite(v) ? float(v) : 0.0f; }

}  // namespace

Field read_csv_field(std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) break;
  }
  std::string header;
  for (char ch : line)
    if (!std::isspace(static_cast<unsigned char>(ch))) header += char(std::tolower(static_cast<unsigned char>(ch)));
  if (header != "x,y,value") fail(ErrorKind::InputError, "CSV header must be x,y,value");
  std::vector<double> xs, ys, vs;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      fail(ErrorKind::InputError, "line " + std::to_string(lineno) + ": expected 3 columns");
    xs.push_back(parse_double(a, lineno));
    ys.push_back(parse_double(b, lineno));
    vs.push_back(parse_double(c, lineno));
  }
  const auto ax = axis_of(xs, "x"), ay = axis_of(ys, "y");
  const int nx = int(ax.size()), ny = int(ay.size());
  if (int(vs.size()) != nx * ny) fail(ErrorKind::InputError, "CSV does not cover the full grid");
  GridSpec s{nx, ny, ax.front(), ax.back(), ay.front(), ay.back()};
  Field::Array v = Field::Array::Constant(nx, ny, std::nan(""));
  Mask seen = full_mask(s, false);
  for (size_t k = 0; k < vs.size(); ++k) {
    const int i = int(std::lround((xs[k] - s.x0) / s.hx())), j = int(std::lround((ys[k] - s.y0) / s.hy()));
    if (seen(i, j)) fail(ErrorKind::InputError, "duplicate node in CSV");
    seen(i, j) = true;
    v(i, j) = vs[k];
  }
  if (!v.allFinite()) fail(ErrorKind::NonFinite, "CSV values must be finite");
  return Field(s, std::move(v));
}

Field read_csv_field_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InputError, "cannot open " + path);
  return read_csv_field(in);
}

GridSpec grid_from_json(const json& j, const GridSpec& fb) {
  if (!j.is_object()) fail(ErrorKind::InputError, "grid must be an object");
  GridSpec s = fb;
  try {
    if (j.contains("n")) s.nx = s.ny = j.at("n").get<int>();
    if (j.contains("nx")) s.nx = j.at("nx").get<int>();
    if (j.contains("ny")) s.ny = j.at("ny").get<int>();
    if (j.contains("x0")) s.x0 = j.at("x0").get<double>();
    if (j.contains("x1")) s.x1 = j.at("x1").get<double>();
    if (j.contains("y0")) s.y0 = j.at("y0").get<double>();
    if (j.contains("y1")) s.y1 = j.at("y1").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorKind::InputError, std::string("grid: ") + e.what());
  }
  s.validate();
  return s;
}

json grid_to_json(const GridSpec& s) {
  return json{{"nx", s.nx}, {"ny", s.ny}, {"x0", s.x0}, {"x1", s.x1}, {"y0", s.y0}, {"y1", s.y1}};
}

Field field_from_json(const json& j) {
  if (!j.is_object() || !j.contains("spec") || !j.contains("values"))
    fail(ErrorKind::InputError, "grid container needs spec and values");
  const GridSpec s = grid_from_json(j.at("spec"));
  const json& v = j.at("values");
  if (!v.is_array() || int(v.size()) != s.nx * s.ny)
    fail(ErrorKind::GridMismatch, "values has " + std::to_string(v.size()) + " entries, grid has " +
                                      std::to_string(s.nx * s.ny));
  Field::Array a(s.nx, s.ny);
  for (int jj = 0; jj < s.ny; ++jj)
    for (int i = 0; i < s.nx; ++i) {
      const json& e = v[size_t(i + s.nx * jj)];
      if (!e.is_number()) fail(ErrorKind::InputError, "values must be numbers");
      a(i, jj) = e.get<double>();
    }
  if (!a.allFinite()) fail(ErrorKind::NonFinite, "values must be finite");
  return Field(s, std::move(a));
}

json field_to_json(const Field& f) {
  json v = json::array();
  for (int j = 0; j < f.spec.ny; ++j)
    for (int i = 0; i < f.spec.nx; ++i) v.push_back(number(f(i, j)));
  return json{{"spec", grid_to_json(f.spec)}, {"values", std::move(v)}};
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InputError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::InputError, path + ": " + e.what());
  }
}

void write_csv_field(const Field& f, std::ostream& out) {
  out.precision(17);
  out << "x,y,value\n";
  for (int j = 0; j < f.spec.ny; ++j)
    for (int i = 0; i < f.spec.nx; ++i) out << f.spec.x(i) << ',' << f.spec.y(j) << ',' << f(i, j) << '\n';
}

MeshFormat parse_mesh_format(const std::string& s) {
  if (s == "obj") return MeshFormat::Obj;
  if (s == "ply") return MeshFormat::Ply;
  if (s == "csv") return MeshFormat::Csv;
  fail(ErrorKind::InputError, "unknown mesh format '" + s + "'");
}

const char* extension(MeshFormat f) {
  switch (f) {
    case MeshFormat::Obj: return ".obj";
    case MeshFormat::Ply: return ".ply";
    case MeshFormat::Csv: return ".csv";
  }
  return "";
}

int triangle_count(const SurfaceMesh& m) {
  int n = 0;
  for_each_triangle(m, [&](int, int, int) { ++n; });
  return n;
}

void write_obj(const SurfaceMesh& m, std::ostream& out) {
  std::vector<int> remap;
  const auto verts = emitted_vertices(m, remap);
  out.precision(12);
  if (!m.label.empty()) out << "# " << m.label << '\n';
  for (int k : verts) {
    const Vec3 p = m.point(k % m.spec.nx, k / m.spec.nx);
    out << "v " << as_float(p.x()) << ' ' << as_float(p.y()) << ' ' << as_float(p.z()) << '\n';
  }
  for (int k : verts) {
    const Vec3 n = m.normal(k % m.spec.nx, k / m.spec.nx);
    out << "vn " << as_float(n.x()) << ' ' << as_float(n.y()) << ' ' << as_float(n.z()) << '\n';
  }
  for_each_triangle(m, [&](int a, int b, int c) {
    const int ia = remap[a] + 1, ib = remap[b] + 1, ic = remap[c] + 1;
    out << "f " << ia << "//" << ia << ' ' << ib << "//" << ib << ' ' << ic << "//" << ic << '\n';
  });
}

void write_ply(const SurfaceMesh& m, std::ostream& out) {
  std::vector<int> remap;
  const auto verts = emitted_vertices(m, remap);
  const int nf = triangle_count(m);
  out << "ply\nformat binary_little_endian 1.0\n";
  if (!m.label.empty()) out << "comment " << m.label << '\n';
  out << "element vertex " << verts.size() << '\n';
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz", "A", "B", "mask"}) out << "property float " << p << '\n';
  out << "element face " << nf << "\nproperty list uchar int vertex_indices\nend_header\n";
  // host order is little endian on every supported target
  static_assert(std::endian::native == std::endian::little);
  auto put = [&](auto v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  for (int k : verts) {
    const int i = k % m.spec.nx, j = k / m.spec.nx;
    const Vec3 p = m.point(i, j), n = m.normal(i, j);
    for (int c = 0; c < 3; ++c) put(as_float(p(c)));
    for (int c = 0; c < 3; ++c) put(as_float(n(c)));
    put(as_float(m.A.values.size() ? m.A(i, j) : 0.0));
    put(as_float(m.B.values.size() ? m.B(i, j) : 0.0));
    put(m.mask(i, j) ? 1.0f : 0.0f);
  }
  for_each_triangle(m, [&](int a, int b, int c) {
    put(std::uint8_t(3));
    put(std::int32_t(remap[a]));
    put(std::int32_t(remap[b]));
    put(std::int32_t(remap[c]));
  });
}

void write_csv_points(const SurfaceMesh& m, std::ostream& out) {
  out.precision(17);
  out << "i,j,u,v,x,y,z,nx,ny,nz,A,B,mask\n";
  for (int j = 0; j < m.spec.ny; ++j)
    for (int i = 0; i < m.spec.nx; ++i) {
      const Vec3 p = m.point(i, j), n = m.normal(i, j);
      out << i << ',' << j << ',' << m.spec.x(i) << ',' << m.spec.y(j);
      for (int c = 0; c < 3; ++c) out << ',' << p(c);
      for (int c = 0; c < 3; ++c) out << ',' << n(c);
      out << ',' << (m.A.values.size() ? m.A(i, j) : 0.0) << ',' << (m.B.values.size() ? m.B(i, j) : 0.0) << ','
          << int(m.mask(i, j)) << '\n';
    }
}

void write_mesh(const SurfaceMesh& m, const std::string& path, MeshFormat f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InputError, "cannot write " + path);
  switch (f) {
    case MeshFormat::Obj: write_obj(m, out); break;
    case MeshFormat::Ply: write_ply(m, out); break;
    case MeshFormat::Csv: write_csv_points(m, out); break;
  }
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json to_json(const ClassificationReport& r) {
  json j;
  j["verdict"] = to_string(r.verdict);
  j["tol"] = number(r.tol);
  j["h"] = number(r.h);
  j["max_first"] = number(r.max_first);
  j["max_dual"] = number(r.max_dual);
  j["max_second"] = number(r.max_second);
  j["dual_also_holds"] = r.dual_also_holds;
  j["mixed"] = r.mixed;
  j["coverage"] = number(r.coverage);
  json res = json::array();
  for (const auto& s : r.residuals) res.push_back({{"name", s.name}, {"max", number(s.max)}, {"mean", number(s.mean)}});
  j["residuals"] = std::move(res);
  const auto& nd = r.nondegeneracy;
  j["nondegeneracy"] = {{"min_A_minus_B", number(nd.min_A_minus_B)}, {"min_abs_A", number(nd.min_abs_A)},
                        {"min_abs_B", number(nd.min_abs_B)},         {"max_abs_Ay", number(nd.max_abs_Ay)},
                        {"max_abs_Bx", number(nd.max_abs_Bx)},       {"tol_zero", number(nd.tol_zero)},
                        {"invertible", nd.invertible},               {"nondegenerate", nd.nondegenerate}};
  json part = json::array();
  for (int row = 0; row < int(r.partition.cols()); ++row) {
    json runs = json::array();
    for (const auto& [v, c] : run_lengths(r.partition, row)) runs.push_back({v, c});
    part.push_back(std::move(runs));
  }
  j["partition"] = std::move(part);
  j["notes"] = r.notes;
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InputError, "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace preshape
