#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "preshape/classifier.hpp"
#include "preshape/grid.hpp"
#include "preshape/types.hpp"

namespace preshape {

using json = nlohmann::ordered_json;

// header `x,y,value`, one row per node, x varying fastest; spacing must be uniform
Field read_csv_field(std::istream& in);
Field read_csv_field_file(const std::string& path);

// {spec: {nx, ny, x0, x1, y0, y1}, values: [...]}, values row-major in x
Field field_from_json(const json& j);
json field_to_json(const Field& f);
GridSpec grid_from_json(const json& j, const GridSpec& fallback = {});
json grid_to_json(const GridSpec& s);

json parse_json_file(const std::string& path);

void write_csv_field(const Field& f, std::ostream& out);

enum class MeshFormat { Obj, Ply, Csv };
MeshFormat parse_mesh_format(const std::string& s);
const char* extension(MeshFormat f);

// masked quads split into two triangles; welded nodes share their representative vertex
void write_obj(const SurfaceMesh& m, std::ostream& out);
void write_ply(const SurfaceMesh& m, std::ostream& out);
void write_csv_points(const SurfaceMesh& m, std::ostream& out);
void write_mesh(const SurfaceMesh& m, const std::string& path, MeshFormat f);

// number of triangles write_obj/write_ply emit
int triangle_count(const SurfaceMesh& m);

json to_json(const ClassificationReport& r);

// NaN and infinities become null
json number(double v);

void write_json_file(const json& j, const std::string& path);

}  // namespace preshape
