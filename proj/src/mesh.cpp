#include "vskip/mesh.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace vskip {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kind_name(VertexClass::Kind k) {
  switch (k) {
    case VertexClass::Kind::Interior: return "interior";
    case VertexClass::Kind::FreeBoundary: return "free_boundary";
    case VertexClass::Kind::Clamped: return "clamped";
  }
  return "interior";
}

VertexClass::Kind kind_from_name(const std::string& s) {
  if (s == "interior") return VertexClass::Kind::Interior;
  if (s == "free_boundary") return VertexClass::Kind::FreeBoundary;
  if (s == "clamped") return VertexClass::Kind::Clamped;
  throw GeometryError("unknown vertex class '" + s + "'");
}

}  // namespace

int TriMesh::add_vertex(const Vec3& p, VertexClass c) {
  vertices.push_back(p);
  classes.push_back(c);
  return static_cast<int>(vertices.size()) - 1;
}

int TriMesh::add_triangle(int a, int b, int c) {
  triangles.push_back({a, b, c});
  return static_cast<int>(triangles.size()) - 1;
}

void TriMesh::weld(double tol) {
  using Key = std::tuple<long long, long long, long long>;
  std::map<Key, int> seen;
  std::vector<int> remap(vertices.size());
  std::vector<Vec3> nv;
  std::vector<VertexClass> nc;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec3& p = vertices[i];
    const Key k{std::llround(p.x() / tol), std::llround(p.y() / tol), std::llround(p.z() / tol)};
    auto it = seen.find(k);
    if (it != seen.end() && (nv[static_cast<std::size_t>(it->second)] - p).norm() <= tol) {
      remap[i] = it->second;
      continue;
    }
    const int id = static_cast<int>(nv.size());
    seen.emplace(k, id);
    nv.push_back(p);
    nc.push_back(classes[i]);
    remap[i] = id;
  }
  for (auto& t : triangles)
    for (auto& v : t) v = remap[static_cast<std::size_t>(v)];
  vertices = std::move(nv);
  classes = std::move(nc);
}

std::vector<std::pair<int, int>> boundary_edges(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  std::vector<std::pair<int, int>> out;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      if (count[{std::min(a, b), std::max(a, b)}] == 1) out.emplace_back(a, b);
    }
  return out;
}

std::vector<std::vector<int>> boundary_neighbours(const TriMesh& mesh) {
  std::vector<std::vector<int>> nb(mesh.num_vertices());
  for (const auto& [a, b] : boundary_edges(mesh)) {
    nb[static_cast<std::size_t>(a)].push_back(b);
    nb[static_cast<std::size_t>(b)].push_back(a);
  }
  return nb;
}

int euler_characteristic(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      edges[{std::min(a, b), std::max(a, b)}] = 1;
    }
  std::vector<char> used(mesh.num_vertices(), 0);
  for (const auto& t : mesh.triangles)
    for (int v : t) used[static_cast<std::size_t>(v)] = 1;
  const auto nv = std::count(used.begin(), used.end(), 1);
  return static_cast<int>(nv) - static_cast<int>(edges.size()) + static_cast<int>(mesh.num_triangles());
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * (b - a).cross(c - a).norm(); }

double surface_area(const TriMesh& mesh) {
  double s = 0.0;
  for (const auto& t : mesh.triangles)
    s += triangle_area(mesh.vertices[static_cast<std::size_t>(t[0])], mesh.vertices[static_cast<std::size_t>(t[1])],
                       mesh.vertices[static_cast<std::size_t>(t[2])]);
  return s;
}

void validate(const TriMesh& mesh, const PolyhedralCone* cone) {
  const auto n = static_cast<int>(mesh.num_vertices());
  if (mesh.classes.size() != mesh.vertices.size()) throw GeometryError("class list does not match vertex count");
  std::map<std::pair<int, int>, int> directed;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    for (int v : t)
      if (v < 0 || v >= n) throw GeometryError("triangle " + std::to_string(i) + " has an invalid vertex index");
    const double area = triangle_area(mesh.vertices[static_cast<std::size_t>(t[0])],
                                      mesh.vertices[static_cast<std::size_t>(t[1])],
                                      mesh.vertices[static_cast<std::size_t>(t[2])]);
    if (!(area > 1e-14)) throw GeometryError("triangle " + std::to_string(i) + " is degenerate");
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      if (++directed[{a, b}] > 1) throw GeometryError("inconsistent orientation or non-manifold edge");
    }
  }
  if (cone == nullptr) return;
  const auto m = static_cast<int>(cone->size());
  for (int i = 0; i < n; ++i) {
    const auto& c = mesh.classes[static_cast<std::size_t>(i)];
    const Vec3& p = mesh.vertices[static_cast<std::size_t>(i)];
    if (c.kind == VertexClass::Kind::FreeBoundary) {
      if (c.facet < 0 || c.facet >= m || c.edge_facet >= m)
        throw GeometryError("vertex " + std::to_string(i) + " refers to a missing facet");
      if (std::abs(p.dot(cone->normal(static_cast<std::size_t>(c.facet)))) > 1e-9 ||
          (c.edge_facet >= 0 && std::abs(p.dot(cone->normal(static_cast<std::size_t>(c.edge_facet)))) > 1e-9))
        throw GeometryError("free-boundary vertex " + std::to_string(i) + " is off its facet");
    } else if (c.kind == VertexClass::Kind::Clamped) {
      if (std::abs(p.norm() - mesh.clamp_radius) > 1e-9)
        throw GeometryError("clamped vertex " + std::to_string(i) + " is off the clamp sphere");
    }
  }
}

void write_obj(const TriMesh& mesh, std::ostream& os) {
  for (const auto& v : mesh.vertices)
    os << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

TriMesh read_obj(std::istream& is) {
  TriMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw GeometryError("malformed vertex on line " + std::to_string(lineno));
      mesh.add_vertex(Vec3(x, y, z));
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const int v = std::stoi(tok.substr(0, tok.find('/')));
        idx.push_back(v > 0 ? v - 1 : static_cast<int>(mesh.num_vertices()) + v);
      }
      if (idx.size() < 3) throw GeometryError("face with fewer than 3 vertices on line " + std::to_string(lineno));
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.add_triangle(idx[0], idx[k], idx[k + 1]);
    }
  }
  return mesh;
}

std::string classes_to_json(const TriMesh& mesh) {
  nlohmann::ordered_json j;
  j["clamp_radius"] = mesh.clamp_radius;
  j["vertex_count"] = mesh.num_vertices();
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const auto& c = mesh.classes[i];
    if (c.kind == VertexClass::Kind::Interior) continue;
    nlohmann::ordered_json e;
    e["index"] = i;
    e["kind"] = kind_name(c.kind);
    if (c.is_free()) e["facet"] = c.facet;
    if (c.is_pinned()) e["edge_facet"] = c.edge_facet;
    arr.push_back(e);
  }
  j["classes"] = arr;
  return j.dump(2);
}

void classes_from_json(TriMesh& mesh, const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  mesh.clamp_radius = j.value("clamp_radius", 0.0);
  mesh.classes.assign(mesh.num_vertices(), VertexClass::interior());
  for (const auto& e : j.at("classes")) {
    const auto idx = e.at("index").get<std::size_t>();
    if (idx >= mesh.num_vertices()) throw GeometryError("class entry for missing vertex " + std::to_string(idx));
    VertexClass c;
    c.kind = kind_from_name(e.at("kind").get<std::string>());
    c.facet = e.value("facet", -1);
    c.edge_facet = e.value("edge_facet", -1);
    if (c.is_free() && c.facet < 0) throw GeometryError("free-boundary vertex without facet");
    mesh.classes[idx] = c;
  }
}

void save_mesh(const TriMesh& mesh, const std::string& obj_path, const std::string& classes_path) {
  std::ofstream obj(obj_path);
  if (!obj) throw GeometryError("cannot write " + obj_path);
  write_obj(mesh, obj);
  if (!classes_path.empty()) {
    std::ofstream side(classes_path);
    if (!side) throw GeometryError("cannot write " + classes_path);
    side << classes_to_json(mesh) << '\n';
  }
}

TriMesh load_mesh(const std::string& obj_path, const std::string& classes_path) {
  std::ifstream obj(obj_path);
  if (!obj) throw GeometryError("cannot read " + obj_path);
  TriMesh mesh = read_obj(obj);
  if (!classes_path.empty()) {
    std::ifstream side(classes_path);
    if (!side) throw GeometryError("cannot read " + classes_path);
    std::stringstream ss;
    ss << side.rdbuf();
    classes_from_json(mesh, ss.str());
  }
  return mesh;
}

}  // namespace vskip
