#include "vskip/minimizer.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

namespace vskip {

namespace {

constexpr double kFacetTol = 1e-9;
constexpr double kMinTriangleArea = 1e-14;
constexpr int kMaxHalvings = 60;
constexpr double kMaxTravel = 0.3;

int g_threads = 0;

template <class Fn>
void for_chunks(std::size_t n, Fn&& fn) {
  const int t = worker_threads();
  if (t <= 1 || n < 4096) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + static_cast<std::size_t>(t) - 1) / static_cast<std::size_t>(t);
  std::vector<std::jthread> pool;
  for (std::size_t b = 0; b < n; b += chunk) pool.emplace_back([&fn, b, n, chunk] { fn(b, std::min(n, b + chunk)); });
}

const Vec3& vtx(const TriMesh& m, int i) { return m.vertices[static_cast<std::size_t>(i)]; }

Vec3 tri_normal_unnormalized(const TriMesh& m, const Tri& t) {
  return (vtx(m, t[1]) - vtx(m, t[0])).cross(vtx(m, t[2]) - vtx(m, t[0]));
}

// Unit direction of the cone edge carried by facets f and g, oriented into the
// cone; nullopt when the two facets do not meet in an edge of the cone.
std::optional<Vec3> edge_direction(const PolyhedralCone& cone, int f, int g) {
  const Vec3 c = cone.normal(static_cast<std::size_t>(f)).cross(cone.normal(static_cast<std::size_t>(g)));
  if (c.norm() <= 1e-12) return std::nullopt;
  const Vec3 u = c.normalized();
  if (cone.max_violation(u) <= 1e-10) return u;
  if (cone.max_violation(-u) <= 1e-10) return Vec3(-u);
  return std::nullopt;
}

// Facets (other than f) that contain the ray r.
std::vector<int> facets_on_ray(const PolyhedralCone& cone, const Vec3& r, int except) {
  std::vector<int> out;
  for (std::size_t i = 0; i < cone.size(); ++i)
    if (static_cast<int>(i) != except && std::abs(cone.normal(i).dot(r)) <= 1e-10) out.push_back(static_cast<int>(i));
  return out;
}

bool admissible_facet(const TriMesh& mesh, const PolyhedralCone& cone, const std::vector<std::vector<int>>& bnb,
                      int v, int f) {
  for (int w : bnb[static_cast<std::size_t>(v)]) {
    const auto& c = mesh.classes[static_cast<std::size_t>(w)];
    if (c.touches(f)) continue;
    if (c.kind == VertexClass::Kind::Clamped &&
        std::abs(vtx(mesh, w).dot(cone.normal(static_cast<std::size_t>(f)))) <= kFacetTol)
      continue;
    return false;
  }
  return true;
}

// Orthonormal basis of the directions a vertex of class c may move in.
int constraint_basis(const VertexClass& c, const Vec3& pos, const PolyhedralCone& cone, Vec3 basis[3]) {
  switch (c.kind) {
    case VertexClass::Kind::Interior:
      basis[0] = Vec3::UnitX();
      basis[1] = Vec3::UnitY();
      basis[2] = Vec3::UnitZ();
      return 3;
    case VertexClass::Kind::Clamped:
      return 0;
    case VertexClass::Kind::FreeBoundary:
      break;
  }
  const Vec3& n = cone.normal(static_cast<std::size_t>(c.facet));
  if (c.edge_facet >= 0) {
    Vec3 r = n.cross(cone.normal(static_cast<std::size_t>(c.edge_facet))).normalized();
    if (r.dot(pos) < 0.0) r = -r;
    basis[0] = r;
    return 1;
  }
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  basis[0] = (seed - seed.dot(n) * n).normalized();
  basis[1] = n.cross(basis[0]);
  return 2;
}

Vec3 project_onto(const Vec3& g, const Vec3* basis, int k) {
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < k; ++i) out += g.dot(basis[i]) * basis[i];
  return out;
}

struct ProjectStatus {
  bool ok = true;
  std::vector<int> pinned;
};

// In-place constraint restoration (see project_to_constraints).
ProjectStatus restore_constraints(TriMesh& mesh, const PolyhedralCone& cone,
                                  const std::vector<std::vector<int>>& bnb) {
  ProjectStatus st;
  const auto nv = mesh.num_vertices();
  for (std::size_t i = 0; i < nv; ++i) {
    auto& c = mesh.classes[i];
    Vec3& x = mesh.vertices[i];
    if (c.kind == VertexClass::Kind::Interior) continue;
    if (c.kind == VertexClass::Kind::Clamped) {
      const double r = x.norm();
      if (r > 0.0) x *= mesh.clamp_radius / r;
      continue;
    }
    auto pin = [&](int f, int g) -> bool {
      auto dir = edge_direction(cone, f, g);
      if (!dir) {
        // Not an edge of the cone: fall back to the closest edge of facet f.
        double best = -std::numeric_limits<double>::infinity();
        int best_g = -1;
        for (std::size_t k = 0; k < cone.size(); ++k) {
          if (static_cast<int>(k) == f) continue;
          auto d = edge_direction(cone, f, static_cast<int>(k));
          if (d && d->dot(x) > best) {
            best = d->dot(x);
            best_g = static_cast<int>(k);
            dir = d;
          }
        }
        if (best_g < 0) return false;
        g = best_g;
      }
      const double s = x.dot(*dir);
      if (!(s > 1e-12)) return false;
      x = s * (*dir);
      c = VertexClass::on_edge(f, g);
      st.pinned.push_back(static_cast<int>(i));
      return true;
    };
    if (c.is_pinned()) {
      auto dir = edge_direction(cone, c.facet, c.edge_facet);
      if (!dir) {
        st.ok = false;
        continue;
      }
      const double s = x.dot(*dir);
      if (!(s > 1e-12)) {
        st.ok = false;
        continue;
      }
      x = s * (*dir);
      continue;
    }
    bool done = false;
    for (int pass = 0; pass < 2 && !done; ++pass) {
      const Vec3& n = cone.normal(static_cast<std::size_t>(c.facet));
      x -= x.dot(n) * n;
      int worst = -1;
      double worst_val = kFacetTol;
      for (std::size_t k = 0; k < cone.size(); ++k) {
        const double v = x.dot(cone.normal(k));
        if (static_cast<int>(k) != c.facet && v > worst_val) {
          worst_val = v;
          worst = static_cast<int>(k);
        }
      }
      if (worst < 0) {
        done = true;
      } else if (pass == 0 && admissible_facet(mesh, cone, bnb, static_cast<int>(i), worst)) {
        c.facet = worst;  // reassign and project again
      } else {
        if (!pin(c.facet, worst)) st.ok = false;
        done = true;
      }
    }
    if (!done) {
      // Second pass still violated: pin to the edge of the current facet.
      int worst = -1;
      double worst_val = kFacetTol;
      for (std::size_t k = 0; k < cone.size(); ++k) {
        const double v = x.dot(cone.normal(k));
        if (v > worst_val) {
          worst_val = v;
          worst = static_cast<int>(k);
        }
      }
      if (worst >= 0 && !pin(c.facet, worst)) st.ok = false;
    }
    if (c.is_free() && cone.max_violation(x) > kFacetTol) st.ok = false;
  }
  return st;
}

std::vector<double> triangle_areas(const TriMesh& mesh) {
  std::vector<double> a(mesh.num_triangles());
  for_chunks(a.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& t = mesh.triangles[i];
      a[i] = triangle_area(vtx(mesh, t[0]), vtx(mesh, t[1]), vtx(mesh, t[2]));
    }
  });
  return a;
}

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Pinned vertices may leave their edge for one of its two facets when that
// keeps every boundary edge inside a single facet and the descent points
// into that facet.
std::vector<VertexClass> choose_targets(const TriMesh& mesh, const PolyhedralCone& cone,
                                        const std::vector<std::vector<int>>& bnb, const std::vector<Vec3>& grad) {
  std::vector<VertexClass> targets = mesh.classes;
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const auto& c = mesh.classes[i];
    if (!c.is_pinned()) continue;
    Vec3 basis[3];
    const int k = constraint_basis(c, mesh.vertices[i], cone, basis);
    double best = project_onto(grad[i], basis, k).squaredNorm();
    for (const auto& [f, other] : {std::pair{c.facet, c.edge_facet}, std::pair{c.edge_facet, c.facet}}) {
      if (!admissible_facet(mesh, cone, bnb, static_cast<int>(i), f)) continue;
      const Vec3& n = cone.normal(static_cast<std::size_t>(f));
      const Vec3 d = -(grad[i] - grad[i].dot(n) * n);
      if (d.dot(cone.normal(static_cast<std::size_t>(other))) >= -1e-14) continue;
      if (d.squaredNorm() > best * (1.0 + 1e-12)) {
        best = d.squaredNorm();
        targets[i] = VertexClass::on_facet(f);
      }
    }
  }
  return targets;
}

// Interior vertices inside the cone, no degenerate or flipped triangles.
bool feasible_trial(const TriMesh& trial, const PolyhedralCone& cone, const std::vector<Vec3>& old_normals) {
  for (std::size_t i = 0; i < trial.num_vertices(); ++i)
    if (trial.classes[i].kind == VertexClass::Kind::Interior && cone.max_violation(trial.vertices[i]) > kFacetTol)
      return false;
  for (std::size_t i = 0; i < trial.num_triangles(); ++i) {
    const Vec3 n = tri_normal_unnormalized(trial, trial.triangles[i]);
    if (0.5 * n.norm() <= kMinTriangleArea || n.dot(old_normals[i]) <= 0.0) return false;
  }
  return true;
}

std::vector<std::vector<int>> vertex_neighbours(const TriMesh& mesh) {
  std::vector<std::vector<int>> nb(mesh.num_vertices());
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      nb[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])].push_back(t[static_cast<std::size_t>((k + 1) % 3)]);
      nb[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])].push_back(t[static_cast<std::size_t>((k + 2) % 3)]);
    }
  for (auto& v : nb) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return nb;
}

// Umbrella displacement restricted to the surface: tangent plane for interior
// vertices, tangent of the boundary curve for facet vertices. Vertices on cone
// edges and on the clamp sphere stay put.
std::vector<Vec3> tangential_umbrella(const TriMesh& mesh, const PolyhedralCone& cone,
                                      const std::vector<std::vector<int>>& nb,
                                      const std::vector<std::vector<int>>& bnb) {
  std::vector<Vec3> normal(mesh.num_vertices(), Vec3::Zero());
  for (const auto& t : mesh.triangles) {
    const Vec3 n = tri_normal_unnormalized(mesh, t);
    for (int v : t) normal[static_cast<std::size_t>(v)] += n;
  }
  std::vector<Vec3> out(mesh.num_vertices(), Vec3::Zero());
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const auto& c = mesh.classes[i];
    const Vec3& x = mesh.vertices[i];
    if (c.kind == VertexClass::Kind::Interior) {
      if (nb[i].empty() || normal[i].norm() == 0.0) continue;
      Vec3 mean = Vec3::Zero();
      for (int w : nb[i]) mean += vtx(mesh, w);
      const Vec3 d = mean / static_cast<double>(nb[i].size()) - x;
      const Vec3 n = normal[i].normalized();
      out[i] = d - d.dot(n) * n;
    } else if (c.is_free() && !c.is_pinned() && bnb[i].size() == 2) {
      const Vec3& n = cone.normal(static_cast<std::size_t>(c.facet));
      Vec3 tau = vtx(mesh, bnb[i][1]) - vtx(mesh, bnb[i][0]);
      tau -= tau.dot(n) * n;
      if (tau.norm() == 0.0) continue;
      tau.normalize();
      const Vec3 d = 0.5 * (vtx(mesh, bnb[i][0]) + vtx(mesh, bnb[i][1])) - x;
      out[i] = d.dot(tau) * tau;
    }
  }
  return out;
}

struct Dofs {
  std::vector<int> offset;  // first reduced index per vertex
  std::vector<int> count;
  std::vector<std::array<Vec3, 3>> basis;
  int total = 0;
};

Dofs build_dofs(const TriMesh& mesh, const std::vector<VertexClass>& classes, const PolyhedralCone& cone) {
  Dofs d;
  const auto nv = mesh.num_vertices();
  d.offset.resize(nv);
  d.count.resize(nv);
  d.basis.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    d.offset[i] = d.total;
    d.count[i] = constraint_basis(classes[i], mesh.vertices[i], cone, d.basis[i].data());
    d.total += d.count[i];
  }
  return d;
}

// Solves (K + mu M) d = -g on the constrained degrees of freedom, with K the
// cotangent stiffness (edge weights clamped to stay positive) and M the lumped
// mass. The sparsity pattern only depends on the connectivity and the dof
// layout, so its symbolic analysis is reused between iterations.
class SobolevMetric {
 public:
  explicit SobolevMetric(const TriMesh& mesh) {
    std::map<std::pair<int, int>, int> index;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
      for (int k = 0; k < 3; ++k) {
        const int i = mesh.triangles[t][static_cast<std::size_t>(k)];
        const int j = mesh.triangles[t][static_cast<std::size_t>((k + 1) % 3)];
        const auto key = std::pair{std::min(i, j), std::max(i, j)};
        auto it = index.find(key);
        if (it == index.end()) {
          it = index.emplace(key, static_cast<int>(edges_.size())).first;
          edges_.push_back(key);
        }
        tri_edges_.push_back(it->second);
      }
  }

  std::vector<Vec3> direction(const TriMesh& mesh, const Dofs& dofs, const std::vector<Vec3>& grad, double mu) {
    const auto nv = mesh.num_vertices();
    // Any fixed SPD metric gives a descent direction, so the factorization is
    // only refreshed every few iterations or when the dof layout changes.
    if (dofs.count != layout_ || ++age_ >= kRefreshEvery) {
      assemble(mesh, dofs, mu);
      age_ = 0;
    }
    std::vector<Vec3> dir(nv, Vec3::Zero());
    if (solver_.info() != Eigen::Success) return dir;
    Eigen::VectorXd rhs(dofs.total);
    for (std::size_t i = 0; i < nv; ++i)
      for (int a = 0; a < dofs.count[i]; ++a)
        rhs(dofs.offset[i] + a) = -grad[i].dot(dofs.basis[i][static_cast<std::size_t>(a)]);
    const Eigen::VectorXd y = solver_.solve(rhs);
    for (std::size_t i = 0; i < nv; ++i)
      for (int a = 0; a < dofs.count[i]; ++a)
        dir[i] += y(dofs.offset[i] + a) * dofs.basis[i][static_cast<std::size_t>(a)];
    return dir;
  }

 private:
  static constexpr int kRefreshEvery = 10;

  void assemble(const TriMesh& mesh, const Dofs& dofs, double mu) {
    const auto nv = mesh.num_vertices();
    std::vector<double> weight(edges_.size(), 0.0);
    std::vector<double> mass(nv, 0.0);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangles[t];
      const double area = triangle_area(vtx(mesh, tri[0]), vtx(mesh, tri[1]), vtx(mesh, tri[2]));
      for (int k = 0; k < 3; ++k) {
        const int i = tri[static_cast<std::size_t>(k)];
        const int j = tri[static_cast<std::size_t>((k + 1) % 3)];
        const int o = tri[static_cast<std::size_t>((k + 2) % 3)];
        const Vec3 u = vtx(mesh, i) - vtx(mesh, o);
        const Vec3 v = vtx(mesh, j) - vtx(mesh, o);
        weight[static_cast<std::size_t>(tri_edges_[3 * t + static_cast<std::size_t>(k)])] +=
            0.5 * u.dot(v) / std::max(u.cross(v).norm(), 1e-300);
        mass[static_cast<std::size_t>(i)] += area / 3.0;
      }
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(edges_.size() * 8 + static_cast<std::size_t>(dofs.total));
    std::vector<double> diag(nv, 0.0);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const double w = std::max(weight[e], 1e-3);
      const auto i = static_cast<std::size_t>(edges_[e].first), j = static_cast<std::size_t>(edges_[e].second);
      diag[i] += w;
      diag[j] += w;
      for (int a = 0; a < dofs.count[i]; ++a)
        for (int b = 0; b < dofs.count[j]; ++b) {
          const double val =
              -w * dofs.basis[i][static_cast<std::size_t>(a)].dot(dofs.basis[j][static_cast<std::size_t>(b)]);
          trip.emplace_back(dofs.offset[i] + a, dofs.offset[j] + b, val);
          trip.emplace_back(dofs.offset[j] + b, dofs.offset[i] + a, val);
        }
    }
    for (std::size_t i = 0; i < nv; ++i)
      for (int a = 0; a < dofs.count[i]; ++a)
        trip.emplace_back(dofs.offset[i] + a, dofs.offset[i] + a, diag[i] + mu * mass[i]);
    Eigen::SparseMatrix<double> g(dofs.total, dofs.total);
    g.setFromTriplets(trip.begin(), trip.end());
    if (dofs.count != layout_) {
      solver_.analyzePattern(g);
      layout_ = dofs.count;
    }
    solver_.factorize(g);
  }

  std::vector<std::pair<int, int>> edges_;
  std::vector<int> tri_edges_;  // three edge indices per triangle
  std::vector<int> layout_;
  int age_ = 0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

// Section of the cone by {x1 = 0}, as an angular interval; angle theta is
// measured from +x3 towards +x2.
struct Sector {
  double theta_lo, theta_hi;
  int facet_lo, facet_hi;
};

Sector section_sector(const PolyhedralCone& cone) {
  if (cone.is_whole_space()) throw GeometryError("cone has no facets");
  const std::size_t m = cone.size();
  std::vector<Vec2> nrm(m);
  for (std::size_t i = 0; i < m; ++i) {
    nrm[i] = Vec2(cone.normal(i).y(), cone.normal(i).z());
    if (nrm[i].norm() <= 1e-12) throw GeometryError("plane x1 = 0 lies in a facet plane (misses the interior)");
  }
  auto feasible = [&](const Vec2& u) {
    for (const auto& n : nrm)
      if (n.dot(u) >= -1e-12 * n.norm()) return false;
    return true;
  };
  std::optional<double> mid;
  std::vector<Vec2> cands;
  for (std::size_t i = 0; i < m; ++i) {
    cands.push_back(-nrm[i].normalized());
    for (std::size_t j = i + 1; j < m; ++j) cands.push_back(-(nrm[i].normalized() + nrm[j].normalized()));
  }
  for (const auto& c : cands)
    if (c.norm() > 1e-12 && feasible(c.normalized())) {
      mid = std::atan2(c.x(), c.y());
      break;
    }
  if (!mid) throw GeometryError("plane x1 = 0 misses the interior of the cone");

  double lo = -std::numbers::pi, hi = std::numbers::pi;
  int facet_lo = -1, facet_hi = -1;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 out = -nrm[i];
    double centre = std::atan2(out.x(), out.y()) - *mid;
    centre = std::remainder(centre, 2.0 * std::numbers::pi);
    if (centre - 0.5 * std::numbers::pi > lo) {
      lo = centre - 0.5 * std::numbers::pi;
      facet_lo = static_cast<int>(i);
    }
    if (centre + 0.5 * std::numbers::pi < hi) {
      hi = centre + 0.5 * std::numbers::pi;
      facet_hi = static_cast<int>(i);
    }
  }
  if (facet_lo < 0 || facet_hi < 0 || hi - lo >= std::numbers::pi - 1e-9)
    throw GeometryError("section of the plane x1 = 0 is not a proper sector");
  return {*mid + lo, *mid + hi, facet_lo, facet_hi};
}

Vec3 in_plane(double r, double theta) { return Vec3(0.0, r * std::sin(theta), r * std::cos(theta)); }

}  // namespace

void set_worker_threads(int n) { g_threads = std::max(1, n); }

int worker_threads() {
  if (g_threads == 0) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("VSKIP_THREADS")) n = std::atoi(env);
    g_threads = std::max(1, n);
  }
  return g_threads;
}

std::string to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::Converged: return "converged";
    case MinimizeStatus::MaxIters: return "max_iters";
    case MinimizeStatus::Stalled: return "stalled";
  }
  return "unknown";
}

TriMesh make_initial_plane(const PolyhedralCone& cone, double R, int resolution, int side) {
  if (!(R > 0.0)) throw GeometryError("clamp radius must be > 0");
  if (resolution < 2) throw GeometryError("resolution must be >= 2");
  if (side != 1 && side != -1) throw GeometryError("side must be +1 or -1");

  const auto [theta_lo, theta_hi, facet_lo, facet_hi] = section_sector(cone);

  TriMesh mesh;
  mesh.clamp_radius = R;
  const double delta0 = R / (4.0 * resolution);
  // Odd, so that every stretch of the innermost row has an even number of
  // segments and the rows have a middle vertex.
  const int crossing_vertices = resolution | 1;

  // Innermost row.
  std::vector<int> inner;
  if (auto spine_dir = edge_direction(cone, facet_lo, facet_hi);
      spine_dir && cone.max_violation(-*spine_dir) <= 1e-10) {
    inner.push_back(mesh.add_vertex(Vec3::Zero(), VertexClass::on_edge(facet_lo, facet_hi)));
  } else {
    if (!is_vertex(cone)) throw GeometryError("cone is neither a vertex nor a wedge along the section");
    // Walk the cone edges on the chosen side from facet_lo to facet_hi.
    const auto rays = extreme_rays(cone);
    int facet = facet_lo;
    std::vector<char> used(rays.size(), 0);
    for (std::size_t guard = 0; guard <= rays.size(); ++guard) {
      int next = -1;
      for (std::size_t k = 0; k < rays.size(); ++k) {
        if (used[k] || side * rays[k].x() <= 1e-12) continue;
        if (std::abs(rays[k].dot(cone.normal(static_cast<std::size_t>(facet)))) <= 1e-10) {
          next = static_cast<int>(k);
          break;
        }
      }
      if (next < 0) throw GeometryError("cannot close the section near the apex on the requested side");
      used[static_cast<std::size_t>(next)] = 1;
      const Vec3& r = rays[static_cast<std::size_t>(next)];
      const auto others = facets_on_ray(cone, r, facet);
      if (others.size() != 1) throw GeometryError("degenerate cone edge (more than two facets)");
      if (!inner.empty()) {
        // The stretch of boundary across a facet gets its own vertices so it
        // can bend once it moves away from the apex.
        const Vec3 from = vtx(mesh, inner.back());
        for (int q = 1; q <= crossing_vertices; ++q) {
          const double s = static_cast<double>(q) / (crossing_vertices + 1);
          inner.push_back(mesh.add_vertex(from + s * (delta0 * r - from), VertexClass::on_facet(facet)));
        }
      }
      inner.push_back(mesh.add_vertex(delta0 * r, VertexClass::on_edge(facet, others[0])));
      facet = others[0];
      if (facet == facet_hi) break;
    }
    if (facet != facet_hi) throw GeometryError("cannot close the section near the apex on the requested side");
  }

  // Rows are joined by a sequence of steps along either row. Only the first
  // half is chosen greedily (by parameter); the second half mirrors it, so a
  // section symmetric about its bisector gets a symmetric triangulation.
  // With `no_ears`, the end vertices of `a` each get at least two triangles,
  // so no triangle has two boundary edges meeting at a cone edge.
  auto stitch = [&](const std::vector<int>& a, const std::vector<int>& b, bool no_ears) {
    auto param = [](std::size_t j, std::size_t n) {
      return n == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(n - 1);
    };
    const std::size_t na = a.size() - 1, nb = b.size() - 1, total = na + nb;
    std::vector<char> steps;  // 1 = advance along b
    std::size_t i = 0, j = 0;
    if (na % 2 == 1 && nb % 2 == 1) {
      // The middle quad has no symmetric split; stay greedy throughout.
      while (i < na || j < nb) {
        bool advance_b = i >= na || (j < nb && param(j + 1, b.size()) <= param(i + 1, a.size()));
        if (no_ears && na > 0 && nb > 1) {
          if (i == 0 && j == 0) advance_b = true;
          if (j + 1 == nb && i < na) advance_b = false;
        }
        steps.push_back(advance_b ? 1 : 0);
        (advance_b ? j : i) += 1;
      }
    }
    while (steps.size() < total / 2) {
      bool advance_b = i >= na / 2 || (j < nb / 2 && param(j + 1, b.size()) <= param(i + 1, a.size()));
      if (j >= nb / 2) advance_b = false;
      if (no_ears && na > 0 && nb > 1 && steps.empty()) advance_b = true;
      steps.push_back(advance_b ? 1 : 0);
      (advance_b ? j : i) += 1;
    }
    if (steps.size() < total) {
      if (total % 2 == 1) steps.push_back(na > 2 * i ? 0 : 1);
      for (std::size_t s = total / 2; s-- > 0;) steps.push_back(steps[s]);
    }
    i = 0;
    j = 0;
    for (char advance_b : steps) {
      if (advance_b) {
        mesh.add_triangle(a[i], b[j + 1], b[j]);
        ++j;
      } else {
        mesh.add_triangle(a[i], a[i + 1], b[j]);
        ++i;
      }
    }
  };

  std::vector<int> prev = inner;
  for (int k = 1; k <= resolution; ++k) {
    const double r = R * static_cast<double>(k) / resolution;
    std::vector<int> row;
    // Rows never have fewer vertices than the innermost one.
    const int n = std::max(k, static_cast<int>(inner.size()) - 1);
    for (int j = 0; j <= n; ++j) {
      const double theta = (j == n) ? theta_hi : theta_lo + (theta_hi - theta_lo) * static_cast<double>(j) / n;
      VertexClass c = VertexClass::interior();
      if (k == resolution)
        c = VertexClass::clamped();
      else if (j == 0)
        c = VertexClass::on_facet(facet_lo);
      else if (j == n)
        c = VertexClass::on_facet(facet_hi);
      Vec3 p = in_plane(r, theta);
      if (c.is_free()) p -= p.dot(cone.normal(static_cast<std::size_t>(c.facet))) * cone.normal(static_cast<std::size_t>(c.facet));
      row.push_back(mesh.add_vertex(p, c));
    }
    stitch(prev, row, k == 1);
    prev = std::move(row);
  }
  return mesh;
}

TriMesh make_section_fan(const PolyhedralCone& cone, double R, int resolution) {
  if (!(R > 0.0)) throw GeometryError("clamp radius must be > 0");
  if (resolution < 1) throw GeometryError("resolution must be >= 1");
  const auto [theta_lo, theta_hi, facet_lo, facet_hi] = section_sector(cone);
  TriMesh mesh;
  mesh.clamp_radius = R;
  const int apex = mesh.add_vertex(Vec3::Zero(), VertexClass::clamped());
  const int n = 4 * resolution;
  std::vector<int> prev;
  for (int k = 1; k <= resolution; ++k) {
    std::vector<int> row;
    for (int j = 0; j <= n; ++j) {
      const double theta = (j == n) ? theta_hi : theta_lo + (theta_hi - theta_lo) * j / n;
      row.push_back(mesh.add_vertex(in_plane(R * k / resolution, theta), VertexClass::clamped()));
    }
    for (int j = 0; j < n; ++j) {
      const auto u = static_cast<std::size_t>(j);
      if (prev.empty()) {
        mesh.add_triangle(apex, row[u + 1], row[u]);
      } else {
        mesh.add_triangle(prev[u], row[u + 1], row[u]);
        mesh.add_triangle(prev[u], prev[u + 1], row[u + 1]);
      }
    }
    prev = std::move(row);
  }
  return mesh;
}

std::vector<Vec3> area_gradient(const TriMesh& mesh) {
  std::vector<std::array<Vec3, 3>> per_tri(mesh.num_triangles());
  for_chunks(per_tri.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& t = mesh.triangles[i];
      const Vec3 n = tri_normal_unnormalized(mesh, t);
      const double len = n.norm();
      const Vec3 nh = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
      for (int k = 0; k < 3; ++k) {
        const Vec3& next = vtx(mesh, t[static_cast<std::size_t>((k + 1) % 3)]);
        const Vec3& prev = vtx(mesh, t[static_cast<std::size_t>((k + 2) % 3)]);
        per_tri[i][static_cast<std::size_t>(k)] = 0.5 * nh.cross(prev - next);
      }
    }
  });
  std::vector<Vec3> g(mesh.num_vertices(), Vec3::Zero());
  for (std::size_t i = 0; i < per_tri.size(); ++i)
    for (int k = 0; k < 3; ++k)
      g[static_cast<std::size_t>(mesh.triangles[i][static_cast<std::size_t>(k)])] += per_tri[i][static_cast<std::size_t>(k)];
  return g;
}

std::vector<double> vertex_areas(const TriMesh& mesh) {
  const auto a = triangle_areas(mesh);
  std::vector<double> out(mesh.num_vertices(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int v : mesh.triangles[i]) out[static_cast<std::size_t>(v)] += a[i] / 3.0;
  return out;
}

std::vector<Vec3> projected_gradient(const TriMesh& mesh, const PolyhedralCone& cone, const std::vector<Vec3>& gradient) {
  std::vector<Vec3> out(mesh.num_vertices());
  for (std::size_t i = 0; i < out.size(); ++i) {
    Vec3 basis[3];
    const int k = constraint_basis(mesh.classes[i], mesh.vertices[i], cone, basis);
    out[i] = project_onto(gradient[i], basis, k);
  }
  return out;
}

ProjectionResult project_to_constraints(const TriMesh& mesh, const PolyhedralCone& cone) {
  ProjectionResult r{mesh, {}};
  const auto st = restore_constraints(r.mesh, cone, boundary_neighbours(mesh));
  if (!st.ok) throw GeometryError("constraint projection failed (vertex collapsed onto the apex)");
  r.pinned = st.pinned;
  return r;
}

std::pair<TriMesh, Diagnostics> minimize(const TriMesh& input, const PolyhedralCone& cone, const MinimizeConfig& config) {
  if (config.max_iters < 0 || !(config.initial_step > 0.0) || !(config.armijo_c > 0.0) || !(config.armijo_c < 1.0) ||
      config.grad_tol < 0.0)
    throw GeometryError("invalid minimizer configuration");
  Diagnostics diag;
  TriMesh mesh = input;
  if (mesh.clamp_radius <= 0.0) mesh.clamp_radius = config.clamp_radius;
  const auto bnb = boundary_neighbours(mesh);
  const auto nb = vertex_neighbours(mesh);
  SobolevMetric metric(mesh);

  if (config.jitter > 0.0) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u(-config.jitter, config.jitter);
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
      if (mesh.classes[i].kind == VertexClass::Kind::Interior) mesh.vertices[i].x() += u(rng);
  }

  double area = ordered_sum(triangle_areas(mesh));
  double step = config.initial_step;
  const double mu = 1.0 / (mesh.clamp_radius * mesh.clamp_radius);
  diag.status = MinimizeStatus::MaxIters;

  for (int it = 0; it < config.max_iters; ++it) {
    const auto grad = area_gradient(mesh);
    const auto pg = projected_gradient(mesh, cone, grad);
    double gmax = 0.0;
    for (const auto& v : pg) gmax = std::max(gmax, v.norm());
    if (gmax <= config.grad_tol) {
      diag.status = MinimizeStatus::Converged;
      break;
    }

    const auto targets = choose_targets(mesh, cone, bnb, grad);
    const Dofs dofs = build_dofs(mesh, targets, cone);
    std::vector<Vec3> dir;
    if (config.metric == MinimizeConfig::Metric::Sobolev) {
      dir = metric.direction(mesh, dofs, grad, mu);
    } else {
      dir.resize(mesh.num_vertices());
      for (std::size_t i = 0; i < dir.size(); ++i)
        dir[i] = -project_onto(grad[i], dofs.basis[i].data(), dofs.count[i]);
    }
    double slope = 0.0;  // -g . d
    for (std::size_t i = 0; i < dir.size(); ++i) slope -= grad[i].dot(dir[i]);
    if (!(slope > 0.0)) {
      diag.status = MinimizeStatus::Stalled;
      diag.message = "no descent direction";
      break;
    }

    std::vector<double> shortest_edge(mesh.num_vertices(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
      for (int w : nb[i]) shortest_edge[i] = std::min(shortest_edge[i], (vtx(mesh, w) - mesh.vertices[i]).norm());
    std::vector<Vec3> old_normals(mesh.num_triangles());
    for (std::size_t i = 0; i < old_normals.size(); ++i) old_normals[i] = tri_normal_unnormalized(mesh, mesh.triangles[i]);

    // Trust region: no vertex may travel more than a fraction of its shortest
    // incident edge in one step.
    double t_cap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dir.size(); ++i) {
      const double len = dir[i].norm();
      if (len > 0.0) t_cap = std::min(t_cap, kMaxTravel * shortest_edge[i] / len);
    }
    bool accepted = false;
    double t = std::min(step, t_cap);
    for (int halving = 0; halving <= kMaxHalvings; ++halving, t *= 0.5) {
      TriMesh trial = mesh;
      trial.classes = targets;
      for (std::size_t i = 0; i < trial.num_vertices(); ++i) trial.vertices[i] += t * dir[i];
      const auto st = restore_constraints(trial, cone, bnb);
      if (!st.ok) continue;
      if (!feasible_trial(trial, cone, old_normals)) continue;
      const double trial_area = ordered_sum(triangle_areas(trial));
      const double threshold = config.armijo_c * t * slope;
      if (trial_area <= area - threshold && trial_area < area) {
        const double area_before = area;
        for (int v : st.pinned) diag.pinned_vertices.push_back(v);
        mesh = std::move(trial);
        area = trial_area;
        accepted = true;
        // Redistribute vertices along the surface as long as the iteration as
        // a whole still meets the sufficient-decrease condition.
        for (double lambda = config.relaxation; lambda > config.relaxation / 16.0; lambda *= 0.5) {
          const auto disp = tangential_umbrella(mesh, cone, nb, bnb);
          TriMesh relaxed = mesh;
          for (std::size_t i = 0; i < relaxed.num_vertices(); ++i) relaxed.vertices[i] += lambda * disp[i];
          if (!restore_constraints(relaxed, cone, bnb).ok || !feasible_trial(relaxed, cone, old_normals)) continue;
          const double relaxed_area = ordered_sum(triangle_areas(relaxed));
          if (relaxed_area <= area_before - threshold && relaxed_area < area_before) {
            mesh = std::move(relaxed);
            area = relaxed_area;
            break;
          }
        }
        diag.armijo_margin.push_back((area_before - area) - threshold);
        break;
      }
    }
    if (!accepted) {
      diag.status = MinimizeStatus::Stalled;
      diag.message = "line search failed after " + std::to_string(kMaxHalvings) + " halvings";
      break;
    }
    diag.iterations = it + 1;
    diag.area_history.push_back(area);
    diag.vertex_distance_history.push_back(vertex_distance(mesh));
    diag.step_history.push_back(t);
    diag.grad_norm_history.push_back(gmax);
    step = std::min(config.initial_step, 2.0 * t);
  }

  std::sort(diag.pinned_vertices.begin(), diag.pinned_vertices.end());
  diag.pinned_vertices.erase(std::unique(diag.pinned_vertices.begin(), diag.pinned_vertices.end()),
                             diag.pinned_vertices.end());

  const double R = mesh.clamp_radius;
  std::vector<double> radii = config.radii;
  if (radii.empty())
    for (int k = 1; k <= 10; ++k) radii.push_back(R * k / 10.0);
  diag.p_ratios = monotonicity_ratio(mesh, radii);
  for (std::size_t k = 0; k + 1 < radii.size(); ++k)
    diag.conical_deviation.push_back({radii[k], radii[k + 1], conical_deviation(mesh, radii[k], radii[k + 1])});
  try {
    diag.boundary_angle_stats = boundary_angle_audit(mesh, cone, 0.2 * R).all;
  } catch (const GeometryError&) {
    diag.boundary_angle_stats = AngleStats{};
  }
  const auto [dmin, dmax] = density_ratio_bounds(mesh, radii);
  diag.density_min = dmin;
  diag.density_max = dmax;
  return {std::move(mesh), std::move(diag)};
}

}  // namespace vskip
