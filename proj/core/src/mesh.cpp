#include "tubespec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "tubespec/error.hpp"

namespace tubespec {
namespace {

std::uint64_t key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

void Mesh::build_topology() {
  edges.clear();
  tri_edges.assign(triangles.size(), {0, 0, 0});
  edge_tris.clear();
  edge_index_.clear();
  edge_index_.reserve(triangles.size() * 2);
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& v = triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int a = v[i], b = v[(i + 1) % 3];
      auto [it, fresh] = edge_index_.try_emplace(key(a, b), static_cast<int>(edges.size()));
      if (fresh) {
        edges.push_back({std::min(a, b), std::max(a, b)});
        edge_tris.push_back({t, -1});
      } else {
        edge_tris[it->second][1] = t;
      }
      tri_edges[t][i] = it->second;
    }
  }
}

void Mesh::set_order(ElementOrder o) {
  order = o;
  build_topology();
}

int Mesh::num_dofs() const {
  return num_vertices() + (order == ElementOrder::P2 ? static_cast<int>(edges.size()) : 0);
}

std::array<int, 6> Mesh::element_dofs(int t) const {
  const auto& v = triangles[t];
  std::array<int, 6> d{v[0], v[1], v[2], -1, -1, -1};
  if (order == ElementOrder::P2) {
    const int nv = num_vertices();
    for (int i = 0; i < 3; ++i) d[3 + i] = nv + tri_edges[t][i];
  }
  return d;
}

Vec2 Mesh::node(int i) const {
  if (i < num_vertices()) return vertices[i];
  const auto& e = edges[i - num_vertices()];
  return 0.5 * (vertices[e[0]] + vertices[e[1]]);
}

std::vector<Vec2> Mesh::nodes() const {
  std::vector<Vec2> out;
  out.reserve(num_dofs());
  for (int i = 0; i < num_dofs(); ++i) out.push_back(node(i));
  return out;
}

int Mesh::find_edge(int a, int b) const {
  auto it = edge_index_.find(key(a, b));
  return it == edge_index_.end() ? -1 : it->second;
}

std::vector<int> Mesh::dofs_on_edges(const std::vector<TaggedEdge>& es) const {
  std::vector<int> out;
  for (const auto& e : es) {
    out.push_back(e.a);
    out.push_back(e.b);
    if (order == ElementOrder::P2) {
      const int id = find_edge(e.a, e.b);
      if (id >= 0) out.push_back(num_vertices() + id);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> Mesh::boundary_dofs(const std::vector<BoundaryTag>& tags) const {
  std::vector<TaggedEdge> es;
  for (const auto& e : boundary_edges)
    if (std::find(tags.begin(), tags.end(), e.tag) != tags.end()) es.push_back(e);
  return dofs_on_edges(es);
}

std::vector<TaggedEdge> Mesh::edges_with_tag(BoundaryTag tag) const {
  std::vector<TaggedEdge> out;
  for (const auto& e : boundary_edges)
    if (e.tag == tag) out.push_back(e);
  for (const auto& e : interface_edges)
    if (e.tag == tag) out.push_back(e);
  return out;
}

bool Mesh::has_tag(BoundaryTag tag) const { return !edges_with_tag(tag).empty(); }

double Mesh::triangle_area(int t) const {
  const auto& v = triangles[t];
  return 0.5 * cross(vertices[v[1]] - vertices[v[0]], vertices[v[2]] - vertices[v[0]]);
}

double Mesh::area() const {
  double a = 0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

double Mesh::max_diameter() const {
  double d = 0;
  for (const auto& v : triangles)
    for (int i = 0; i < 3; ++i) d = std::max(d, (vertices[v[i]] - vertices[v[(i + 1) % 3]]).norm());
  return d;
}

// longest edge over shortest altitude
double Mesh::max_aspect_ratio() const {
  double worst = 0;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& v = triangles[t];
    double lmax = 0;
    for (int i = 0; i < 3; ++i) lmax = std::max(lmax, (vertices[v[i]] - vertices[v[(i + 1) % 3]]).norm());
    const double hmin = 2.0 * triangle_area(t) / lmax;
    worst = std::max(worst, lmax / hmin);
  }
  return worst;
}

MeshCheck check_mesh(const Mesh& mesh) {
  MeshCheck c;
  std::ostringstream msg;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (!(mesh.triangle_area(t) > 0)) {
      c.positive_orientation = false;
      msg << "triangle " << t << " not positively oriented; ";
      break;
    }
  std::map<std::uint64_t, int> count;
  for (const auto& v : mesh.triangles)
    for (int i = 0; i < 3; ++i) count[key(v[i], v[(i + 1) % 3])]++;
  std::map<std::uint64_t, int> tagged;
  for (const auto& e : mesh.boundary_edges) tagged[key(e.a, e.b)]++;
  std::map<int, int> degree;
  for (const auto& [k, n] : count) {
    if (n > 2) {
      c.conforming = false;
      msg << "edge shared by more than two triangles; ";
    }
    if (n == 1) {
      auto it = tagged.find(k);
      if (it == tagged.end() || it->second != 1) {
        c.boundary_tagged = false;
        msg << "boundary edge without exactly one tag; ";
      }
      degree[static_cast<int>(k >> 32)]++;
      degree[static_cast<int>(k & 0xffffffffu)]++;
    }
  }
  for (const auto& [k, n] : tagged) {
    auto it = count.find(k);
    if (it == count.end() || it->second != 1) {
      c.boundary_tagged = false;
      msg << "tagged boundary edge is not on the boundary; ";
      break;
    }
  }
  for (const auto& [v, d] : degree)
    if (d % 2 != 0) {
      c.boundary_closed = false;
      msg << "boundary not closed at vertex " << v << "; ";
      break;
    }
  for (const auto* list : {&mesh.boundary_edges, &mesh.interface_edges})
    for (const auto& e : *list) {
      if (e.arc_radius <= 0) continue;
      for (int v : {e.a, e.b})
        c.max_arc_deviation =
            std::max(c.max_arc_deviation, std::abs(mesh.vertices[v].norm() - e.arc_radius) / e.arc_radius);
    }
  c.message = msg.str();
  return c;
}

SubMesh extract_submesh(const Mesh& mesh, const std::function<bool(int)>& keep,
                        const std::function<BoundaryTag(BoundaryTag)>& retag) {
  SubMesh sm;
  std::vector<int> vmap(mesh.num_vertices(), -1);
  std::vector<char> kept(mesh.num_triangles(), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!keep(t)) continue;
    kept[t] = 1;
    std::array<int, 3> nt{};
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.triangles[t][i];
      if (vmap[v] < 0) {
        vmap[v] = static_cast<int>(sm.vertex_map.size());
        sm.vertex_map.push_back(v);
        sm.mesh.vertices.push_back(mesh.vertices[v]);
      }
      nt[i] = vmap[v];
    }
    sm.mesh.triangles.push_back(nt);
  }
  std::map<std::uint64_t, const TaggedEdge*> btag, itag;
  for (const auto& e : mesh.boundary_edges) btag[key(e.a, e.b)] = &e;
  for (const auto& e : mesh.interface_edges) itag[key(e.a, e.b)] = &e;

  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    const auto [t0, t1] = mesh.edge_tris[e];
    const int k0 = (t0 >= 0 && kept[t0]) ? 1 : 0;
    const int k1 = (t1 >= 0 && kept[t1]) ? 1 : 0;
    if (k0 + k1 == 0) continue;
    const int a = mesh.edges[e][0], b = mesh.edges[e][1];
    // orient along the kept triangle so loops stay consistent
    const int owner = k0 ? t0 : t1;
    int oa = a, ob = b;
    for (int i = 0; i < 3; ++i)
      if (mesh.triangles[owner][i] == b && mesh.triangles[owner][(i + 1) % 3] == a) std::swap(oa, ob);
    TaggedEdge ne;
    ne.a = vmap[oa];
    ne.b = vmap[ob];
    const auto k = key(a, b);
    if (k0 + k1 == 1) {
      if (auto it = btag.find(k); it != btag.end()) {
        ne.tag = it->second->tag;
        ne.arc_radius = it->second->arc_radius;
      } else if (auto jt = itag.find(k); jt != itag.end()) {
        ne.tag = retag(jt->second->tag);
        ne.arc_radius = jt->second->arc_radius;
      } else {
        ne.tag = BoundaryTag::DirichletWall;
      }
      sm.mesh.boundary_edges.push_back(ne);
    } else if (auto jt = itag.find(k); jt != itag.end()) {
      ne.tag = jt->second->tag;
      ne.arc_radius = jt->second->arc_radius;
      sm.mesh.interface_edges.push_back(ne);
    }
  }
  sm.mesh.set_order(mesh.order);
  sm.dof_map = sm.vertex_map;
  if (mesh.order == ElementOrder::P2) {
    const int nv_old = mesh.num_vertices();
    for (const auto& e : sm.mesh.edges) {
      const int old = mesh.find_edge(sm.vertex_map[e[0]], sm.vertex_map[e[1]]);
      sm.dof_map.push_back(nv_old + old);
    }
  }
  return sm;
}

Mesh refine_uniform(const Mesh& mesh, bool project_arcs) {
  Mesh out;
  const int nv = mesh.num_vertices();
  out.vertices = mesh.vertices;
  std::map<std::uint64_t, double> radius;
  for (const auto* list : {&mesh.boundary_edges, &mesh.interface_edges})
    for (const auto& e : *list)
      if (e.arc_radius > 0) radius[key(e.a, e.b)] = e.arc_radius;
  for (const auto& e : mesh.edges) {
    Vec2 m = 0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]]);
    if (project_arcs) {
      auto it = radius.find(key(e[0], e[1]));
      if (it != radius.end()) m *= it->second / m.norm();
    }
    out.vertices.push_back(m);
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t];
    const int m01 = nv + mesh.tri_edges[t][0];
    const int m12 = nv + mesh.tri_edges[t][1];
    const int m20 = nv + mesh.tri_edges[t][2];
    out.triangles.push_back({v[0], m01, m20});
    out.triangles.push_back({m01, v[1], m12});
    out.triangles.push_back({m20, m12, v[2]});
    out.triangles.push_back({m01, m12, m20});
  }
  auto split = [&](const std::vector<TaggedEdge>& in, std::vector<TaggedEdge>& dst) {
    for (const auto& e : in) {
      const int m = nv + mesh.find_edge(e.a, e.b);
      dst.push_back({e.a, m, e.tag, e.arc_radius});
      dst.push_back({m, e.b, e.tag, e.arc_radius});
    }
  };
  split(mesh.boundary_edges, out.boundary_edges);
  split(mesh.interface_edges, out.interface_edges);
  out.set_order(mesh.order);
  return out;
}

void write_mesh(const Mesh& mesh, std::ostream& os) {
  os << "tubespec-mesh v1\n";
  os << "order " << (mesh.order == ElementOrder::P2 ? "P2" : "P1") << "\n";
  const int nm = mesh.order == ElementOrder::P2 ? static_cast<int>(mesh.edges.size()) : 0;
  os << mesh.num_vertices() << " " << mesh.num_triangles() << " "
     << mesh.boundary_edges.size() + mesh.interface_edges.size() << " " << nm << "\n";
  os << std::setprecision(17);
  for (int i = 0; i < mesh.num_vertices() + nm; ++i) {
    const Vec2 p = mesh.node(i);
    os << p.x() << " " << p.y() << "\n";
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto d = mesh.element_dofs(t);
    os << d[0] << " " << d[1] << " " << d[2];
    if (nm > 0) os << " " << d[3] << " " << d[4] << " " << d[5];
    os << "\n";
  }
  for (const auto* list : {&mesh.boundary_edges, &mesh.interface_edges})
    for (const auto& e : *list) os << e.a << " " << e.b << " " << to_string(e.tag) << "\n";
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Config, "cannot open '" + path + "' for writing");
  write_mesh(mesh, f);
}

Mesh read_mesh(std::istream& is) {
  auto fail = [](const std::string& m) { return Error(ErrorKind::Parse, "mesh: " + m); };
  std::string line;
  if (!std::getline(is, line) || line != "tubespec-mesh v1") throw fail("bad header");
  if (!std::getline(is, line)) throw fail("missing order line");
  Mesh mesh;
  if (line == "order P1")
    mesh.order = ElementOrder::P1;
  else if (line == "order P2")
    mesh.order = ElementOrder::P2;
  else
    throw fail("bad order line");
  long nv = -1, nt = -1, nb = -1, nm = -1;
  if (!std::getline(is, line)) throw fail("missing counts");
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nt >> nb >> nm) || nv < 0 || nt < 0 || nb < 0 || nm < 0) throw fail("bad counts");
  }
  if ((mesh.order == ElementOrder::P1) != (nm == 0)) throw fail("midpoint count inconsistent with order");
  std::vector<Vec2> all;
  for (long i = 0; i < nv + nm; ++i) {
    if (!std::getline(is, line)) throw fail("truncated vertex block");
    std::istringstream ss(line);
    double x, y;
    if (!(ss >> x >> y) || !std::isfinite(x) || !std::isfinite(y)) throw fail("bad vertex line");
    all.push_back(Vec2(x, y));
  }
  mesh.vertices.assign(all.begin(), all.begin() + nv);
  const int per = mesh.order == ElementOrder::P2 ? 6 : 3;
  std::vector<std::array<int, 6>> tri_nodes;
  for (long t = 0; t < nt; ++t) {
    if (!std::getline(is, line)) throw fail("truncated triangle block");
    std::istringstream ss(line);
    std::array<int, 6> d{-1, -1, -1, -1, -1, -1};
    for (int i = 0; i < per; ++i)
      if (!(ss >> d[i]) || d[i] < 0 || d[i] >= (i < 3 ? nv : nv + nm)) throw fail("bad triangle line");
    mesh.triangles.push_back({d[0], d[1], d[2]});
    tri_nodes.push_back(d);
  }
  std::vector<TaggedEdge> tagged;
  for (long i = 0; i < nb; ++i) {
    if (!std::getline(is, line)) throw fail("truncated boundary block");
    std::istringstream ss(line);
    TaggedEdge e;
    std::string tag;
    if (!(ss >> e.a >> e.b >> tag) || e.a < 0 || e.b < 0 || e.a >= nv || e.b >= nv) throw fail("bad boundary line");
    e.tag = tag_from_string(tag);
    tagged.push_back(e);
  }
  mesh.build_topology();
  if (per == 6) {
    if (static_cast<long>(mesh.edges.size()) != nm) throw fail("midpoint count does not match edges");
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto d = mesh.element_dofs(t);
      for (int i = 3; i < 6; ++i)
        if (d[i] != tri_nodes[t][i]) throw fail("midpoint numbering inconsistent");
    }
  }
  for (auto& e : tagged) {
    const int id = mesh.find_edge(e.a, e.b);
    if (id < 0) throw fail("boundary line is not a mesh edge");
    const Vec2& pa = mesh.vertices[e.a];
    const Vec2& pb = mesh.vertices[e.b];
    const double ra = pa.norm(), rb = pb.norm();
    if (pa.x() > 0 && pb.x() > 0 && std::abs(ra - rb) <= 1e-12 * std::max(ra, rb)) e.arc_radius = ra;
    const bool interior = mesh.edge_tris[id][1] >= 0;
    (interior ? mesh.interface_edges : mesh.boundary_edges).push_back(e);
  }
  const MeshCheck c = check_mesh(mesh);
  if (!c.ok()) throw fail("invalid mesh: " + c.message);
  return mesh;
}

Mesh read_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Parse, "cannot open mesh file '" + path + "'");
  return read_mesh(f);
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  lo_ = Vec2(1e300, 1e300);
  hi_ = Vec2(-1e300, -1e300);
  for (const auto& v : mesh.vertices) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
  const double w = std::max(hi_.x() - lo_.x(), 1e-300), h = std::max(hi_.y() - lo_.y(), 1e-300);
  const double cells = std::max(1.0, mesh.num_triangles() / 2.0);
  nx_ = std::max(1, static_cast<int>(std::sqrt(cells * w / h)));
  ny_ = std::max(1, static_cast<int>(cells / nx_));
  nx_ = std::min(nx_, 4096);
  ny_ = std::min(ny_, 4096);
  dx_ = w / nx_;
  dy_ = h / ny_;
  std::vector<int> count(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  auto range = [&](int t, int& i0, int& i1, int& j0, int& j1) {
    Vec2 a(1e300, 1e300), b(-1e300, -1e300);
    for (int v : mesh.triangles[t]) {
      a = a.cwiseMin(mesh.vertices[v]);
      b = b.cwiseMax(mesh.vertices[v]);
    }
    i0 = std::clamp(static_cast<int>((a.x() - lo_.x()) / dx_), 0, nx_ - 1);
    i1 = std::clamp(static_cast<int>((b.x() - lo_.x()) / dx_), 0, nx_ - 1);
    j0 = std::clamp(static_cast<int>((a.y() - lo_.y()) / dy_), 0, ny_ - 1);
    j1 = std::clamp(static_cast<int>((b.y() - lo_.y()) / dy_), 0, ny_ - 1);
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    int i0, i1, j0, j1;
    range(t, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) count[static_cast<std::size_t>(j) * nx_ + i + 1]++;
  }
  for (std::size_t k = 1; k < count.size(); ++k) count[k] += count[k - 1];
  start_ = count;
  items_.assign(count.back(), 0);
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    int i0, i1, j0, j1;
    range(t, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) items_[fill[static_cast<std::size_t>(j) * nx_ + i]++] = t;
  }
}

std::array<double, 3> PointLocator::barycentric(const Mesh& mesh, int t, const Vec2& x) {
  const auto& v = mesh.triangles[t];
  const Vec2& a = mesh.vertices[v[0]];
  const Vec2& b = mesh.vertices[v[1]];
  const Vec2& c = mesh.vertices[v[2]];
  const double det = cross(b - a, c - a);
  const double l1 = cross(x - a, c - a) / det;
  const double l2 = cross(b - a, x - a) / det;
  return {1.0 - l1 - l2, l1, l2};
}

int PointLocator::locate(const Vec2& x, double tol) const {
  if (x.x() < lo_.x() - dx_ || x.x() > hi_.x() + dx_ || x.y() < lo_.y() - dy_ || x.y() > hi_.y() + dy_) return -1;
  const int i = std::clamp(static_cast<int>((x.x() - lo_.x()) / dx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((x.y() - lo_.y()) / dy_), 0, ny_ - 1);
  const std::size_t c = static_cast<std::size_t>(j) * nx_ + i;
  int best = -1;
  double best_min = -1e300;
  for (int k = start_[c]; k < start_[c + 1]; ++k) {
    const int t = items_[k];
    const auto l = barycentric(*mesh_, t, x);
    const double m = std::min({l[0], l[1], l[2]});
    if (m > best_min) {
      best_min = m;
      best = t;
    }
  }
  return best_min >= -tol ? best : -1;
}

int PointLocator::locate_nearest(const Vec2& x) const {
  const int i = std::clamp(static_cast<int>((x.x() - lo_.x()) / dx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((x.y() - lo_.y()) / dy_), 0, ny_ - 1);
  int best = -1;
  double best_min = -1e300;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const int ii = i + di, jj = j + dj;
      if (ii < 0 || jj < 0 || ii >= nx_ || jj >= ny_) continue;
      const std::size_t c = static_cast<std::size_t>(jj) * nx_ + ii;
      for (int k = start_[c]; k < start_[c + 1]; ++k) {
        const int t = items_[k];
        const auto l = barycentric(*mesh_, t, x);
        const double m = std::min({l[0], l[1], l[2]});
        if (m > best_min) {
          best_min = m;
          best = t;
        }
      }
    }
  return best;
}

}  // namespace tubespec
