#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "tubespec/geometry.hpp"

namespace tubespec {

enum class ElementOrder { P1, P2 };

struct TaggedEdge {
  int a = 0, b = 0;
  BoundaryTag tag = BoundaryTag::DirichletWall;
  double arc_radius = 0.0;  // > 0 when the edge is a chord of an origin-centred circle
};

class Mesh {
 public:
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<TaggedEdge> boundary_edges;
  std::vector<TaggedEdge> interface_edges;
  ElementOrder order = ElementOrder::P1;

  // Filled by build_topology(). For P2 the node of edge e is vertices.size() + e.
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> tri_edges;  // edges (v0,v1), (v1,v2), (v2,v0)
  std::vector<std::array<int, 2>> edge_tris;  // -1 when on the boundary

  void build_topology();
  void set_order(ElementOrder o);

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_dofs() const;
  int dofs_per_element() const { return order == ElementOrder::P2 ? 6 : 3; }
  std::array<int, 6> element_dofs(int t) const;
  Vec2 node(int i) const;
  std::vector<Vec2> nodes() const;

  int find_edge(int a, int b) const;  // -1 if absent
  std::vector<int> dofs_on_edges(const std::vector<TaggedEdge>& es) const;
  std::vector<int> boundary_dofs(const std::vector<BoundaryTag>& tags) const;
  std::vector<TaggedEdge> edges_with_tag(BoundaryTag tag) const;  // boundary and interface
  bool has_tag(BoundaryTag tag) const;

  double area() const;
  double triangle_area(int t) const;
  double max_diameter() const;
  double max_aspect_ratio() const;

 private:
  std::unordered_map<std::uint64_t, int> edge_index_;
};

struct MeshCheck {
  bool positive_orientation = true;
  bool conforming = true;
  bool boundary_closed = true;
  bool boundary_tagged = true;
  double max_arc_deviation = 0.0;
  std::string message;
  bool ok() const { return positive_orientation && conforming && boundary_closed && boundary_tagged; }
};

MeshCheck check_mesh(const Mesh& mesh);

struct SubMesh {
  Mesh mesh;
  std::vector<int> vertex_map;  // new vertex -> old vertex
  std::vector<int> dof_map;     // new dof -> old dof
};

// Keeps triangles for which keep(t) holds. Interior tagged edges that end up on the
// boundary are re-tagged with retag(tag); untagged cut edges become DirichletWall.
SubMesh extract_submesh(const Mesh& mesh, const std::function<bool(int)>& keep,
                        const std::function<BoundaryTag(BoundaryTag)>& retag);

// Red refinement. With project_arcs, new vertices on arc edges go onto the circle.
Mesh refine_uniform(const Mesh& mesh, bool project_arcs);

void write_mesh(const Mesh& mesh, std::ostream& os);
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& is);
Mesh read_mesh(const std::string& path);

// Bucket grid over triangle bounding boxes.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  // Returns the triangle containing x (within tol in barycentric terms) or -1.
  int locate(const Vec2& x, double tol = 1e-10) const;
  // Best candidate near x even when x lies slightly outside the mesh.
  int locate_nearest(const Vec2& x) const;
  static std::array<double, 3> barycentric(const Mesh& mesh, int t, const Vec2& x);

 private:
  const Mesh* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double dx_ = 1, dy_ = 1;
  std::vector<int> start_;
  std::vector<int> items_;
};

}  // namespace tubespec
