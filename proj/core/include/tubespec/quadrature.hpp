#pragma once

#include <array>
#include <vector>

#include "tubespec/geometry.hpp"
#include "tubespec/mesh.hpp"

namespace tubespec {

// Weights sum to 1; integrals are area * sum w f(x).
struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> w;
  int degree = 0;
};

// Symmetric rules of degree 1, 2, 4, 6 (the next available degree is used).
const TriangleRule& triangle_rule(int degree);

struct GaussRule {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

GaussRule gauss_legendre(int n);

struct QuadPoint {
  Vec2 x;
  double w;
  int elem;  // element whose polynomial is evaluated (may lie just outside for clipped points)
};

struct ClippedRule {
  double r = 0;
  std::vector<QuadPoint> area;
  std::vector<QuadPoint> arc;  // on S_r^+, ordered by polar angle from the x2-axis
  double area_sum() const;
  double arc_sum() const;
};

struct ClipOptions {
  int degree = 6;
  bool include_tube = true;  // triangles with centroid x1 < 0 are kept whole
  int arc_panels = 64;
  int arc_points = 8;
};

// Quadrature for {|x| < r, x1 > 0} ∪ tube on the mesh and for the arc S_r^+.
ClippedRule clip_quadrature(const Mesh& mesh, double r, const ClipOptions& opts = {});

// Exact full-element rule over all triangles.
std::vector<QuadPoint> mesh_rule(const Mesh& mesh, int degree);

}  // namespace tubespec
