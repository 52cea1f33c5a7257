#pragma once

#include <cstddef>

#include "tubespec/geometry.hpp"
#include "tubespec/mesh.hpp"

namespace tubespec {

struct MeshOptions {
  GradingPolicy policy;
  ElementOrder order = ElementOrder::P2;
  std::size_t element_budget = 2000000;
  double min_angle_ratio = 1.4142135623730951;  // circumradius / shortest edge bound
};

// Conforming Delaunay refinement of the region bounded by the closed curves.
Mesh generate_mesh(const PiecewiseBoundary& boundary, const MeshOptions& opts);
Mesh generate_mesh(const PiecewiseBoundary& boundary, const GradingPolicy& policy, ElementOrder order);

}  // namespace tubespec
