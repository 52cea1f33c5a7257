#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tubespec {

using Vec2 = Eigen::Vector2d;

enum class DomainKind { Unperturbed, Perturbed, ExteriorTruncated, HalfBall };

// Interface marks interior arcs carried inside exterior meshes (r = const).
enum class BoundaryTag { DirichletWall, JunctionSigma, OuterArc, TubeEnd, Interface };

const char* to_string(BoundaryTag tag);
BoundaryTag tag_from_string(const std::string& s);

struct DomainSpec {
  DomainKind kind = DomainKind::Unperturbed;
  double R0 = 2.0;
  double sigma_halfwidth = 1.0;
  double eps = 0.0;
  double tube_length = 1.0;
  double R_trunc = 0.0;
  // Extensions. The exterior tube stands in for the semi-infinite one.
  double exterior_tube_length = 4.0;
  std::vector<double> interface_radii;
  double slit_halfwidth = 0.0;  // HalfBall: free part |x2| < slit of the flat wall
};

// Straight segment or circular arc; arcs are parametrized by the standard polar angle.
struct Curve {
  enum class Kind { Segment, Arc };
  Kind kind = Kind::Segment;
  Vec2 a{0, 0}, b{0, 0};
  Vec2 center{0, 0};
  double radius = 0.0;
  double phi0 = 0.0, phi1 = 0.0;
  BoundaryTag tag = BoundaryTag::DirichletWall;
  bool interior = false;

  Vec2 point(double t) const;  // t in [0,1], endpoints returned exactly
  double length() const;
};

struct PiecewiseBoundary {
  std::vector<Curve> curves;  // closed loops first (ccw), interior curves flagged
  std::vector<Vec2> anchors;
  double outer_radius = 0.0;
  DomainKind kind = DomainKind::Unperturbed;
};

struct GradingPolicy {
  double h_far = 0.05;
  double h_junction = 0.05;
  double grading_ratio = 1.5;
  double far_slope = 0.0;  // when > 0, size also capped by far_slope*(1+|x|)

  void validate() const;
  double size_at(const Vec2& x, const std::vector<Vec2>& anchors) const;
};

PiecewiseBoundary build_domain(const DomainSpec& spec);

}  // namespace tubespec
