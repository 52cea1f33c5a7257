#include "tubespec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tubespec/error.hpp"

namespace tubespec {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config error";
    case ErrorKind::Geometry: return "geometry error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Budget: return "budget exceeded";
    case ErrorKind::Numerical: return "numerical failure";
    case ErrorKind::BranchAmbiguity: return "branch ambiguity";
    case ErrorKind::SimplicityViolated: return "simplicity violated";
    case ErrorKind::FitUnstable: return "fit unstable";
    case ErrorKind::OrderUncertain: return "order uncertain";
  }
  return "error";
}

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::DirichletWall: return "DirichletWall";
    case BoundaryTag::JunctionSigma: return "JunctionSigma";
    case BoundaryTag::OuterArc: return "OuterArc";
    case BoundaryTag::TubeEnd: return "TubeEnd";
    case BoundaryTag::Interface: return "Interface";
  }
  return "?";
}

BoundaryTag tag_from_string(const std::string& s) {
  if (s == "DirichletWall") return BoundaryTag::DirichletWall;
  if (s == "JunctionSigma") return BoundaryTag::JunctionSigma;
  if (s == "OuterArc") return BoundaryTag::OuterArc;
  if (s == "TubeEnd") return BoundaryTag::TubeEnd;
  if (s == "Interface") return BoundaryTag::Interface;
  throw Error(ErrorKind::Parse, "unknown boundary tag '" + s + "'");
}

Vec2 Curve::point(double t) const {
  if (t <= 0.0) return a;
  if (t >= 1.0) return b;
  if (kind == Kind::Segment) return a + t * (b - a);
  const double phi = phi0 + t * (phi1 - phi0);
  return center + radius * Vec2(std::cos(phi), std::sin(phi));
}

double Curve::length() const {
  if (kind == Kind::Segment) return (b - a).norm();
  return radius * std::abs(phi1 - phi0);
}

void GradingPolicy::validate() const {
  if (!(h_far > 0) || !(h_junction > 0))
    throw Error(ErrorKind::Config, "mesh sizes must be positive");
  if (h_junction > h_far) throw Error(ErrorKind::Config, "h_junction must not exceed h_far");
  if (!(grading_ratio > 1.0) || grading_ratio > 2.0)
    throw Error(ErrorKind::Config, "grading_ratio must lie in (1,2]");
  if (far_slope < 0) throw Error(ErrorKind::Config, "far_slope must be non-negative");
}

double GradingPolicy::size_at(const Vec2& x, const std::vector<Vec2>& anchors) const {
  double h = h_far;
  for (const auto& a : anchors) h = std::min(h, h_junction + (grading_ratio - 1.0) * (x - a).norm());
  if (far_slope > 0) h = std::min(h, std::max(h_junction, far_slope * (1.0 + x.norm())));
  return h;
}

namespace {

Curve segment(Vec2 a, Vec2 b, BoundaryTag tag, bool interior = false) {
  Curve c;
  c.kind = Curve::Kind::Segment;
  c.a = a;
  c.b = b;
  c.tag = tag;
  c.interior = interior;
  return c;
}

// Right half circle of radius r from (0,-r) to (0,r), or the reverse.
Curve half_circle(double r, bool upward, BoundaryTag tag, bool interior = false) {
  Curve c;
  c.kind = Curve::Kind::Arc;
  c.radius = r;
  c.center = Vec2(0, 0);
  const double h = std::numbers::pi / 2;
  c.phi0 = upward ? -h : h;
  c.phi1 = upward ? h : -h;
  c.a = Vec2(0, upward ? -r : r);
  c.b = Vec2(0, upward ? r : -r);
  c.tag = tag;
  c.interior = interior;
  return c;
}

// Flat wall from (0,y0) to (0,y1) broken at the given |x2| levels.
void flat_wall(std::vector<Curve>& out, double y0, double y1, std::vector<double> breaks, BoundaryTag tag) {
  std::vector<double> ys{y0};
  const double s = (y1 > y0) ? 1.0 : -1.0;
  std::vector<double> cand;
  for (double b : breaks) {
    for (double y : {b, -b})
      if ((y - y0) * s > 0 && (y1 - y) * s > 0) cand.push_back(y);
  }
  std::sort(cand.begin(), cand.end(), [s](double p, double q) { return p * s < q * s; });
  for (double y : cand) ys.push_back(y);
  ys.push_back(y1);
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) out.push_back(segment(Vec2(0, ys[i]), Vec2(0, ys[i + 1]), tag));
}

}  // namespace

PiecewiseBoundary build_domain(const DomainSpec& spec) {
  PiecewiseBoundary pb;
  pb.kind = spec.kind;
  const auto wall = BoundaryTag::DirichletWall;

  switch (spec.kind) {
    case DomainKind::Unperturbed:
    case DomainKind::Perturbed: {
      if (!(spec.R0 > 1.0)) throw Error(ErrorKind::Geometry, "R0 must exceed 1");
      if (spec.sigma_halfwidth != 1.0 || spec.tube_length != 1.0)
        throw Error(ErrorKind::Geometry, "sigma_halfwidth and tube_length are fixed to 1");
      const double R0 = spec.R0;
      pb.outer_radius = R0;
      pb.curves.push_back(half_circle(R0, true, wall));
      if (spec.kind == DomainKind::Unperturbed) {
        pb.curves.push_back(segment(Vec2(0, R0), Vec2(0, -R0), wall));
        pb.anchors = {Vec2(0, 0)};
        break;
      }
      const double e = spec.eps;
      if (!(e > 0.0) || e > 1.0) throw Error(ErrorKind::Geometry, "eps must lie in (0,1]");
      if (e >= R0) throw Error(ErrorKind::Geometry, "eps must be smaller than R0");
      const double L = spec.tube_length;
      pb.curves.push_back(segment(Vec2(0, R0), Vec2(0, e), wall));
      pb.curves.push_back(segment(Vec2(0, e), Vec2(-L, e), wall));
      pb.curves.push_back(segment(Vec2(-L, e), Vec2(-L, -e), BoundaryTag::TubeEnd));
      pb.curves.push_back(segment(Vec2(-L, -e), Vec2(0, -e), wall));
      pb.curves.push_back(segment(Vec2(0, -e), Vec2(0, -R0), wall));
      pb.curves.push_back(segment(Vec2(0, -e), Vec2(0, e), BoundaryTag::JunctionSigma, true));
      pb.anchors = {Vec2(0, e), Vec2(0, -e)};
      break;
    }
    case DomainKind::ExteriorTruncated: {
      const double R = spec.R_trunc;
      if (!(R > 1.0)) throw Error(ErrorKind::Geometry, "R_trunc must exceed 1");
      if (!(spec.exterior_tube_length > 0)) throw Error(ErrorKind::Geometry, "tube length must be positive");
      std::vector<double> radii;
      for (double rho : spec.interface_radii) {
        if (!(rho > 1.0) || !(rho < R)) throw Error(ErrorKind::Geometry, "interface radius outside (1, R_trunc)");
        radii.push_back(rho);
      }
      std::sort(radii.begin(), radii.end());
      radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
      const double L = spec.exterior_tube_length;
      pb.outer_radius = R;
      pb.curves.push_back(half_circle(R, true, BoundaryTag::OuterArc));
      flat_wall(pb.curves, R, 1.0, radii, wall);
      pb.curves.push_back(segment(Vec2(0, 1), Vec2(-L, 1), wall));
      pb.curves.push_back(segment(Vec2(-L, 1), Vec2(-L, -1), BoundaryTag::TubeEnd));
      pb.curves.push_back(segment(Vec2(-L, -1), Vec2(0, -1), wall));
      flat_wall(pb.curves, -1.0, -R, radii, wall);
      pb.curves.push_back(segment(Vec2(0, -1), Vec2(0, 1), BoundaryTag::JunctionSigma, true));
      for (double rho : radii) pb.curves.push_back(half_circle(rho, true, BoundaryTag::Interface, true));
      pb.anchors = {Vec2(0, 1), Vec2(0, -1)};
      break;
    }
    case DomainKind::HalfBall: {
      const double R = spec.R_trunc;
      if (!(R > 0.0)) throw Error(ErrorKind::Geometry, "half-ball radius must be positive");
      const double s = spec.slit_halfwidth;
      if (s < 0.0 || s >= R) throw Error(ErrorKind::Geometry, "slit half-width must lie in [0, R)");
      std::vector<double> radii;
      for (double rho : spec.interface_radii) {
        if (!(rho > s) || !(rho < R)) throw Error(ErrorKind::Geometry, "interface radius outside (slit, R)");
        radii.push_back(rho);
      }
      std::sort(radii.begin(), radii.end());
      radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
      pb.outer_radius = R;
      pb.curves.push_back(half_circle(R, true, BoundaryTag::OuterArc));
      if (s > 0.0) {
        flat_wall(pb.curves, R, s, radii, wall);
        pb.curves.push_back(segment(Vec2(0, s), Vec2(0, -s), BoundaryTag::JunctionSigma));
        flat_wall(pb.curves, -s, -R, radii, wall);
        pb.anchors = {Vec2(0, s), Vec2(0, -s)};
      } else {
        flat_wall(pb.curves, R, -R, radii, wall);
        pb.anchors = {Vec2(0, 0)};
      }
      for (double rho : radii) pb.curves.push_back(half_circle(rho, true, BoundaryTag::Interface, true));
      break;
    }
  }
  return pb;
}

}  // namespace tubespec
