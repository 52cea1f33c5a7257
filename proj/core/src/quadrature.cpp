#include "tubespec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tubespec/error.hpp"

namespace tubespec {
namespace {

TriangleRule make_rule(int degree) {
  TriangleRule r;
  r.degree = degree;
  auto orbit3 = [&](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    r.bary.push_back({b, a, a});
    r.bary.push_back({a, b, a});
    r.bary.push_back({a, a, b});
    for (int i = 0; i < 3; ++i) r.w.push_back(w);
  };
  auto orbit6 = [&](double a, double b, double w) {
    const double c = 1.0 - a - b;
    for (const auto& p : {std::array<double, 3>{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}) {
      r.bary.push_back(p);
      r.w.push_back(w);
    }
  };
  switch (degree) {
    case 1:
      r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
      r.w.push_back(1.0);
      break;
    case 2:
      orbit3(1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      orbit3(0.445948490915965, 0.223381589678011);
      orbit3(0.091576213509771, 0.109951743655322);
      break;
    case 6:
      orbit3(0.249286745170910, 0.116786275726379);
      orbit3(0.063089014491502, 0.050844906370207);
      orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374);
      break;
    default:
      break;
  }
  return r;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double dist_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static const TriangleRule r1 = make_rule(1), r2 = make_rule(2), r4 = make_rule(4), r6 = make_rule(6);
  if (degree <= 1) return r1;
  if (degree <= 2) return r2;
  if (degree <= 4) return r4;
  if (degree <= 6) return r6;
  throw Error(ErrorKind::Numerical, "triangle rule degree above 6 not available");
}

GaussRule gauss_legendre(int n) {
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    g.x[i] = x;
    g.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  std::reverse(g.x.begin(), g.x.end());
  std::reverse(g.w.begin(), g.w.end());
  return g;
}

double ClippedRule::area_sum() const {
  double s = 0;
  for (const auto& q : area) s += q.w;
  return s;
}

double ClippedRule::arc_sum() const {
  double s = 0;
  for (const auto& q : arc) s += q.w;
  return s;
}

std::vector<QuadPoint> mesh_rule(const Mesh& mesh, int degree) {
  const TriangleRule& tr = triangle_rule(degree);
  std::vector<QuadPoint> out;
  out.reserve(mesh.num_triangles() * tr.w.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t];
    const double A = mesh.triangle_area(t);
    for (std::size_t q = 0; q < tr.w.size(); ++q) {
      const auto& l = tr.bary[q];
      const Vec2 x = l[0] * mesh.vertices[v[0]] + l[1] * mesh.vertices[v[1]] + l[2] * mesh.vertices[v[2]];
      out.push_back({x, A * tr.w[q], t});
    }
  }
  return out;
}

ClippedRule clip_quadrature(const Mesh& mesh, double r, const ClipOptions& opts) {
  double outer = 0;
  for (const auto& v : mesh.vertices) outer = std::max(outer, v.norm());
  if (!(r > 0) || r >= outer) throw Error(ErrorKind::Geometry, "clip radius must lie in (0, outer radius)");

  ClippedRule rule;
  rule.r = r;
  const TriangleRule& tr = triangle_rule(opts.degree);
  const int ns = (opts.degree + 3) / 2;
  const int nt_poly = (opts.degree + 2) / 2;
  const GaussRule gs = gauss_legendre(ns);
  const GaussRule gt_poly = gauss_legendre(nt_poly);
  const GaussRule gt_arc = gauss_legendre(16);

  // wedge (0, a, b) ∩ {|x| < r}, signed by a x b
  auto wedge = [&](const Vec2& a, const Vec2& b, int elem) {
    const double J = cross(a, b);
    if (J == 0.0) return;
    const Vec2 d = b - a;
    const double A = d.squaredNorm(), B = 2.0 * a.dot(d), C = a.squaredNorm() - r * r;
    std::vector<double> cuts{0.0};
    const double disc = B * B - 4 * A * C;
    if (disc > 0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)})
        if (t > 0 && t < 1) cuts.push_back(t);
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double t0 = cuts[k], t1 = cuts[k + 1];
      if (t1 - t0 <= 0) continue;
      const double tm = 0.5 * (t0 + t1);
      const bool inside = (a + tm * d).norm() <= r;
      const GaussRule& gt = inside ? gt_poly : gt_arc;
      for (std::size_t i = 0; i < gt.x.size(); ++i) {
        const double t = tm + 0.5 * (t1 - t0) * gt.x[i];
        const double wt = 0.5 * (t1 - t0) * gt.w[i];
        const Vec2 q = a + t * d;
        const double smax = inside ? 1.0 : std::min(1.0, r / q.norm());
        for (std::size_t j = 0; j < gs.x.size(); ++j) {
          const double s = 0.5 * smax * (1.0 + gs.x[j]);
          const double ws = 0.5 * smax * gs.w[j];
          rule.area.push_back({s * q, wt * ws * s * J, elem});
        }
      }
    }
  };

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t];
    const Vec2& p0 = mesh.vertices[v[0]];
    const Vec2& p1 = mesh.vertices[v[1]];
    const Vec2& p2 = mesh.vertices[v[2]];
    const Vec2 cen = (p0 + p1 + p2) / 3.0;
    const bool tube = cen.x() < 0;
    if (tube && !opts.include_tube) continue;
    const double rmax = std::max({p0.norm(), p1.norm(), p2.norm()});
    if (tube || rmax <= r) {
      const double A = mesh.triangle_area(t);
      for (std::size_t q = 0; q < tr.w.size(); ++q) {
        const auto& l = tr.bary[q];
        rule.area.push_back({l[0] * p0 + l[1] * p1 + l[2] * p2, A * tr.w[q], t});
      }
      continue;
    }
    const Vec2 o(0, 0);
    const bool contains = cross(p1 - p0, o - p0) >= 0 && cross(p2 - p1, o - p1) >= 0 && cross(p0 - p2, o - p2) >= 0;
    const double dmin = contains ? 0.0
                                 : std::min({dist_to_segment(o, p0, p1), dist_to_segment(o, p1, p2),
                                             dist_to_segment(o, p2, p0)});
    if (dmin >= r) continue;
    wedge(p0, p1, t);
    wedge(p1, p2, t);
    wedge(p2, p0, t);
  }

  PointLocator loc(mesh);
  const GaussRule ga = gauss_legendre(opts.arc_points);
  const double dth = std::numbers::pi / opts.arc_panels;
  for (int p = 0; p < opts.arc_panels; ++p) {
    for (std::size_t i = 0; i < ga.x.size(); ++i) {
      const double th = dth * (p + 0.5 * (1.0 + ga.x[i]));
      const Vec2 x(r * std::sin(th), r * std::cos(th));
      int e = loc.locate(x, 1e-9);
      if (e < 0) e = loc.locate_nearest(x);
      rule.arc.push_back({x, r * 0.5 * dth * ga.w[i], e});
    }
  }
  return rule;
}

}  // namespace tubespec
