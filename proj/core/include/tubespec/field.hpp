#pragma once

#include <functional>

#include "tubespec/fem.hpp"
#include "tubespec/mesh.hpp"
#include "tubespec/quadrature.hpp"

namespace tubespec {

// Nodal field on a mesh; evaluation extrapolates the element polynomial.
struct FeField {
  const Mesh* mesh = nullptr;
  Vector u;

  FeField() = default;
  FeField(const Mesh& m, Vector coeffs) : mesh(&m), u(std::move(coeffs)) {}

  double value(int elem, const Vec2& x) const;
  Vec2 gradient(int elem, const Vec2& x) const;
  double energy() const;          // int |grad u|^2
  double energy_where(const std::function<bool(const Vec2&)>& keep_centroid) const;
};

using ScalarFn = std::function<double(const Vec2&)>;

Vector interpolate(const Mesh& mesh, const ScalarFn& f);

// Polar angle measured from the positive x2-axis, in (0, pi) on {x1 > 0}.
double polar_angle(const Vec2& x);

// psi_hat_k = r^k sin(k theta) = Im((x2 + i x1)^k)
double psi_hat(int k, const Vec2& x);
Vec2 psi_hat_grad(int k, const Vec2& x);

// Sum of w f(q) over the rule.
double integrate(const std::vector<QuadPoint>& rule, const std::function<double(const QuadPoint&)>& f);

// Point evaluation with a cached locator; points outside the mesh use the nearest element.
class FieldProbe {
 public:
  explicit FieldProbe(const FeField& f) : field_(&f), loc_(*f.mesh) {}
  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  int element(const Vec2& x) const;

 private:
  const FeField* field_;
  PointLocator loc_;
};

}  // namespace tubespec
