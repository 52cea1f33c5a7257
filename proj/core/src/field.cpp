#include "tubespec/field.hpp"

#include <cmath>
#include <complex>

namespace tubespec {

double FeField::value(int elem, const Vec2& x) const {
  const auto L = PointLocator::barycentric(*mesh, elem, x);
  const auto d = mesh->element_dofs(elem);
  double N[6];
  shape_values(mesh->order, L, N);
  double s = 0;
  for (int i = 0; i < mesh->dofs_per_element(); ++i) s += N[i] * u[d[i]];
  return s;
}

Vec2 FeField::gradient(int elem, const Vec2& x) const {
  const auto L = PointLocator::barycentric(*mesh, elem, x);
  const auto d = mesh->element_dofs(elem);
  const ElementGeometry g = element_geometry(*mesh, elem);
  Vec2 G[6];
  shape_gradients(mesh->order, L, g, G);
  Vec2 s(0, 0);
  for (int i = 0; i < mesh->dofs_per_element(); ++i) s += u[d[i]] * G[i];
  return s;
}

double FeField::energy() const {
  return energy_where([](const Vec2&) { return true; });
}

double FeField::energy_where(const std::function<bool(const Vec2&)>& keep_centroid) const {
  const TriangleRule& rule = triangle_rule(2);
  double e = 0;
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    const auto& v = mesh->triangles[t];
    const Vec2 c = (mesh->vertices[v[0]] + mesh->vertices[v[1]] + mesh->vertices[v[2]]) / 3.0;
    if (!keep_centroid(c)) continue;
    const double A = mesh->triangle_area(t);
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const auto& L = rule.bary[q];
      const Vec2 x = L[0] * mesh->vertices[v[0]] + L[1] * mesh->vertices[v[1]] + L[2] * mesh->vertices[v[2]];
      e += A * rule.w[q] * gradient(t, x).squaredNorm();
    }
  }
  return e;
}

Vector interpolate(const Mesh& mesh, const ScalarFn& f) {
  Vector u(mesh.num_dofs());
  for (int i = 0; i < mesh.num_dofs(); ++i) u[i] = f(mesh.node(i));
  return u;
}

double polar_angle(const Vec2& x) { return std::atan2(x.x(), x.y()); }

double psi_hat(int k, const Vec2& x) { return std::pow(std::complex<double>(x.y(), x.x()), k).imag(); }

Vec2 psi_hat_grad(int k, const Vec2& x) {
  const std::complex<double> d = static_cast<double>(k) * std::pow(std::complex<double>(x.y(), x.x()), k - 1);
  return Vec2(d.real(), d.imag());
}

double integrate(const std::vector<QuadPoint>& rule, const std::function<double(const QuadPoint&)>& f) {
  double s = 0;
  for (const auto& q : rule) s += q.w * f(q);
  return s;
}

int FieldProbe::element(const Vec2& x) const {
  int e = loc_.locate(x, 1e-10);
  if (e < 0) e = loc_.locate_nearest(x);
  return e;
}

double FieldProbe::value(const Vec2& x) const { return field_->value(element(x), x); }

Vec2 FieldProbe::gradient(const Vec2& x) const { return field_->gradient(element(x), x); }

}  // namespace tubespec
