#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tubespec/error.hpp"
#include "tubespec/field.hpp"
#include "tubespec/mesher.hpp"

using namespace tubespec;

namespace {

Mesh half_disk(double h, ElementOrder o) {
  DomainSpec s;
  GradingPolicy p;
  p.h_far = p.h_junction = h;
  return generate_mesh(build_domain(s), p, o);
}

}  // namespace

TEST(Assembly, ConstantsAreInTheStiffnessKernel) {
  for (auto o : {ElementOrder::P1, ElementOrder::P2}) {
    const Mesh m = half_disk(0.2, o);
    const SparseMatrix K = assemble_stiffness(m);
    const Vector one = Vector::Ones(m.num_dofs());
    EXPECT_LT((K * one).lpNorm<Eigen::Infinity>(), 1e-12);
    const SparseMatrix M = assemble_mass(m);
    EXPECT_NEAR(one.dot(M * one), m.area(), 1e-12);
    EXPECT_LT((SparseMatrix(K.transpose()) - K).norm(), 1e-12);
  }
}

TEST(Assembly, P2EnergyIsExactForQuadratics) {
  const Mesh m = half_disk(0.25, ElementOrder::P2);
  const Vector u = interpolate(m, [](const Vec2& x) { return x.x() * x.x() - 3 * x.x() * x.y() + x.y(); });
  double exact = 0;
  for (const auto& q : mesh_rule(m, 4)) {
    const Vec2 g(2 * q.x.x() - 3 * q.x.y(), -3 * q.x.x() + 1);
    exact += q.w * g.squaredNorm();
  }
  EXPECT_NEAR(u.dot(assemble_stiffness(m) * u), exact, 1e-10 * exact);
}

TEST(Assembly, BoundaryMassMeasuresTheArc) {
  DomainSpec s;
  s.kind = DomainKind::HalfBall;
  s.R_trunc = 2.0;
  GradingPolicy p;
  p.h_far = p.h_junction = 0.1;
  const Mesh m = generate_mesh(build_domain(s), p, ElementOrder::P2);
  const SparseMatrix B = assemble_boundary_mass(m, BoundaryTag::OuterArc);
  const Vector one = Vector::Ones(m.num_dofs());
  // polygonal arc length
  EXPECT_NEAR(one.dot(B * one), 2 * std::numbers::pi, 5e-3);
  EXPECT_THROW(assemble_boundary_mass(m, BoundaryTag::TubeEnd), Error);
}

TEST(Poisson, P2ConvergesOnTheHalfDisk) {
  // u = x1 (4 - |x|^2) vanishes on the wall and the arc, -lap u = 8 x1
  auto solve_err = [](double h) {
    const Mesh m = half_disk(h, ElementOrder::P2);
    const SparseMatrix K = assemble_stiffness(m);
    Vector b = Vector::Zero(m.num_dofs());
    for (int t = 0; t < m.num_triangles(); ++t) {
      const auto dofs = m.element_dofs(t);
      const auto& rule = triangle_rule(6);
      const double area = m.triangle_area(t);
      const auto& v = m.triangles[t];
      for (std::size_t q = 0; q < rule.w.size(); ++q) {
        const auto& L = rule.bary[q];
        const Vec2 x = L[0] * m.vertices[v[0]] + L[1] * m.vertices[v[1]] + L[2] * m.vertices[v[2]];
        double N[6];
        shape_values(ElementOrder::P2, L, N);
        for (int i = 0; i < 6; ++i) b[dofs[i]] += area * rule.w[q] * 8 * x.x() * N[i];
      }
    }
    const auto bd = m.boundary_dofs({BoundaryTag::DirichletWall, BoundaryTag::OuterArc});
    const Vector u = solve_constrained(K, b, bd, Vector::Zero(bd.size()));
    double err = 0;
    for (int i = 0; i < m.num_dofs(); ++i) {
      const Vec2 x = m.node(i);
      err = std::max(err, std::abs(u[i] - x.x() * (4 - x.squaredNorm())));
    }
    return err;
  };
  const double e1 = solve_err(0.2), e2 = solve_err(0.1);
  // chord midpoints sit off the arc, so h^2 from the boundary
  EXPECT_LT(e2, 1e-2);
  EXPECT_LT(e2, e1 / 3);
}

TEST(Dirichlet, AllConstrainedIsRejected) {
  const Mesh m = half_disk(0.5, ElementOrder::P1);
  std::vector<int> all(m.num_dofs());
  for (int i = 0; i < m.num_dofs(); ++i) all[i] = i;
  EXPECT_THROW(apply_dirichlet(assemble_stiffness(m), all), Error);
}

TEST(WeightField, BumpRampsFromZeroToOne) {
  const WeightField p = WeightField::radial_bump(Vec2(0.5, 0), 0.1, 0.3);
  EXPECT_EQ(p(Vec2(0.5, 0)), 0.0);
  EXPECT_EQ(p(Vec2(1.5, 0)), 1.0);
  double prev = -1;
  for (double r = 0.05; r < 0.4; r += 0.01) {
    const double v = p(Vec2(0.5 + r, 0));
    EXPECT_GE(v, prev);
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 1);
    prev = v;
  }
  EXPECT_EQ(WeightField::one()(Vec2(0.3, 0.2)), 1.0);
}

TEST(Field, EvaluationReproducesP2Interpolant) {
  const Mesh m = half_disk(0.3, ElementOrder::P2);
  const FeField f(m, interpolate(m, [](const Vec2& x) { return 1 + x.x() * x.y() - x.y() * x.y(); }));
  const FieldProbe probe(f);
  for (const Vec2 x : {Vec2(0.4, 0.3), Vec2(1.2, -0.7), Vec2(0.05, 1.5)}) {
    EXPECT_NEAR(probe.value(x), 1 + x.x() * x.y() - x.y() * x.y(), 1e-12);
    EXPECT_NEAR((probe.gradient(x) - Vec2(x.y(), x.x() - 2 * x.y())).norm(), 0, 1e-11);
  }
}

TEST(Field, PsiHatMatchesPolarForm) {
  for (int k = 1; k <= 4; ++k)
    for (const Vec2 x : {Vec2(0.3, 0.4), Vec2(1.0, -0.2)}) {
      const double th = polar_angle(x), r = x.norm();
      EXPECT_NEAR(psi_hat(k, x), std::pow(r, k) * std::sin(k * th), 1e-13);
      const double h = 1e-6;
      const Vec2 fd((psi_hat(k, x + Vec2(h, 0)) - psi_hat(k, x - Vec2(h, 0))) / (2 * h),
                    (psi_hat(k, x + Vec2(0, h)) - psi_hat(k, x - Vec2(0, h))) / (2 * h));
      EXPECT_NEAR((psi_hat_grad(k, x) - fd).norm(), 0, 1e-8);
    }
}
