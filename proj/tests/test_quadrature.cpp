#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tubespec/error.hpp"
#include "tubespec/mesher.hpp"
#include "tubespec/quadrature.hpp"

using namespace tubespec;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

Mesh make(DomainKind kind, double eps, double h) {
  DomainSpec s;
  s.kind = kind;
  s.eps = eps;
  GradingPolicy p;
  p.h_far = h;
  p.h_junction = std::min(h, 0.01);
  return generate_mesh(build_domain(s), p, ElementOrder::P2);
}

}  // namespace

class TriangleRuleExactness : public ::testing::TestWithParam<int> {};

TEST_P(TriangleRuleExactness, IntegratesMonomialsOnReferenceTriangle) {
  const int d = GetParam();
  const TriangleRule& r = triangle_rule(d);
  ASSERT_GE(r.degree, d);
  for (int a = 0; a <= d; ++a)
    for (int b = 0; a + b <= d; ++b) {
      double s = 0;
      for (std::size_t q = 0; q < r.w.size(); ++q) s += r.w[q] * std::pow(r.bary[q][1], a) * std::pow(r.bary[q][2], b);
      const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      EXPECT_NEAR(0.5 * s, exact, 1e-14) << "x^" << a << " y^" << b;
    }
}

INSTANTIATE_TEST_SUITE_P(Degrees, TriangleRuleExactness, ::testing::Values(1, 2, 4, 6));

TEST(GaussLegendre, ExactToDegree2nMinus1) {
  for (int n : {1, 3, 8, 16}) {
    const GaussRule g = gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0;
      for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::pow(g.x[i], p);
      EXPECT_NEAR(s, p % 2 ? 0.0 : 2.0 / (p + 1), 1e-13);
    }
  }
}

TEST(ClipQuadrature, HalfBallAreaAndArcLength) {
  const Mesh m = make(DomainKind::Unperturbed, 0, 0.1);
  for (double r : {0.05, 0.3, 0.5, 1.0, 1.7}) {
    const ClippedRule c = clip_quadrature(m, r);
    EXPECT_NEAR(c.area_sum(), std::numbers::pi * r * r / 2, 1e-12) << r;
    EXPECT_NEAR(c.arc_sum(), std::numbers::pi * r, 1e-12) << r;
  }
}

TEST(ClipQuadrature, IntegratesPolynomialsOverTheHalfBall) {
  const Mesh m = make(DomainKind::Unperturbed, 0, 0.1);
  const double r = 0.7;
  const ClippedRule c = clip_quadrature(m, r);
  double s = 0, t = 0;
  for (const auto& q : c.area) {
    s += q.w * q.x.squaredNorm();
    t += q.w * q.x.x();
  }
  // int r^2 over the half disk = pi r^4 / 4, int x1 = 2 r^3 / 3
  EXPECT_NEAR(s, std::numbers::pi * std::pow(r, 4) / 4, 1e-12);
  EXPECT_NEAR(t, 2 * std::pow(r, 3) / 3, 1e-12);
}

TEST(ClipQuadrature, TubeIsIncludedWhenPresent) {
  const Mesh m = make(DomainKind::Perturbed, 0.1, 0.1);
  ClipOptions with, without;
  without.include_tube = false;
  const double r = 0.5;
  EXPECT_NEAR(clip_quadrature(m, r, with).area_sum(), std::numbers::pi * r * r / 2 + 0.2, 1e-12);
  EXPECT_NEAR(clip_quadrature(m, r, without).area_sum(), std::numbers::pi * r * r / 2, 1e-12);
}

TEST(ClipQuadrature, AreaIsMonotoneInRadius) {
  const Mesh m = make(DomainKind::Perturbed, 0.1, 0.1);
  double prev = 0;
  for (double r = 0.25; r < 1.9; r += 0.15) {
    const double a = clip_quadrature(m, r).area_sum();
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(ClipQuadrature, RejectsRadiusOutsideTheMesh) {
  const Mesh m = make(DomainKind::Unperturbed, 0, 0.2);
  EXPECT_THROW(clip_quadrature(m, 2.5), Error);
  EXPECT_THROW(clip_quadrature(m, 0.0), Error);
}

TEST(MeshRule, SumsToMeshArea) {
  const Mesh m = make(DomainKind::Perturbed, 0.2, 0.15);
  double s = 0;
  for (const auto& q : mesh_rule(m, 4)) s += q.w;
  EXPECT_NEAR(s, m.area(), 1e-12);
}
