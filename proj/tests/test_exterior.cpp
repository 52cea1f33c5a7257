#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tubespec/error.hpp"
#include "tubespec/exterior.hpp"

using namespace tubespec;

namespace {

ExteriorOptions fast() {
  ExteriorOptions o;
  o.far_slope = 0.08;
  o.h_junction = 0.01;
  return o;
}

}  // namespace

TEST(Hardy, HoldsOnBumpProfiles) {
  for (int i = 0; i < 10; ++i) {
    const double a = 0.05 + 0.3 * i, b = a + 0.2 + 0.5 * i;
    const auto rho = [=](double r) { return std::pow(std::sin(std::numbers::pi * (r - a) / (b - a)), 2); };
    const auto drho = [=](double r) {
      const double t = std::numbers::pi * (r - a) / (b - a);
      return std::numbers::pi / (b - a) * std::sin(2 * t);
    };
    EXPECT_TRUE(hardy_2d_check(rho, drho, a, b).holds());
  }
  EXPECT_THROW(hardy_2d_check([](double) { return 0.0; }, [](double) { return 0.0; }, 0, 1), Error);
}

TEST(Hardy, QuadratureIsExactForPowers) {
  // rho = r on [1, 2]: lhs = pi/4 * 3/2, rhs = pi * (3/2 + 3/8)
  const InequalitySides s = hardy_2d_check([](double r) { return r; }, [](double) { return 1.0; }, 1, 2);
  EXPECT_NEAR(s.lhs, std::numbers::pi / 4 * 1.5, 1e-13);
  EXPECT_NEAR(s.rhs, std::numbers::pi * (1.5 + 0.375), 1e-13);
}

TEST(ExtrapolateMk, RecoversSyntheticLimit) {
  for (int k = 1; k <= 2; ++k) {
    std::vector<double> R = {4, 8, 16, 32}, g;
    for (double r : R) g.push_back(2 * -0.3 + 0.7 * std::pow(r, -2 * k));
    const MkEstimate e = extrapolate_mk(R, g, k);
    EXPECT_NEAR(e.m_hat, -0.3, 1e-12);
    EXPECT_NEAR(e.C_hat, 0.6, 1e-12);
    EXPECT_NEAR(e.a, 0.7, 1e-9);
    EXPECT_LT(e.fit_residual, 1e-12);
  }
  EXPECT_THROW(extrapolate_mk({4, 8}, {-0.6, -0.6}, 1), Error);
  try {
    extrapolate_mk({4, 8, 16, 32}, {-0.6, 0.4, -0.9, 0.1}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FitUnstable);
  }
}

TEST(ExtrapolateF, UsesParityExponent) {
  std::vector<double> R = {2, 4, 8, 16}, F1, F2;
  for (double r : R) {
    F1.push_back(0.64 + 0.1 * std::pow(r, -2));
    F2.push_back(0.34 + 0.1 * std::pow(r, -4));
  }
  const LimitFit a = extrapolate_F(R, F1, 1), b = extrapolate_F(R, F2, 2);
  EXPECT_EQ(a.exponent, 2);
  EXPECT_EQ(b.exponent, 4);
  EXPECT_NEAR(a.limit, 0.64, 1e-12);
  EXPECT_NEAR(b.limit, 0.34, 1e-12);
}

TEST(Exterior, EnergyAndFluxFormsAgree) {
  const auto sols = solve_exterior_grid(1, {4, 8}, fast());
  for (const auto& s : sols) {
    EXPECT_LT(s.m_energy, 0);
    EXPECT_NEAR(s.m_flux / s.m_energy, 1, 1e-8);
    EXPECT_NEAR(s.g_R, 2 * s.m_energy, 1e-12);
    // psi_hat energy on the half ball is k pi R^{2k} / 2
    EXPECT_NEAR(s.psi_energy, std::numbers::pi / 2 * s.R * s.R, 1e-9 * s.R * s.R);
  }
  // g_R moves monotonically toward 2 m_k as R grows
  EXPECT_LT(sols[1].g_R, sols[0].g_R);
}

TEST(Exterior, QuadraticScalingLaw) {
  for (double c : {2.0, 3.0}) {
    const ExteriorSolution a = solve_U_R(2, 4, fast(), 1.0), b = solve_U_R(2, 4, fast(), c);
    EXPECT_NEAR(b.m_energy / a.m_energy, c * c, 1e-8 * c * c);
    EXPECT_NEAR((b.W - c * a.W).norm() / (c * a.W.norm()), 0, 1e-8);
  }
}

TEST(Exterior, CorrectionVanishesOnTheBoundary) {
  const ExteriorSolution s = solve_U_R(1, 4, fast());
  const Mesh& m = s.domain.mesh;
  for (int d : m.boundary_dofs({BoundaryTag::DirichletWall, BoundaryTag::OuterArc, BoundaryTag::TubeEnd}))
    EXPECT_EQ(s.W[d], 0.0);
}
