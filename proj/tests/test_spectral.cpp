#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tubespec/almgren.hpp"
#include "tubespec/error.hpp"
#include "tubespec/spectral.hpp"

using namespace tubespec;

namespace {

double std_zero(int m, int n) {
  // bracket by sign changes of std::cyl_bessel_j on a fine grid, then bisect
  int found = 0;
  double a = 0.5, fa = std::cyl_bessel_j(m, a);
  for (double b = a + 0.01;; b += 0.01) {
    const double fb = std::cyl_bessel_j(m, b);
    if (fa * fb < 0 && ++found == n) {
      double lo = b - 0.01, hi = b;
      for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::cyl_bessel_j(m, lo) * std::cyl_bessel_j(m, mid) <= 0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    fa = fb;
  }
}

NestedSolve coarse_nested(double eps, int nev = 4) {
  DomainSpec s;
  s.kind = DomainKind::Perturbed;
  s.eps = eps;
  MeshOptions mo;
  mo.policy.h_far = 0.08;
  mo.policy.h_junction = 0.05 * eps;
  SolverConfig cfg;
  cfg.num_eigs = nev;
  return solve_nested(s, {}, cfg, mo);
}

}  // namespace

TEST(Bessel, SeriesMatchesStandardLibrary) {
  for (int m = 0; m <= 4; ++m)
    for (double x : {0.1, 1.0, 3.7, 8.2, 12.5}) EXPECT_NEAR(bessel_j(m, x), std::cyl_bessel_j(m, x), 1e-12);
}

TEST(Bessel, ZerosMatchIndependentBisection) {
  for (int m = 0; m <= 3; ++m)
    for (int n = 1; n <= 3; ++n) EXPECT_NEAR(bessel_zero(m, n), std_zero(m, n), 1e-10);
}

TEST(Bessel, OracleIsNormalizedAndSatisfiesTheEquation) {
  const BesselOracle o = bessel_eigen(2, 1, 2.0);
  EXPECT_NEAR(o.lambda, std::pow(std_zero(2, 1) / 2, 2), 1e-10);
  // normalization: int_halfdisk phi^2 = A^2 (pi/2) (R0^2/2) J_{m+1}(j)^2 = 1
  const double jm1 = std::cyl_bessel_j(3, o.j);
  EXPECT_NEAR(o.A * o.A * std::numbers::pi / 2 * 2 * jm1 * jm1, 1.0, 1e-10);
  EXPECT_NEAR(o.value(Vec2(0, 1.2)), 0.0, 1e-14);
  EXPECT_NEAR(o.value(Vec2(1.2, 1.6)), 0.0, 1e-10);
  const double c = o.A * std::pow(std::sqrt(o.lambda) / 2, 2) / 2;
  EXPECT_NEAR(o.leading_coefficient(), c, 1e-14);
}

TEST(Spectral, CoarseHalfDiskEigenvalues) {
  DomainSpec s;
  MeshOptions mo;
  mo.policy.h_far = mo.policy.h_junction = 0.08;
  SolverConfig cfg;
  cfg.num_eigs = 4;
  const SpectralResult r = solve_unperturbed(s, {}, cfg, mo);
  const double ref[] = {std::pow(std_zero(1, 1) / 2, 2), std::pow(std_zero(2, 1) / 2, 2),
                        std::pow(std_zero(3, 1) / 2, 2), std::pow(std_zero(1, 2) / 2, 2)};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.pairs[i].lambda / ref[i], 1.0, 1e-3) << i;
  // lambda_1 is bounded below by Faber-Krahn
  EXPECT_GE(r.pairs[0].lambda, faber_krahn_lower_bound(r.mesh.area()));
}

TEST(Spectral, SignConventionMakesLeadingCoefficientPositive) {
  DomainSpec s;
  MeshOptions mo;
  mo.policy.h_far = mo.policy.h_junction = 0.1;
  SolverConfig cfg;
  cfg.num_eigs = 2;
  const SpectralResult r = solve_unperturbed(s, {}, cfg, mo);
  for (int j = 0; j < 2; ++j) {
    const FeField f(r.mesh, r.pairs[j].coeffs);
    const FieldProbe probe(f);
    EXPECT_GT(angular_coefficient(probe, 0.2, j + 1), 0);
  }
}

TEST(Spectral, PerturbationLowersEigenvaluesAndBranchTracks) {
  std::vector<NestedSolve> solves;
  solves.push_back(coarse_nested(0.2));
  solves.push_back(coarse_nested(0.1));
  const BranchTrack b = track_branch(1, solves);
  ASSERT_EQ(b.eps_values.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GT(b.lambda0[i], b.lambda_eps[i]);
    EXPECT_GT(b.overlaps[i], 0.99);
    EXPECT_EQ(b.index[i], 0);
  }
  // the smaller tube perturbs less
  EXPECT_LT(b.lambda0[1] - b.lambda_eps[1], b.lambda0[0] - b.lambda_eps[0]);
  EXPECT_THROW(track_branch(5, solves), Error);
}

TEST(Spectral, DegenerateReferenceViolatesSimplicity) {
  std::vector<NestedSolve> solves;
  solves.push_back(coarse_nested(0.2, 2));
  solves[0].unpert[0].degenerate = true;
  try {
    track_branch(1, solves);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SimplicityViolated);
    EXPECT_NE(std::string(e.what()).find("simplicity violated"), std::string::npos);
  }
}
