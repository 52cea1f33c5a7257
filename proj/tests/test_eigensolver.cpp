#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "tubespec/eigensolver.hpp"
#include "tubespec/error.hpp"

using namespace tubespec;

namespace {

// 1-D Laplacian with a random positive diagonal perturbation and a lumped random mass.
void random_pencil(int n, unsigned seed, SparseMatrix& K, SparseMatrix& M) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.5, 1.5);
  std::vector<Eigen::Triplet<double>> k, m;
  for (int i = 0; i < n; ++i) {
    k.emplace_back(i, i, 2 + 0.1 * U(rng));
    if (i + 1 < n) {
      k.emplace_back(i, i + 1, -1);
      k.emplace_back(i + 1, i, -1);
    }
    m.emplace_back(i, i, U(rng));
  }
  K.resize(n, n);
  M.resize(n, n);
  K.setFromTriplets(k.begin(), k.end());
  M.setFromTriplets(m.begin(), m.end());
}

}  // namespace

TEST(Eigensolver, MatchesDenseGeneralizedSolver) {
  SparseMatrix K, M;
  random_pencil(300, 7, K, M);
  SolverConfig cfg;
  cfg.num_eigs = 6;
  const auto pairs = solve_generalized_eig(K, M, cfg);
  const Eigen::MatrixXd Kd(K), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(Kd, Md);
  ASSERT_EQ(pairs.size(), 6u);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(pairs[i].lambda, dense.eigenvalues()[i], 1e-10 * dense.eigenvalues()[i]);
    EXPECT_NEAR(pairs[i].coeffs.dot(M * pairs[i].coeffs), 1.0, 1e-10);
    EXPECT_LT(pairs[i].residual, 1e-8);
  }
}

TEST(Eigensolver, EigenvaluesScaleWithStiffness) {
  SparseMatrix K, M;
  random_pencil(120, 3, K, M);
  SolverConfig cfg;
  cfg.num_eigs = 4;
  const auto a = solve_generalized_eig(K, M, cfg);
  const auto b = solve_generalized_eig(2.5 * K, M, cfg);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(b[i].lambda, 2.5 * a[i].lambda, 1e-10 * b[i].lambda);
}

TEST(Eigensolver, MassOrthogonality) {
  SparseMatrix K, M;
  random_pencil(200, 11, K, M);
  SolverConfig cfg;
  cfg.num_eigs = 5;
  const auto p = solve_generalized_eig(K, M, cfg);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) EXPECT_NEAR(p[i].coeffs.dot(M * p[j].coeffs), 0, 1e-8);
}

TEST(Eigensolver, FlagsDegeneratePairs) {
  const int n = 50;
  std::vector<Eigen::Triplet<double>> k, m;
  for (int i = 0; i < n; ++i) {
    k.emplace_back(i, i, i < 2 ? 1.0 : 1.0 + i);
    m.emplace_back(i, i, 1.0);
  }
  SparseMatrix K(n, n), M(n, n);
  K.setFromTriplets(k.begin(), k.end());
  M.setFromTriplets(m.begin(), m.end());
  SolverConfig cfg;
  cfg.num_eigs = 3;
  const auto p = solve_generalized_eig(K, M, cfg);
  EXPECT_TRUE(p[0].degenerate);
  EXPECT_TRUE(p[1].degenerate);
  EXPECT_FALSE(p[2].degenerate);
  EXPECT_NEAR(p[2].lambda, 3.0, 1e-10);
}

TEST(Eigensolver, ZeroMassIsRejected) {
  SparseMatrix K, M;
  random_pencil(40, 1, K, M);
  SparseMatrix Z(40, 40);
  try {
    solve_generalized_eig(K, Z, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
  }
}
