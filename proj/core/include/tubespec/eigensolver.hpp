#pragma once

#include <string>
#include <vector>

#include "tubespec/fem.hpp"

namespace tubespec {

struct SolverConfig {
  double shift = 0.0;  // must lie below the wanted part of the spectrum
  int num_eigs = 6;
  double tol = 1e-10;
  int max_iter = 300;   // restarts
  int krylov_dim = 0;   // 0: max(2*num_eigs + 20, 40)
  unsigned seed = 12345;
};

struct EigenPair {
  double lambda = 0;
  Vector coeffs;           // M-normalized
  double mass_norm = 1.0;  // u'Mu after normalization
  double residual = 0;     // |Ku - lambda Mu| / |Ku|
  bool degenerate = false;
  std::string sign_convention = "none";
};

// Smallest eigenpairs of K u = lambda M u; K SPD, M PSD and nonzero.
std::vector<EigenPair> solve_generalized_eig(const SparseMatrix& K, const SparseMatrix& M, const SolverConfig& cfg);

// Flags pairs closer than rel * lambda.
void flag_degenerate(std::vector<EigenPair>& pairs, double rel = 1e-6);

}  // namespace tubespec
