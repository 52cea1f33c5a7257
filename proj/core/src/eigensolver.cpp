#include "tubespec/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "tubespec/error.hpp"

namespace tubespec {

namespace {

// Krylov basis for T = (K - sM)^{-1} M, orthonormal in the (K - sM) inner product.
struct Basis {
  Eigen::MatrixXd V, KV, MV;
  int size = 0;
};

}  // namespace

std::vector<EigenPair> solve_generalized_eig(const SparseMatrix& K, const SparseMatrix& M, const SolverConfig& cfg) {
  const int n = static_cast<int>(K.rows());
  if (cfg.num_eigs < 1) throw Error(ErrorKind::Config, "num_eigs must be at least 1");
  if (M.rows() != n || K.cols() != n) throw Error(ErrorKind::Numerical, "matrix sizes differ");
  if (M.squaredNorm() == 0.0) throw Error(ErrorKind::Numerical, "mass matrix vanishes identically");
  const int nev = std::min(cfg.num_eigs, n);
  int m = cfg.krylov_dim > 0 ? cfg.krylov_dim : std::max(2 * nev + 20, 40);
  m = std::min(m, n);

  const SparseMatrix Ks = K - cfg.shift * M;
  std::unique_ptr<SpdSolver> solver;
  try {
    solver = std::make_unique<SpdSolver>(Ks);
  } catch (const Error&) {
    throw Error(ErrorKind::Numerical, "K - shift*M is not positive definite (shift above the spectrum?)");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  Basis B;
  B.V.resize(n, m);
  B.KV.resize(n, m);
  B.MV.resize(n, m);

  // w <- w - V c twice; returns norm in the K_s inner product
  auto orthogonalize = [&](Vector& w, Vector& Kw) {
    for (int pass = 0; pass < 2 && B.size > 0; ++pass) {
      const Vector c = B.KV.leftCols(B.size).transpose() * w;
      w.noalias() -= B.V.leftCols(B.size) * c;
      Kw.noalias() -= B.KV.leftCols(B.size) * c;
    }
    return std::sqrt(std::max(0.0, w.dot(Kw)));
  };

  auto fresh_vector = [&](Vector& f, Vector& Kf) {
    for (int attempt = 0; attempt < 10; ++attempt) {
      Vector r(n);
      for (int i = 0; i < n; ++i) r[i] = gauss(rng);
      Kf = M * r;
      f = solver->solve(Kf);
      const double before = std::sqrt(std::max(0.0, f.dot(Kf)));
      const double nrm = orthogonalize(f, Kf);
      if (nrm > 1e-10 * before && nrm > 0) {
        f /= nrm;
        Kf /= nrm;
        return true;
      }
    }
    return false;
  };

  Vector f, Kf;
  if (!fresh_vector(f, Kf)) throw Error(ErrorKind::Numerical, "mass matrix has no range");
  bool have_f = true;

  Eigen::VectorXd theta;
  Eigen::MatrixXd Y;
  std::vector<EigenPair> out;
  bool converged = false;

  for (int iter = 0; iter < cfg.max_iter && !converged; ++iter) {
    while (B.size < m && have_f) {
      const int j = B.size;
      B.V.col(j) = f;
      B.KV.col(j) = Kf;
      B.MV.col(j) = M * f;
      ++B.size;
      if (B.size == n) {
        have_f = false;
        break;
      }
      Vector w = solver->solve(B.MV.col(j));
      Vector Kw = B.MV.col(j);
      const double before = std::sqrt(std::max(0.0, w.dot(Kw)));
      const double nrm = orthogonalize(w, Kw);
      if (nrm > 1e-12 * before && nrm > 0) {
        f = w / nrm;
        Kf = Kw / nrm;
      } else {
        have_f = fresh_vector(f, Kf);
      }
    }

    const int s = B.size;
    Eigen::MatrixXd H = B.V.leftCols(s).transpose() * B.MV.leftCols(s);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    theta = es.eigenvalues().reverse();
    Y = es.eigenvectors().rowwise().reverse();

    int positive = 0;
    while (positive < s && theta[positive] > 1e-14 * std::abs(theta[0])) ++positive;
    const int want = std::min(nev, positive);
    out.clear();
    converged = want == nev || !have_f;
    for (int i = 0; i < want; ++i) {
      const Vector y = Y.col(i);
      const Vector x = B.V.leftCols(s) * y;
      const Vector Ksx = B.KV.leftCols(s) * y;
      const Vector Mx = B.MV.leftCols(s) * y;
      const double lam = cfg.shift + 1.0 / theta[i];
      const Vector Kx = Ksx + cfg.shift * Mx;
      const double res = (Ksx - (lam - cfg.shift) * Mx).norm() / std::max(Kx.norm(), 1e-300);
      EigenPair p;
      p.lambda = lam;
      p.coeffs = x;
      p.residual = res;
      out.push_back(std::move(p));
      if (res > cfg.tol) converged = false;
    }
    if (converged || iter + 1 == cfg.max_iter) break;

    // thick restart on the leading Ritz vectors
    const int keep = std::min(s - 1, std::max(nev + 1, nev + (m - nev) / 2));
    B.V.leftCols(keep) = B.V.leftCols(s) * Y.leftCols(keep);
    B.KV.leftCols(keep) = B.KV.leftCols(s) * Y.leftCols(keep);
    B.MV.leftCols(keep) = B.MV.leftCols(s) * Y.leftCols(keep);
    B.size = keep;
    if (!have_f) have_f = fresh_vector(f, Kf);
  }

  if (static_cast<int>(out.size()) < nev) throw Error(ErrorKind::Numerical, "eigensolver found too few eigenpairs");
  for (auto& p : out) {
    const Vector Mx = M * p.coeffs;
    const Vector Kx = K * p.coeffs;
    const double mm = p.coeffs.dot(Mx);
    p.lambda = p.coeffs.dot(Kx) / mm;
    const double s = 1.0 / std::sqrt(mm);
    p.coeffs *= s;
    p.residual = (Kx - p.lambda * Mx).norm() / Kx.norm();
    p.mass_norm = mm * s * s;
  }
  std::sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) { return a.lambda < b.lambda; });
  const double worst = std::max_element(out.begin(), out.end(), [](const auto& a, const auto& b) {
                         return a.residual < b.residual;
                       })->residual;
  if (worst > std::max(1e-9, cfg.tol)) throw Error(ErrorKind::Numerical, "eigensolver did not converge");
  flag_degenerate(out);
  return out;
}

void flag_degenerate(std::vector<EigenPair>& pairs, double rel) {
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    if (std::abs(pairs[i + 1].lambda - pairs[i].lambda) < rel * std::abs(pairs[i].lambda)) {
      pairs[i].degenerate = true;
      pairs[i + 1].degenerate = true;
    }
  }
}

}  // namespace tubespec
