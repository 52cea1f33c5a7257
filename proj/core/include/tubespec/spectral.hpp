#pragma once

#include <vector>

#include "tubespec/eigensolver.hpp"
#include "tubespec/field.hpp"
#include "tubespec/mesher.hpp"

namespace tubespec {

double bessel_j(int m, double x);
// n-th positive zero of J_m, bracketed by a scan and bisected
double bessel_zero(int m, int n);

// Dirichlet eigenpair of the half-disk of radius R0: A J_m(j r / R0) sin(m theta).
struct BesselOracle {
  int m = 1, n = 1;
  double R0 = 2.0;
  double j = 0, lambda = 0, A = 0;

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  double leading_coefficient() const;  // A (sqrt(lambda)/2)^m / m!
};

BesselOracle bessel_eigen(int m, int n, double R0);
// First `count` half-disk eigenpairs in increasing order.
std::vector<BesselOracle> half_disk_spectrum(double R0, int count);

struct SpectralResult {
  Mesh mesh;
  std::vector<EigenPair> pairs;  // full-length coefficients, zero on the boundary
};

// Dirichlet condition on every boundary edge of the mesh.
std::vector<EigenPair> solve_dirichlet(const Mesh& mesh, const WeightField& p, const SolverConfig& cfg);

// Sign so that the dominant angular coefficient near the origin is positive.
void fix_sign(const Mesh& mesh, EigenPair& pair, double r_probe);

SpectralResult solve_unperturbed(const DomainSpec& spec, const WeightField& p, const SolverConfig& cfg,
                                 const MeshOptions& mesh_opts);
SpectralResult solve_perturbed(const DomainSpec& spec, const WeightField& p, const SolverConfig& cfg,
                               const MeshOptions& mesh_opts);

// Perturbed solve together with the unperturbed one on the nested submesh {x1 > 0}.
struct NestedSolve {
  double eps = 0;
  Mesh mesh_eps;
  SubMesh omega;
  SparseMatrix M_omega;  // p-weighted mass on omega
  std::vector<EigenPair> pert;    // on mesh_eps
  std::vector<EigenPair> unpert;  // on omega.mesh
};

NestedSolve solve_nested(const DomainSpec& spec, const WeightField& p, const SolverConfig& cfg,
                         const MeshOptions& mesh_opts);

// Restriction of a field on mesh_eps to omega.
Vector restrict_to_omega(const NestedSolve& s, const Vector& u_eps);

struct BranchTrack {
  int j = 1;
  std::vector<double> eps_values;
  std::vector<double> lambda_eps, lambda0, overlaps, l2_diff;
  std::vector<int> index;  // selected perturbed pair per eps
};

// Selects, for each eps, the perturbed pair with the largest overlap with phi_j and aligns its sign.
BranchTrack track_branch(int j, std::vector<NestedSolve>& solves);

}  // namespace tubespec
