#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "tubespec/almgren.hpp"
#include "tubespec/exterior.hpp"
#include "tubespec/spectral.hpp"

namespace tubespec {

struct RateFit {
  double slope_raw = 0;        // LS slope of log diff vs log eps
  double slope_corrected = 0;  // same for diff / (1 + a eps)
  double constant = 0;         // C in diff / eps^{2k} = C (1 + a eps)
  double a = 0;
  double residual = 0;  // rms relative misfit of the constant model
  int points = 0;
};

// Uses the `points` smallest eps values.
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& diffs, int k, int points = 4);

struct SweepOptions {
  double R0 = 2.0;
  double sigma_halfwidth = 1.0, tube_length = 1.0;
  std::vector<double> eps = {0.2, 0.15, 0.1, 0.07, 0.05};
  int j = 1;
  MeshOptions mesh;                 // h_junction is overridden per eps
  double h_junction_factor = 0.05;  // h_junction = factor * eps
  SolverConfig solver;
  WeightField p;
  OrderOptions order;
  int fit_points = 4;
};

struct SweepResult {
  BranchTrack branch;
  VanishingOrder order;
  std::vector<double> diffs, scaled;  // lambda - lambda_eps, diff / eps^{2k}
  RateFit fit;
  bool near_zero_flag = false;  // some diff within 10 solver tolerances of zero
};

struct SweepRun {
  SweepResult result;
  std::vector<NestedSolve> solves;  // sorted by decreasing eps
};

// Nested solves for every eps, sorted by decreasing eps.
std::vector<NestedSolve> sweep_solves(const SweepOptions& opts);
SweepRun run_sweep(const SweepOptions& opts);

// Tracks an additional branch on existing solves.
SweepResult analyse_branch(std::vector<NestedSolve>& solves, int j, const SweepOptions& opts);

double predicted_constant(double c, double m_hat);  // -2 c^2 m_hat
double compare_constant(double fitted_constant, double c, double m_hat);

struct BlowupReport {
  std::vector<double> eps;
  std::vector<double> distance;      // against Phi
  std::vector<double> distance_psi;  // against psi_hat alone
};

// Relative H1 distance on Pi_2 between eps^{-k} phi_eps(eps x) / c and Phi.
BlowupReport blowup_compare(const std::vector<NestedSolve>& solves, const BranchTrack& branch, const ProfilePhi& phi,
                            double c);

struct QuadraticFormFamily {
  int j = 2;
  std::function<Eigen::MatrixXd(double)> M;
  std::function<double(double)> sigma, mu;
};

double quadratic_form_max(const Eigen::MatrixXd& M);
// max Q_eps / (sigma(eps) mu(eps))
double quadratic_form_ratio(const QuadraticFormFamily& Q, double eps);

}  // namespace tubespec
