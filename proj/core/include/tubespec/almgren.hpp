#pragma once

#include <functional>
#include <vector>

#include "tubespec/field.hpp"
#include "tubespec/mesher.hpp"

namespace tubespec {

// E = int_{Omega_r^eps} (|grad u|^2 - lambda p u^2),  H = (1/r) int_{S_r^+} u^2,  N = E / H
struct FrequencyProfile {
  std::vector<double> radii, E, H, N;
  std::vector<char> valid;  // 0 where H <= 0 (N is NaN)
  double lambda = 0, eps = 0;
};

FrequencyProfile frequency_profile(const FeField& u, double lambda, double eps, const std::vector<double>& radii,
                                   const WeightField& p = {});

// (2/pi) int_0^pi u(r, theta) sin(k theta) dtheta / r^k
double angular_coefficient(const FieldProbe& probe, double r, int k, int points = 512);

struct OrderOptions {
  double window_lo = 0.05;  // fractions of R0
  double window_hi = 0.15;
  int samples = 11;
};

struct VanishingOrder {
  int k = 0;
  double c = 0;
  double r_lo = 0, r_hi = 0;
  double fit_residual = 0;
  double median_N = 0;
  bool certified() const { return std::abs(c) > 10 * fit_residual; }
};

// k from the median of N over the window; c from a least-squares fit c(r) = c + a r^2.
VanishingOrder extract_vanishing_order(const FeField& u, double lambda, double R0, const OrderOptions& opts = {},
                                       const WeightField& p = {});

struct PohozaevResult {
  double lhs = 0, rhs = 0;
  double arc_grad_sq = 0;  // int_{S_r^+} |grad u|^2
  double residual() const { return lhs - rhs; }
};

PohozaevResult pohozaev_residual(const FeField& u, double lambda, double r, const WeightField& p = {});

struct SteklovOptions {
  double h = 0.02;
  double h_junction = 0.005;
  ElementOrder order = ElementOrder::P2;
};

// Smallest Steklov-type quotient on the unit half-ball, free on the slit |x2| < sigma of the flat wall.
double steklov_m_sigma(double sigma, const SteklovOptions& opts = {});

struct InequalitySides {
  double lhs = 0, rhs = 0;
  bool holds(double tol = 0) const { return lhs <= rhs + tol; }
};

// C_2 = 1 / (|B_1| lambda_1(B_1)) and the tube constant kappa = C_2 2 |Sigma| with |Sigma| = 2.
double faber_krahn_constant();
double tube_kappa();
double faber_krahn_lower_bound(double area);

struct TubePoincare {
  double lhs = 0;       // int_{T_eps} u^2
  double grad_sq = 0;   // int_{T_eps} |grad u|^2
  double rhs = 0;       // kappa eps grad_sq
  double kappa = 0;
};

TubePoincare tube_poincare_check(const FeField& u, double eps);

// (1/r^2) int_{B_r^+} u^2  <=  int_{B_r^+} |grad u|^2 + (1/r) int_{S_r^+} u^2
InequalitySides poincare_type_check(const FeField& u, double r);

// max N over the profile <= 3 max(k, N at the largest radius)
bool frequency_bound_check(const FrequencyProfile& profile, int k);

}  // namespace tubespec
