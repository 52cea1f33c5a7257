#pragma once

#include <vector>

#include "tubespec/almgren.hpp"
#include "tubespec/field.hpp"
#include "tubespec/mesher.hpp"

namespace tubespec {

struct ExteriorOptions {
  double h_far = 8.0;
  double h_junction = 0.005;  // at the corners (0, +-1)
  double grading_ratio = 1.5;
  double far_slope = 0.04;    // h <= far_slope (1 + |x|)
  double tube_length = 4.0;
  ElementOrder order = ElementOrder::P2;
  std::size_t element_budget = 2000000;
};

// Mesh of Pi_R carrying interior arcs at the given radii.
Mesh exterior_mesh(double R, const std::vector<double>& interface_radii, const ExteriorOptions& opts);

// U_R = I_h(psi_hat extended by 0) + W, W = 0 on the whole boundary and K W = f,
// f_i = int_Sigma phi_i d psi_hat / dx1. g_R = -W'KW.
struct ExteriorSolution {
  double R = 0;
  int k = 1;
  double data_scale = 1.0;
  SubMesh domain;  // Pi_R
  Vector W, U;
  double psi_energy = 0;        // k (pi/2) R^{2k} scale^2
  double dirichlet_energy = 0;  // psi_energy + g_R
  double g_R = 0;
  double m_energy = 0;  // -1/2 int |grad W|^2
  double m_flux = 0;    // -1/2 int_Sigma d psi_hat/dx1 W ds
};

// Solves on nested Pi_R submeshes of one mesh of Pi_{max R}.
std::vector<ExteriorSolution> solve_exterior_grid(int k, const std::vector<double>& R_values,
                                                  const ExteriorOptions& opts, double data_scale = 1.0);
ExteriorSolution solve_U_R(int k, double R, const ExteriorOptions& opts, double data_scale = 1.0);

struct MkEstimate {
  int k = 1;
  double m_hat = 0;
  double C_hat = 0;  // -2 m_hat
  double a = 0;      // coefficient of R^{-2k}
  int fit_exponent = 2;
  double fit_residual = 0;  // rms misfit relative to |2 m_hat|
  std::vector<double> R_values, g_values;
};

// Least squares g_R = 2 m_hat + a R^{-2k}.
MkEstimate extrapolate_mk(const std::vector<double>& R, const std::vector<double>& g, int k);
MkEstimate extrapolate_mk(const std::vector<ExteriorSolution>& sols, int k);

struct ProfilePhi {
  int k = 1;
  double R_host = 16, R_solve = 64;
  Mesh mesh;  // Pi_{R_solve} with interface arcs at 2, 4, ..., R_host
  Vector W, U;
  Vector sigma_load;  // f
  double m_energy = 0;

  FeField field() const { return FeField(mesh, U); }
  FeField w_field() const { return FeField(mesh, W); }
};

ProfilePhi build_Phi(int k, double R_host, const ExteriorOptions& opts);

// Z_R = psi_hat + z on B_R^+, z = 0 on the flat wall, z = W on S_R^+.
// F_R = 2 int_Sigma W d psi_hat/dx1 + E(z) - E_{Pi_R}(W) equals int |grad Z_R|^2 - int_{Pi_R} |grad Phi|^2.
struct ZSolution {
  double R = 0;
  SubMesh ball;
  Vector z, Z;
  double energy_z = 0, energy_W = 0, sigma_term = 0;
  double F_R = 0;
};

ZSolution solve_Z_R(const ProfilePhi& phi, double R);

struct LimitFit {
  double limit = 0, a = 0;
  int exponent = 2;
  double residual = 0;
};

// F_R = F + a R^{-p}, p = 2 for odd k and 4 for even k.
LimitFit extrapolate_F(const std::vector<double>& R, const std::vector<double>& F, int k);

struct ZetaCheck {
  double zeta1 = 0, predicted = 0, rel_err = 0;
  double C_route = 0;  // 2k (zeta1 - pi/2)
};

ZetaCheck zeta_identity_check(const ProfilePhi& phi, double m_hat);

InequalitySides hardy_2d_check(const std::function<double(double)>& rho, const std::function<double(double)>& drho,
                               double a, double b, int panels = 256);

}  // namespace tubespec
