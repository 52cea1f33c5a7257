#pragma once

#include <istream>
#include <string>
#include <vector>

#include "tubespec/asymptotics.hpp"
#include "tubespec/exterior.hpp"

namespace tubespec {

struct RunConfig {
  // [domain]
  double R0 = 2.0;
  std::vector<double> eps = {0.2, 0.15, 0.1, 0.07, 0.05};
  double sigma_halfwidth = 1.0;
  double tube_length = 1.0;
  // [mesh]
  double h_far = 0.04;
  double h_junction_factor = 0.05;  // h_junction = factor * eps
  double h_junction_min = 0.0025;   // used where no eps applies
  double grading_ratio = 1.5;
  ElementOrder order = ElementOrder::P2;
  std::size_t budget = 2000000;
  // [solver]
  SolverConfig solver;
  // [exterior]
  std::vector<int> ks = {1, 2};
  std::vector<double> R_grid = {4, 8, 16, 32};
  double phi_R = 16;
  ExteriorOptions exterior;
  // [sweep]
  std::vector<int> branches = {1, 2};
  int fit_points = 4;
  OrderOptions order_window;
  // [output]
  std::string output_dir = "out";
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

// Key reference for --help.
std::string config_reference();

MeshOptions mesh_options(const RunConfig& cfg, double h_junction);
DomainSpec perturbed_spec(const RunConfig& cfg, double eps);
DomainSpec unperturbed_spec(const RunConfig& cfg);
SweepOptions sweep_options(const RunConfig& cfg, int j);

}  // namespace tubespec
