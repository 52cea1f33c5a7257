#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tubespec/config.hpp"

namespace tubespec {

std::string eps_label(double eps);  // shortest round-trip text, e.g. "0.1"

// Nested solves for every eps of the config, largest first.
std::vector<NestedSolve> run_solves(const RunConfig& cfg);

struct MkReport {
  int k = 1;
  std::vector<ExteriorSolution> sols;
  MkEstimate estimate;
  ZetaCheck zeta;
  std::vector<double> F_radii, F_values;
  LimitFit F_fit;
  double agreement = 0;  // max relative gap between the energy and flux forms of m over the grid
};

MkReport run_mk(const RunConfig& cfg, int k);

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string note;
  std::vector<std::pair<std::string, double>> measured;
};

struct Verdict {
  std::vector<Criterion> criteria;
  double slope = 0, constant = 0, C_k_predicted = 0, discrepancy = 0;
  bool pass() const;
};

Verdict verify(const RunConfig& cfg);

// Each command writes into out_dir, creating it when needed.
void cmd_mesh(const RunConfig& cfg, const std::string& out_dir);
void cmd_eig(const RunConfig& cfg, const std::string& out_dir);
void cmd_frequency(const RunConfig& cfg, const std::string& out_dir);
void cmd_mk(const RunConfig& cfg, const std::string& out_dir);
void cmd_sweep(const RunConfig& cfg, const std::string& out_dir);
// 0 when every criterion passes, 4 otherwise
int cmd_verify(const RunConfig& cfg, const std::string& out_dir);

}  // namespace tubespec
