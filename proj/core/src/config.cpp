#include "tubespec/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tubespec/error.hpp"

namespace tubespec {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kKeys = {
    {"domain", {"R0", "eps", "sigma_halfwidth", "tube_length"}},
    {"mesh", {"h_far", "h_junction_factor", "h_junction_min", "grading_ratio", "order", "budget"}},
    {"solver", {"shift", "num_eigs", "tol", "max_iter", "krylov_dim", "seed"}},
    {"exterior", {"k", "R", "phi_R", "h_junction", "far_slope", "grading_ratio", "tube_length"}},
    {"sweep", {"j", "fit_points", "window_lo", "window_hi", "samples"}},
    {"output", {"directory"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (t.empty() || pos != t.size()) throw Error(ErrorKind::Config, "config: " + key + " expects a number, got '" + s + "'");
  return v;
}

long to_long(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (v != static_cast<double>(static_cast<long>(v)))
    throw Error(ErrorKind::Config, "config: " + key + " expects an integer, got '" + s + "'");
  return static_cast<long>(v);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& s) {
  std::vector<double> v;
  for (const auto& x : split(s)) v.push_back(to_double(key, x));
  return v;
}

std::vector<int> to_ints(const std::string& key, const std::string& s) {
  std::vector<int> v;
  for (const auto& x : split(s)) v.push_back(static_cast<int>(to_long(key, x)));
  return v;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::Config, "config: " + msg);
}

}  // namespace

RunConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Parse, std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    const auto it = kKeys.find(section);
    if (it == kKeys.end()) throw Error(ErrorKind::Config, "config: unknown section or key '" + section + "'");
    for (const auto& [key, node] : body) {
      if (!it->second.count(key)) throw Error(ErrorKind::Config, "config: unknown key '" + section + "." + key + "'");
      const std::string v = node.data();
      const std::string name = section + "." + key;
      if (section == "domain") {
        if (key == "R0") c.R0 = to_double(name, v);
        else if (key == "eps") c.eps = to_doubles(name, v);
        else if (key == "sigma_halfwidth") c.sigma_halfwidth = to_double(name, v);
        else c.tube_length = to_double(name, v);
      } else if (section == "mesh") {
        if (key == "h_far") c.h_far = to_double(name, v);
        else if (key == "h_junction_factor") c.h_junction_factor = to_double(name, v);
        else if (key == "h_junction_min") c.h_junction_min = to_double(name, v);
        else if (key == "grading_ratio") c.grading_ratio = to_double(name, v);
        else if (key == "budget") {
          const long b = to_long(name, v);
          require(b > 0, "mesh.budget must be positive");
          c.budget = static_cast<std::size_t>(b);
        } else {
          const std::string o = trim(v);
          require(o == "P1" || o == "P2", "mesh.order must be P1 or P2");
          c.order = o == "P1" ? ElementOrder::P1 : ElementOrder::P2;
        }
      } else if (section == "solver") {
        if (key == "shift") c.solver.shift = to_double(name, v);
        else if (key == "num_eigs") c.solver.num_eigs = static_cast<int>(to_long(name, v));
        else if (key == "tol") c.solver.tol = to_double(name, v);
        else if (key == "max_iter") c.solver.max_iter = static_cast<int>(to_long(name, v));
        else if (key == "krylov_dim") c.solver.krylov_dim = static_cast<int>(to_long(name, v));
        else c.solver.seed = static_cast<unsigned>(to_long(name, v));
      } else if (section == "exterior") {
        if (key == "k") c.ks = to_ints(name, v);
        else if (key == "R") c.R_grid = to_doubles(name, v);
        else if (key == "phi_R") c.phi_R = to_double(name, v);
        else if (key == "h_junction") c.exterior.h_junction = to_double(name, v);
        else if (key == "far_slope") c.exterior.far_slope = to_double(name, v);
        else if (key == "grading_ratio") c.exterior.grading_ratio = to_double(name, v);
        else c.exterior.tube_length = to_double(name, v);
      } else if (section == "sweep") {
        if (key == "j") c.branches = to_ints(name, v);
        else if (key == "fit_points") c.fit_points = static_cast<int>(to_long(name, v));
        else if (key == "window_lo") c.order_window.window_lo = to_double(name, v);
        else if (key == "window_hi") c.order_window.window_hi = to_double(name, v);
        else c.order_window.samples = static_cast<int>(to_long(name, v));
      } else {
        c.output_dir = trim(v);
      }
    }
  }
  c.exterior.element_budget = c.budget;
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Config, "cannot open config " + path);
  return parse_config(is);
}

void validate(const RunConfig& c) {
  require(c.R0 > 0, "domain.R0 must be positive");
  require(c.sigma_halfwidth == 1.0 && c.tube_length == 1.0, "domain.sigma_halfwidth and domain.tube_length are fixed to 1");
  require(c.eps.size() >= 4, "domain.eps needs at least 4 values");
  for (double e : c.eps) require(e > 0 && e <= 0.4, "domain.eps values must lie in (0, 0.4]");
  std::vector<double> s = c.eps;
  std::sort(s.begin(), s.end());
  require(std::adjacent_find(s.begin(), s.end()) == s.end(), "domain.eps values must be distinct");
  require(c.h_far > 0 && c.h_far < c.R0, "mesh.h_far must lie in (0, R0)");
  require(c.h_junction_factor > 0, "mesh.h_junction_factor must be positive");
  require(c.h_junction_min > 0 && c.h_junction_min <= c.h_far, "mesh.h_junction_min must lie in (0, h_far]");
  require(c.grading_ratio > 1, "mesh.grading_ratio must exceed 1");
  require(c.solver.num_eigs >= 1, "solver.num_eigs must be at least 1");
  require(c.solver.tol > 0 && c.solver.tol < 1e-3, "solver.tol must lie in (0, 1e-3)");
  require(c.solver.max_iter > 0, "solver.max_iter must be positive");
  require(c.solver.krylov_dim >= 0, "solver.krylov_dim must be non-negative");
  require(!c.ks.empty(), "exterior.k needs at least one value");
  for (int k : c.ks) require(k >= 1 && k <= 6, "exterior.k values must lie in 1..6");
  require(c.R_grid.size() >= 3, "exterior.R needs at least 3 radii");
  for (double R : c.R_grid) require(R > 1, "exterior.R values must exceed 1");
  require(c.phi_R >= 2 && std::abs(std::log2(c.phi_R) - std::round(std::log2(c.phi_R))) < 1e-12,
          "exterior.phi_R must be a power of 2, at least 2");
  require(c.exterior.h_junction > 0 && c.exterior.far_slope > 0 && c.exterior.tube_length > 0 &&
              c.exterior.grading_ratio > 1,
          "exterior mesh parameters must be positive (grading_ratio > 1)");
  require(!c.branches.empty(), "sweep.j needs at least one branch");
  for (int j : c.branches) require(j >= 1 && j <= c.solver.num_eigs, "sweep.j must lie in 1..solver.num_eigs");
  require(c.fit_points >= 3 && c.fit_points <= static_cast<int>(c.eps.size()),
          "sweep.fit_points must lie in 3..number of eps values");
  require(c.order_window.window_lo > 0 && c.order_window.window_hi > c.order_window.window_lo &&
              c.order_window.window_hi <= 0.5,
          "sweep window must satisfy 0 < window_lo < window_hi <= 0.5");
  require(c.order_window.samples >= 3, "sweep.samples must be at least 3");
  require(!c.output_dir.empty(), "output.directory must not be empty");
}

std::string config_reference() {
  return R"(Config file (INI, every key optional, unknown keys rejected):
  [domain]   R0 (2)  eps (0.2,0.15,0.1,0.07,0.05)  sigma_halfwidth (1)  tube_length (1)
  [mesh]     h_far (0.04)  h_junction_factor (0.05, h_junction = factor*eps)  h_junction_min (0.0025)
             grading_ratio (1.5)  order (P1|P2, P2)  budget (2000000 elements)
  [solver]   shift (0)  num_eigs (6)  tol (1e-10)  max_iter (300)  krylov_dim (0 = auto)  seed (12345)
  [exterior] k (1,2)  R (4,8,16,32)  phi_R (16)  h_junction (0.005)  far_slope (0.04)
             grading_ratio (1.5)  tube_length (4)
  [sweep]    j (1,2)  fit_points (4)  window_lo (0.05)  window_hi (0.15)  samples (11)
  [output]   directory (out; OUTPUT_DIR and --out override)

Outputs (see docs/schema.md):
  mesh       omega.mesh, omega_eps_<eps>.mesh, pi_R<R>.mesh, manifest.json
  eig        branch.csv: j,eps,lambda0,lambda_eps,diff,overlap,index
             fields/phi0_j<j>.field, fields/phi_j<j>_eps_<eps>.field
  frequency  frequency.csv: j,eps,r,E,H,N,valid
             order.csv: j,k,c,median_N,r_lo,r_hi,fit_residual,certified
  mk         mk.csv: k,R,g_R,m_energy,m_flux,agreement
             mk_summary.json: per k m_hat, C_hat, fit_residual, fit_exponent, m_energy,
             m_flux, agreement, zeta1, zeta_predicted, zeta_rel_err, C_zeta, F_R, F_limit
  sweep      sweep.csv: j,k,eps,lambda_eps,diff,diff_over_eps2k
             sweep_summary.json: per branch k, c, slope, slope_raw, constant, a, fit_residual,
             near_zero_flag
  verify     verdict.json: slope, constant, C_k_predicted, discrepancy, criteria[], pass
)";
}

MeshOptions mesh_options(const RunConfig& c, double h_junction) {
  MeshOptions mo;
  mo.policy.h_far = c.h_far;
  mo.policy.h_junction = std::min(c.h_far, h_junction);
  mo.policy.grading_ratio = c.grading_ratio;
  mo.order = c.order;
  mo.element_budget = c.budget;
  return mo;
}

DomainSpec perturbed_spec(const RunConfig& c, double eps) {
  DomainSpec s;
  s.kind = DomainKind::Perturbed;
  s.R0 = c.R0;
  s.eps = eps;
  s.sigma_halfwidth = c.sigma_halfwidth;
  s.tube_length = c.tube_length;
  return s;
}

DomainSpec unperturbed_spec(const RunConfig& c) {
  DomainSpec s;
  s.kind = DomainKind::Unperturbed;
  s.R0 = c.R0;
  return s;
}

SweepOptions sweep_options(const RunConfig& c, int j) {
  SweepOptions o;
  o.R0 = c.R0;
  o.sigma_halfwidth = c.sigma_halfwidth;
  o.tube_length = c.tube_length;
  o.eps = c.eps;
  o.j = j;
  o.mesh = mesh_options(c, c.h_far);
  o.h_junction_factor = c.h_junction_factor;
  o.solver = c.solver;
  o.order = c.order_window;
  o.fit_points = c.fit_points;
  return o;
}

}  // namespace tubespec
