#include "tubespec/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "tubespec/error.hpp"

namespace tubespec {

namespace {

double max_vertex_norm(const Mesh& m, int t) {
  const auto& v = m.triangles[t];
  return std::max({m.vertices[v[0]].norm(), m.vertices[v[1]].norm(), m.vertices[v[2]].norm()});
}

double centroid_x1(const Mesh& m, int t) {
  const auto& v = m.triangles[t];
  return (m.vertices[v[0]].x() + m.vertices[v[1]].x() + m.vertices[v[2]].x()) / 3.0;
}

BoundaryTag cut_tag(BoundaryTag t) {
  if (t == BoundaryTag::Interface) return BoundaryTag::OuterArc;
  return BoundaryTag::DirichletWall;
}

SubMesh pi_submesh(const Mesh& m, double R) {
  return extract_submesh(
      m, [&](int t) { return centroid_x1(m, t) < 0 || max_vertex_norm(m, t) <= R * (1 + 1e-9); }, cut_tag);
}

SubMesh ball_submesh(const Mesh& m, double R) {
  return extract_submesh(
      m, [&](int t) { return centroid_x1(m, t) > 0 && max_vertex_norm(m, t) <= R * (1 + 1e-9); }, cut_tag);
}

std::vector<int> all_boundary_dofs(const Mesh& m) {
  std::vector<int> d = m.dofs_on_edges(m.boundary_edges);
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

// f_i = int_Sigma phi_i d psi_hat/dx1 ds, with d psi_hat/dx1 = k x2^{k-1} on x1 = 0
Vector sigma_load(const Mesh& m, int k, double scale) {
  Vector f = Vector::Zero(m.num_dofs());
  const GaussRule g = gauss_legendre(3);
  const bool p2 = m.order == ElementOrder::P2;
  for (const auto& e : m.edges_with_tag(BoundaryTag::JunctionSigma)) {
    const Vec2& a = m.vertices[e.a];
    const Vec2& b = m.vertices[e.b];
    const double len = (b - a).norm();
    const int mid = p2 ? m.num_vertices() + m.find_edge(e.a, e.b) : -1;
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      const double s = 0.5 * (1 + g.x[q]);
      const Vec2 x = a + s * (b - a);
      const double w = 0.5 * g.w[q] * len * scale * k * std::pow(x.y(), k - 1);
      if (p2) {
        f[e.a] += w * (1 - s) * (1 - 2 * s);
        f[e.b] += w * s * (2 * s - 1);
        f[mid] += w * 4 * s * (1 - s);
      } else {
        f[e.a] += w * (1 - s);
        f[e.b] += w * s;
      }
    }
  }
  return f;
}

// int_Sigma d psi_hat/dx1 W ds with W evaluated from the adjacent element
double sigma_flux(const Mesh& m, const Vector& W, int k, double scale) {
  const GaussRule g = gauss_legendre(5);
  const FeField field(m, W);
  double s = 0;
  for (const auto& e : m.edges_with_tag(BoundaryTag::JunctionSigma)) {
    const Vec2& a = m.vertices[e.a];
    const Vec2& b = m.vertices[e.b];
    const int t = m.edge_tris[m.find_edge(e.a, e.b)][0];
    const double len = (b - a).norm();
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      const Vec2 x = a + 0.5 * (1 + g.x[q]) * (b - a);
      s += 0.5 * g.w[q] * len * scale * k * std::pow(x.y(), k - 1) * field.value(t, x);
    }
  }
  return s;
}

Vector psi_extended(const Mesh& m, int k, double scale) {
  return interpolate(m, [&](const Vec2& x) { return x.x() > 0 ? scale * psi_hat(k, x) : 0.0; });
}

void check_k(int k) {
  if (k < 1 || k > 3) throw Error(ErrorKind::Config, "exterior order k must lie in {1,2,3}");
}

}  // namespace

Mesh exterior_mesh(double R, const std::vector<double>& interface_radii, const ExteriorOptions& opts) {
  DomainSpec spec;
  spec.kind = DomainKind::ExteriorTruncated;
  spec.R_trunc = R;
  spec.exterior_tube_length = opts.tube_length;
  spec.interface_radii = interface_radii;
  MeshOptions mo;
  mo.policy.h_far = opts.h_far;
  mo.policy.h_junction = opts.h_junction;
  mo.policy.grading_ratio = opts.grading_ratio;
  mo.policy.far_slope = opts.far_slope;
  mo.order = opts.order;
  mo.element_budget = opts.element_budget;
  return generate_mesh(build_domain(spec), mo);
}

std::vector<ExteriorSolution> solve_exterior_grid(int k, const std::vector<double>& R_values,
                                                  const ExteriorOptions& opts, double data_scale) {
  check_k(k);
  if (R_values.empty()) throw Error(ErrorKind::Config, "empty R grid");
  for (double R : R_values)
    if (!(R >= 2)) throw Error(ErrorKind::Config, "exterior radii must be at least 2");
  const double Rmax = *std::max_element(R_values.begin(), R_values.end());
  std::vector<double> inner;
  for (double R : R_values)
    if (R < Rmax) inner.push_back(R);
  const Mesh big = exterior_mesh(Rmax, inner, opts);

  std::vector<ExteriorSolution> out;
  for (double R : R_values) {
    ExteriorSolution s;
    s.R = R;
    s.k = k;
    s.data_scale = data_scale;
    s.domain = pi_submesh(big, R);
    const Mesh& m = s.domain.mesh;
    const auto K = assemble_stiffness(m);
    const Vector f = sigma_load(m, k, data_scale);
    const auto fixed = all_boundary_dofs(m);
    s.W = solve_constrained(K, f, fixed, Vector::Zero(fixed.size()));
    const double WKW = s.W.dot(K * s.W);
    s.g_R = -WKW;
    s.m_energy = -0.5 * WKW;
    s.m_flux = -0.5 * sigma_flux(m, s.W, k, data_scale);
    s.psi_energy = data_scale * data_scale * k * std::numbers::pi / 2 * std::pow(R, 2 * k);
    s.dirichlet_energy = s.psi_energy + s.g_R;
    s.U = psi_extended(m, k, data_scale) + s.W;
    out.push_back(std::move(s));
  }
  return out;
}

ExteriorSolution solve_U_R(int k, double R, const ExteriorOptions& opts, double data_scale) {
  return std::move(solve_exterior_grid(k, {R}, opts, data_scale).front());
}

MkEstimate extrapolate_mk(const std::vector<double>& R, const std::vector<double>& g, int k) {
  if (R.size() < 3 || R.size() != g.size()) throw Error(ErrorKind::Config, "m_k extrapolation needs at least 3 radii");
  const int n = static_cast<int>(R.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::pow(R[i], -2.0 * k);
    y[i] = g[i];
  }
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y);
  MkEstimate e;
  e.k = k;
  e.m_hat = 0.5 * sol[0];
  e.C_hat = -2 * e.m_hat;
  e.a = sol[1];
  e.fit_exponent = 2 * k;
  e.fit_residual = (A * sol - y).norm() / std::sqrt(static_cast<double>(n)) / std::max(std::abs(sol[0]), 1e-300);
  e.R_values = R;
  e.g_values = g;
  if (e.fit_residual > 1e-2) throw Error(ErrorKind::FitUnstable, "fit unstable: relative residual above 1e-2");
  return e;
}

MkEstimate extrapolate_mk(const std::vector<ExteriorSolution>& sols, int k) {
  std::vector<double> R, g;
  for (const auto& s : sols) {
    R.push_back(s.R);
    g.push_back(s.g_R);
  }
  return extrapolate_mk(R, g, k);
}

ProfilePhi build_Phi(int k, double R_host, const ExteriorOptions& opts) {
  check_k(k);
  if (!(R_host >= 2)) throw Error(ErrorKind::Config, "R_host must be at least 2");
  ProfilePhi phi;
  phi.k = k;
  phi.R_host = R_host;
  phi.R_solve = 4 * R_host;
  std::vector<double> radii;
  for (double r = 2; r < R_host; r *= 2) radii.push_back(r);
  radii.push_back(R_host);
  phi.mesh = exterior_mesh(phi.R_solve, radii, opts);
  const auto K = assemble_stiffness(phi.mesh);
  phi.sigma_load = sigma_load(phi.mesh, k, 1.0);
  const auto fixed = all_boundary_dofs(phi.mesh);
  phi.W = solve_constrained(K, phi.sigma_load, fixed, Vector::Zero(fixed.size()));
  phi.m_energy = -0.5 * phi.W.dot(K * phi.W);
  phi.U = psi_extended(phi.mesh, k, 1.0) + phi.W;
  return phi;
}

ZSolution solve_Z_R(const ProfilePhi& phi, double R) {
  bool has_arc = false;
  for (const auto& e : phi.mesh.interface_edges)
    if (std::abs(e.arc_radius - R) <= 1e-9 * R) has_arc = true;
  if (!has_arc) throw Error(ErrorKind::Config, "Z_R radius must be an interface arc of the Phi mesh");

  ZSolution z;
  z.R = R;
  z.ball = ball_submesh(phi.mesh, R);
  const Mesh& b = z.ball.mesh;
  const auto Kb = assemble_stiffness(b);
  std::vector<int> dofs;
  std::vector<double> vals;
  const auto wall = b.boundary_dofs({BoundaryTag::DirichletWall});
  std::vector<char> seen(b.num_dofs(), 0);
  for (int d : wall) {
    if (seen[d]) continue;
    seen[d] = 1;
    dofs.push_back(d);
    vals.push_back(0.0);
  }
  for (int d : b.boundary_dofs({BoundaryTag::OuterArc})) {
    if (seen[d]) continue;
    seen[d] = 1;
    dofs.push_back(d);
    vals.push_back(phi.W[z.ball.dof_map[d]]);
  }
  z.z = solve_constrained(Kb, Vector::Zero(b.num_dofs()), dofs, Eigen::Map<Vector>(vals.data(), vals.size()));
  z.energy_z = z.z.dot(Kb * z.z);
  z.Z = psi_extended(b, phi.k, 1.0) + z.z;

  const SubMesh pi = pi_submesh(phi.mesh, R);
  const auto Kp = assemble_stiffness(pi.mesh);
  Vector Wr(pi.dof_map.size());
  for (std::size_t i = 0; i < pi.dof_map.size(); ++i) Wr[i] = phi.W[pi.dof_map[i]];
  z.energy_W = Wr.dot(Kp * Wr);
  z.sigma_term = 2 * phi.sigma_load.dot(phi.W);
  z.F_R = z.sigma_term + z.energy_z - z.energy_W;
  return z;
}

LimitFit extrapolate_F(const std::vector<double>& R, const std::vector<double>& F, int k) {
  if (R.size() < 2 || R.size() != F.size()) throw Error(ErrorKind::Config, "F_R extrapolation needs at least 2 radii");
  const int n = static_cast<int>(R.size());
  LimitFit fit;
  fit.exponent = k % 2 ? 2 : 4;
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::pow(R[i], -fit.exponent);
    y[i] = F[i];
  }
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y);
  fit.limit = sol[0];
  fit.a = sol[1];
  fit.residual = (A * sol - y).norm() / std::sqrt(static_cast<double>(n)) / std::max(std::abs(sol[0]), 1e-300);
  return fit;
}

ZetaCheck zeta_identity_check(const ProfilePhi& phi, double m_hat) {
  const FeField f = phi.field();
  const FieldProbe probe(f);
  const GaussRule g = gauss_legendre(8);
  const int panels = 128;
  const double d = std::numbers::pi / panels;
  double s = 0;
  for (int i = 0; i < panels; ++i)
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      const double th = d * (i + 0.5 * (1 + g.x[q]));
      s += 0.5 * d * g.w[q] * probe.value(Vec2(std::sin(th), std::cos(th))) * std::sin(phi.k * th);
    }
  ZetaCheck z;
  z.zeta1 = s;
  z.predicted = std::numbers::pi / 2 - m_hat / phi.k;
  z.rel_err = std::abs(z.zeta1 - z.predicted) / std::abs(z.predicted);
  z.C_route = 2 * phi.k * (z.zeta1 - std::numbers::pi / 2);
  return z;
}

InequalitySides hardy_2d_check(const std::function<double(double)>& rho, const std::function<double(double)>& drho,
                               double a, double b, int panels) {
  if (!(a > 0) || !(b > a)) throw Error(ErrorKind::Config, "Hardy profile support must satisfy 0 < a < b");
  const GaussRule g = gauss_legendre(8);
  const double d = (b - a) / panels;
  double lhs = 0, rhs = 0;
  for (int i = 0; i < panels; ++i)
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      const double r = a + d * (i + 0.5 * (1 + g.x[q]));
      const double w = 0.5 * d * g.w[q];
      const double p = rho(r), dp = drho(r);
      lhs += w * p * p / r;
      rhs += w * (dp * dp + p * p / (4 * r * r)) * r;
    }
  return {std::numbers::pi / 4 * lhs, std::numbers::pi * rhs};
}

}  // namespace tubespec
