#include "tubespec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tubespec/error.hpp"

namespace tubespec {

double bessel_j(int m, double x) {
  const long double h = 0.5L * x;
  long double term = 1.0L;
  for (int i = 1; i <= m; ++i) term *= h / i;
  long double sum = term;
  const long double h2 = h * h;
  for (int k = 1; k < 500; ++k) {
    term *= -h2 / (static_cast<long double>(k) * (k + m));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::max(1.0L, std::fabs(sum))) break;
  }
  return static_cast<double>(sum);
}

double bessel_zero(int m, int n) {
  if (m < 0 || n < 1) throw Error(ErrorKind::Config, "bessel_zero needs m >= 0, n >= 1");
  const double step = 0.05;
  double a = std::max(0.5, static_cast<double>(m));
  double fa = bessel_j(m, a);
  int found = 0;
  while (true) {
    const double b = a + step;
    const double fb = bessel_j(m, b);
    if (fa * fb <= 0 && fa != 0) {
      if (++found == n) {
        double lo = a, hi = b, flo = fa;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = bessel_j(m, mid);
          if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    a = b;
    fa = fb;
  }
}

double BesselOracle::value(const Vec2& x) const {
  return A * bessel_j(m, j * x.norm() / R0) * std::sin(m * polar_angle(x));
}

Vec2 BesselOracle::gradient(const Vec2& x) const {
  const double r = x.norm();
  if (r == 0) return m == 1 ? Vec2(leading_coefficient(), 0) : Vec2(0, 0);
  const double th = polar_angle(x);
  const double z = j * r / R0;
  // J_m' = (J_{m-1} - J_{m+1}) / 2
  const double dJ = 0.5 * (bessel_j(m - 1, z) - bessel_j(m + 1, z)) * j / R0;
  const double ur = A * dJ * std::sin(m * th);
  const double ut = A * bessel_j(m, z) * m * std::cos(m * th) / r;
  // e_r = (sin th, cos th), e_th = (cos th, -sin th)
  return Vec2(ur * std::sin(th) + ut * std::cos(th), ur * std::cos(th) - ut * std::sin(th));
}

double BesselOracle::leading_coefficient() const {
  return A * std::pow(std::sqrt(lambda) / 2, m) / std::tgamma(m + 1.0);
}

BesselOracle bessel_eigen(int m, int n, double R0) {
  if (m < 1 || n < 1) throw Error(ErrorKind::Config, "bessel_eigen needs m, n >= 1");
  BesselOracle o;
  o.m = m;
  o.n = n;
  o.R0 = R0;
  o.j = bessel_zero(m, n);
  o.lambda = std::pow(o.j / R0, 2);
  const double jp = bessel_j(m + 1, o.j);
  o.A = 1.0 / std::sqrt(std::numbers::pi / 2 * R0 * R0 / 2 * jp * jp);
  return o;
}

std::vector<BesselOracle> half_disk_spectrum(double R0, int count) {
  std::vector<BesselOracle> all;
  for (int m = 1; m <= count + 1; ++m)
    for (int n = 1; n <= count + 1; ++n) all.push_back(bessel_eigen(m, n, R0));
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  all.resize(std::min<std::size_t>(all.size(), count));
  return all;
}

std::vector<EigenPair> solve_dirichlet(const Mesh& mesh, const WeightField& p, const SolverConfig& cfg) {
  std::vector<int> fixed;
  for (const auto& e : mesh.boundary_edges) {
    for (int d : mesh.dofs_on_edges({e})) fixed.push_back(d);
  }
  std::sort(fixed.begin(), fixed.end());
  fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
  const auto K = assemble_stiffness(mesh);
  const auto M = assemble_mass(mesh, p);
  auto red = apply_dirichlet(K, fixed);
  const auto Mr = restrict_matrix(M, red.map);
  auto pairs = solve_generalized_eig(red.A, Mr, cfg);
  for (auto& pr : pairs) pr.coeffs = red.map.expand(pr.coeffs);
  return pairs;
}

void fix_sign(const Mesh& mesh, EigenPair& pair, double r_probe) {
  FeField f(mesh, pair.coeffs);
  FieldProbe probe(f);
  const int n = 256;
  double best = 0;
  int best_k = 0;
  for (int k = 1; k <= 6; ++k) {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      const double th = std::numbers::pi * (i + 0.5) / n;
      s += probe.value(Vec2(r_probe * std::sin(th), r_probe * std::cos(th))) * std::sin(k * th);
    }
    if (std::abs(s) > std::abs(best)) {
      best = s;
      best_k = k;
    }
  }
  if (best < 0) pair.coeffs = -pair.coeffs;
  pair.sign_convention = "c_" + std::to_string(best_k) + " > 0 at r=" + std::to_string(r_probe);
}

namespace {

Mesh make_mesh(const DomainSpec& spec, const MeshOptions& opts) {
  return generate_mesh(build_domain(spec), opts);
}

}  // namespace

SpectralResult solve_unperturbed(const DomainSpec& spec, const WeightField& p, const SolverConfig& cfg,
                                 const MeshOptions& mesh_opts) {
  if (spec.kind != DomainKind::Unperturbed) throw Error(ErrorKind::Config, "solve_unperturbed needs an Unperturbed spec");
  SpectralResult r;
  r.mesh = make_mesh(spec, mesh_opts);
  r.pairs = solve_dirichlet(r.mesh, p, cfg);
  for (auto& pr : r.pairs) fix_sign(r.mesh, pr, 0.1 * spec.R0);
  return r;
}

SpectralResult solve_perturbed(const DomainSpec& spec, const WeightField& p, const SolverConfig& cfg,
                               const MeshOptions& mesh_opts) {
  if (spec.kind != DomainKind::Perturbed) throw Error(ErrorKind::Config, "solve_perturbed needs a Perturbed spec");
  SpectralResult r;
  r.mesh = make_mesh(spec, mesh_opts);
  r.pairs = solve_dirichlet(r.mesh, p, cfg);
  for (auto& pr : r.pairs) fix_sign(r.mesh, pr, 0.1 * spec.R0);
  return r;
}

NestedSolve solve_nested(const DomainSpec& spec, const WeightField& p, const SolverConfig& cfg,
                         const MeshOptions& mesh_opts) {
  if (spec.kind != DomainKind::Perturbed) throw Error(ErrorKind::Config, "solve_nested needs a Perturbed spec");
  NestedSolve s;
  s.eps = spec.eps;
  s.mesh_eps = make_mesh(spec, mesh_opts);
  const Mesh& me = s.mesh_eps;
  s.omega = extract_submesh(
      me,
      [&](int t) {
        const auto& v = me.triangles[t];
        return me.vertices[v[0]].x() + me.vertices[v[1]].x() + me.vertices[v[2]].x() > 0;
      },
      [](BoundaryTag) { return BoundaryTag::DirichletWall; });
  s.M_omega = assemble_mass(s.omega.mesh, p);
  s.pert = solve_dirichlet(me, p, cfg);
  s.unpert = solve_dirichlet(s.omega.mesh, p, cfg);
  for (auto& pr : s.pert) fix_sign(me, pr, 0.1 * spec.R0);
  for (auto& pr : s.unpert) fix_sign(s.omega.mesh, pr, 0.1 * spec.R0);
  return s;
}

Vector restrict_to_omega(const NestedSolve& s, const Vector& u_eps) {
  Vector v(s.omega.dof_map.size());
  for (std::size_t i = 0; i < s.omega.dof_map.size(); ++i) v[i] = u_eps[s.omega.dof_map[i]];
  return v;
}

BranchTrack track_branch(int j, std::vector<NestedSolve>& solves) {
  BranchTrack bt;
  bt.j = j;
  for (auto& s : solves) {
    if (j < 1 || j > static_cast<int>(s.unpert.size())) throw Error(ErrorKind::Config, "branch index beyond num_eigs");
    const EigenPair& ref = s.unpert[j - 1];
    if (ref.degenerate) throw Error(ErrorKind::SimplicityViolated, "simplicity violated: lambda_j is numerically degenerate");
    const Vector Mref = s.M_omega * ref.coeffs;
    int best = -1;
    double best_ov = 0;
    for (int i = 0; i < static_cast<int>(s.pert.size()); ++i) {
      const double ov = restrict_to_omega(s, s.pert[i].coeffs).dot(Mref);
      const bool better = std::abs(ov) > std::abs(best_ov) + 1e-3 ||
                          (std::abs(std::abs(ov) - std::abs(best_ov)) <= 1e-3 && best >= 0 &&
                           std::abs(s.pert[i].lambda - ref.lambda) < std::abs(s.pert[best].lambda - ref.lambda));
      if (best < 0 || better) {
        best = i;
        best_ov = ov;
      }
    }
    if (best < 0 || std::abs(best_ov) < 0.5)
      throw Error(ErrorKind::BranchAmbiguity, "branch ambiguity: best overlap below 0.5");
    if (s.pert[best].degenerate)
      throw Error(ErrorKind::BranchAmbiguity, "branch ambiguity: selected perturbed eigenvalue is degenerate");
    if (best_ov < 0) {
      s.pert[best].coeffs = -s.pert[best].coeffs;
      best_ov = -best_ov;
      s.pert[best].sign_convention = "overlap with phi_j > 0";
    }
    const Vector d = restrict_to_omega(s, s.pert[best].coeffs) - ref.coeffs;
    bt.eps_values.push_back(s.eps);
    bt.lambda_eps.push_back(s.pert[best].lambda);
    bt.lambda0.push_back(ref.lambda);
    bt.overlaps.push_back(best_ov);
    bt.l2_diff.push_back(std::sqrt(std::max(0.0, d.dot(s.M_omega * d))));
    bt.index.push_back(best);
  }
  return bt;
}

}  // namespace tubespec
