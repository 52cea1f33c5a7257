#include "tubespec/almgren.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "tubespec/eigensolver.hpp"
#include "tubespec/error.hpp"

namespace tubespec {

namespace {

double outer_radius(const Mesh& m) {
  double r = 0;
  for (const auto& v : m.vertices) r = std::max(r, v.norm());
  return r;
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

FrequencyProfile frequency_profile(const FeField& u, double lambda, double eps, const std::vector<double>& radii,
                                   const WeightField& p) {
  const double R = outer_radius(*u.mesh);
  FrequencyProfile prof;
  prof.lambda = lambda;
  prof.eps = eps;
  ClipOptions co;
  co.include_tube = eps > 0;
  for (double r : radii) {
    if (!(r > 2 * eps) || r > 0.5 * R * (1 + 1e-12))
      throw Error(ErrorKind::Config, "frequency radius must lie in (2 eps, R/2]");
    const ClippedRule rule = clip_quadrature(*u.mesh, r, co);
    const double E = integrate(rule.area, [&](const QuadPoint& q) {
      const double v = u.value(q.elem, q.x);
      return u.gradient(q.elem, q.x).squaredNorm() - lambda * p(q.x) * v * v;
    });
    const double H = integrate(rule.arc, [&](const QuadPoint& q) {
                       const double v = u.value(q.elem, q.x);
                       return v * v;
                     }) /
                     r;
    prof.radii.push_back(r);
    prof.E.push_back(E);
    prof.H.push_back(H);
    const bool ok = H > 0;
    prof.valid.push_back(ok);
    prof.N.push_back(ok ? E / H : std::numeric_limits<double>::quiet_NaN());
  }
  return prof;
}

double angular_coefficient(const FieldProbe& probe, double r, int k, int points) {
  const GaussRule g = gauss_legendre(8);
  const int panels = std::max(1, points / 8);
  const double d = std::numbers::pi / panels;
  double s = 0;
  for (int i = 0; i < panels; ++i)
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      const double th = d * (i + 0.5 * (1 + g.x[q]));
      s += 0.5 * d * g.w[q] * probe.value(Vec2(r * std::sin(th), r * std::cos(th))) * std::sin(k * th);
    }
  return 2.0 / std::numbers::pi * s / std::pow(r, k);
}

VanishingOrder extract_vanishing_order(const FeField& u, double lambda, double R0, const OrderOptions& opts,
                                       const WeightField& p) {
  if (opts.samples < 3 || !(opts.window_lo > 0) || !(opts.window_hi > opts.window_lo))
    throw Error(ErrorKind::Config, "vanishing-order window needs lo < hi and at least 3 samples");
  VanishingOrder vo;
  vo.r_lo = opts.window_lo * R0;
  vo.r_hi = opts.window_hi * R0;
  std::vector<double> radii;
  for (int i = 0; i < opts.samples; ++i) radii.push_back(vo.r_lo + (vo.r_hi - vo.r_lo) * i / (opts.samples - 1));

  ClipOptions co;
  std::vector<double> N;
  for (double r : radii) {
    const ClippedRule rule = clip_quadrature(*u.mesh, r, co);
    const double E = integrate(rule.area, [&](const QuadPoint& q) {
      const double v = u.value(q.elem, q.x);
      return u.gradient(q.elem, q.x).squaredNorm() - lambda * p(q.x) * v * v;
    });
    const double H = integrate(rule.arc, [&](const QuadPoint& q) {
                       const double v = u.value(q.elem, q.x);
                       return v * v;
                     }) /
                     r;
    if (H > 0) N.push_back(E / H);
  }
  if (N.empty()) throw Error(ErrorKind::OrderUncertain, "order uncertain: H vanishes across the window");
  vo.median_N = median(N);
  const double k = std::round(vo.median_N);
  if (k < 1 || std::abs(vo.median_N - k) > 0.25)
    throw Error(ErrorKind::OrderUncertain, "order uncertain: median frequency " + std::to_string(vo.median_N));
  vo.k = static_cast<int>(k);

  FieldProbe probe(u);
  Eigen::MatrixXd A(radii.size(), 2);
  Eigen::VectorXd y(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = radii[i] * radii[i];
    y[i] = angular_coefficient(probe, radii[i], vo.k);
  }
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y);
  vo.c = sol[0];
  vo.fit_residual = (A * sol - y).norm() / std::sqrt(static_cast<double>(radii.size()));
  return vo;
}

PohozaevResult pohozaev_residual(const FeField& u, double lambda, double r, const WeightField& p) {
  const ClippedRule rule = clip_quadrature(*u.mesh, r);
  PohozaevResult res;
  double dn2 = 0;
  for (const auto& q : rule.arc) {
    const Vec2 g = u.gradient(q.elem, q.x);
    const double dn = g.dot(q.x) / r;
    res.arc_grad_sq += q.w * g.squaredNorm();
    dn2 += q.w * dn * dn;
  }
  const double vol = integrate(rule.area, [&](const QuadPoint& q) {
    return p(q.x) * u.value(q.elem, q.x) * u.gradient(q.elem, q.x).dot(q.x);
  });
  res.lhs = res.arc_grad_sq;
  res.rhs = 2 * dn2 + 2 * lambda / r * vol;
  return res;
}

double steklov_m_sigma(double sigma, const SteklovOptions& opts) {
  if (sigma < 0 || sigma >= 1) throw Error(ErrorKind::Config, "sigma must lie in [0,1)");
  DomainSpec spec;
  spec.kind = DomainKind::HalfBall;
  spec.R_trunc = 1.0;
  spec.slit_halfwidth = sigma;
  GradingPolicy pol;
  pol.h_far = opts.h;
  pol.h_junction = std::min(opts.h, opts.h_junction);
  Mesh mesh = generate_mesh(build_domain(spec), pol, opts.order);
  const auto K = assemble_stiffness(mesh);
  const auto B = assemble_boundary_mass(mesh, BoundaryTag::OuterArc);
  auto red = apply_dirichlet(K, mesh.boundary_dofs({BoundaryTag::DirichletWall}));
  const auto Br = restrict_matrix(B, red.map);
  SolverConfig cfg;
  cfg.num_eigs = 1;
  return solve_generalized_eig(red.A, Br, cfg).front().lambda;
}

double faber_krahn_constant() {
  const double j01 = 2.404825557695773;
  return 1.0 / (std::numbers::pi * j01 * j01);
}

double tube_kappa() { return faber_krahn_constant() * 2.0 * 2.0; }

double faber_krahn_lower_bound(double area) { return 1.0 / (faber_krahn_constant() * area); }

TubePoincare tube_poincare_check(const FeField& u, double eps) {
  TubePoincare t;
  t.kappa = tube_kappa();
  const Mesh& m = *u.mesh;
  for (const auto& q : mesh_rule(m, 6)) {
    const auto& v = m.triangles[q.elem];
    if (m.vertices[v[0]].x() + m.vertices[v[1]].x() + m.vertices[v[2]].x() >= 0) continue;
    const double val = u.value(q.elem, q.x);
    t.lhs += q.w * val * val;
    t.grad_sq += q.w * u.gradient(q.elem, q.x).squaredNorm();
  }
  t.rhs = t.kappa * eps * t.grad_sq;
  return t;
}

InequalitySides poincare_type_check(const FeField& u, double r) {
  ClipOptions co;
  co.include_tube = false;
  const ClippedRule rule = clip_quadrature(*u.mesh, r, co);
  double l2 = 0, g2 = 0, a2 = 0;
  for (const auto& q : rule.area) {
    const double v = u.value(q.elem, q.x);
    l2 += q.w * v * v;
    g2 += q.w * u.gradient(q.elem, q.x).squaredNorm();
  }
  for (const auto& q : rule.arc) {
    const double v = u.value(q.elem, q.x);
    a2 += q.w * v * v;
  }
  return {l2 / (r * r), g2 + a2 / r};
}

bool frequency_bound_check(const FrequencyProfile& profile, int k) {
  double nmax = -std::numeric_limits<double>::infinity();
  double n_last = 0;
  double r_last = -1;
  for (std::size_t i = 0; i < profile.radii.size(); ++i) {
    if (!profile.valid[i]) return false;
    nmax = std::max(nmax, profile.N[i]);
    if (profile.radii[i] > r_last) {
      r_last = profile.radii[i];
      n_last = profile.N[i];
    }
  }
  return nmax <= 3 * std::max<double>(k, n_last);
}

}  // namespace tubespec
