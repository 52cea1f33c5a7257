#include "tubespec/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "tubespec/error.hpp"

namespace tubespec {

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& diffs, int k, int points) {
  if (eps.size() != diffs.size() || points < 3 || static_cast<int>(eps.size()) < points)
    throw Error(ErrorKind::Config, "rate fit needs at least 3 points and matching sizes");
  std::vector<int> idx(eps.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return eps[a] < eps[b]; });
  idx.resize(points);
  std::vector<double> le, ld, e, s;
  for (int i : idx) {
    if (!(diffs[i] > 0)) throw Error(ErrorKind::FitUnstable, "fit unstable: non-positive eigenvalue difference");
    le.push_back(std::log(eps[i]));
    ld.push_back(std::log(diffs[i]));
    e.push_back(eps[i]);
    s.push_back(diffs[i] / std::pow(eps[i], 2 * k));
  }
  RateFit f;
  f.points = points;
  f.slope_raw = ls_slope(le, ld);

  Eigen::MatrixXd A(points, 2);
  Eigen::VectorXd y(points);
  for (int i = 0; i < points; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = e[i];
    y[i] = s[i];
  }
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y);
  f.a = sol[1] / sol[0];
  f.constant = s[0] / (1 + f.a * e[0]);
  double r2 = 0;
  for (int i = 0; i < points; ++i) r2 += std::pow((sol[0] + sol[1] * e[i] - s[i]) / s[i], 2);
  f.residual = std::sqrt(r2 / points);

  std::vector<double> lc;
  for (int i = 0; i < points; ++i) lc.push_back(std::log(diffs[idx[i]] / (1 + f.a * e[i])));
  f.slope_corrected = ls_slope(le, lc);
  return f;
}

SweepResult analyse_branch(std::vector<NestedSolve>& solves, int j, const SweepOptions& opts) {
  SweepResult r;
  r.branch = track_branch(j, solves);
  const auto smallest = std::min_element(solves.begin(), solves.end(),
                                         [](const auto& a, const auto& b) { return a.eps < b.eps; });
  const EigenPair& ref = smallest->unpert[j - 1];
  r.order = extract_vanishing_order(FeField(smallest->omega.mesh, ref.coeffs), ref.lambda, opts.R0, opts.order, opts.p);
  const int k = r.order.k;
  for (std::size_t i = 0; i < r.branch.eps_values.size(); ++i) {
    const double d = r.branch.lambda0[i] - r.branch.lambda_eps[i];
    r.diffs.push_back(d);
    r.scaled.push_back(d / std::pow(r.branch.eps_values[i], 2 * k));
    if (d < 10 * opts.solver.tol * r.branch.lambda0[i]) r.near_zero_flag = true;
  }
  if (!r.near_zero_flag) r.fit = fit_rate(r.branch.eps_values, r.diffs, k, opts.fit_points);
  return r;
}

std::vector<NestedSolve> sweep_solves(const SweepOptions& opts) {
  if (opts.eps.size() < 4) throw Error(ErrorKind::Config, "eps grid needs at least 4 values");
  std::vector<double> eps = opts.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  if (eps.front() > 0.4) throw Error(ErrorKind::Config, "largest eps must not exceed 0.4");
  std::vector<NestedSolve> solves;
  for (double e : eps) {
    DomainSpec spec;
    spec.kind = DomainKind::Perturbed;
    spec.R0 = opts.R0;
    spec.eps = e;
    spec.sigma_halfwidth = opts.sigma_halfwidth;
    spec.tube_length = opts.tube_length;
    MeshOptions mo = opts.mesh;
    mo.policy.h_junction = std::min(mo.policy.h_far, opts.h_junction_factor * e);
    solves.push_back(solve_nested(spec, opts.p, opts.solver, mo));
  }
  return solves;
}

SweepRun run_sweep(const SweepOptions& opts) {
  SweepRun run;
  run.solves = sweep_solves(opts);
  run.result = analyse_branch(run.solves, opts.j, opts);
  return run;
}

double predicted_constant(double c, double m_hat) { return -2 * c * c * m_hat; }

double compare_constant(double fitted_constant, double c, double m_hat) {
  const double pred = predicted_constant(c, m_hat);
  return std::abs(fitted_constant - pred) / std::abs(pred);
}

BlowupReport blowup_compare(const std::vector<NestedSolve>& solves, const BranchTrack& branch, const ProfilePhi& phi,
                            double c) {
  const Mesh& pm = phi.mesh;
  const SubMesh ref = extract_submesh(
      pm,
      [&](int t) {
        const auto& v = pm.triangles[t];
        const Vec2 a = pm.vertices[v[0]], b = pm.vertices[v[1]], d = pm.vertices[v[2]];
        const double cx = (a.x() + b.x() + d.x()) / 3;
        if (cx < 0) return cx > -1;
        return std::max({a.norm(), b.norm(), d.norm()}) <= 2 * (1 + 1e-9);
      },
      [](BoundaryTag) { return BoundaryTag::DirichletWall; });
  const Mesh& rm = ref.mesh;
  const SparseMatrix H1 = assemble_stiffness(rm) + assemble_mass(rm);
  Vector Phi(ref.dof_map.size());
  for (std::size_t i = 0; i < ref.dof_map.size(); ++i) Phi[i] = phi.U[ref.dof_map[i]];
  const Vector Psi = interpolate(rm, [&](const Vec2& x) { return x.x() > 0 ? psi_hat(phi.k, x) : 0.0; });
  const double nPhi = std::sqrt(Phi.dot(H1 * Phi));
  const std::vector<Vec2> nodes = rm.nodes();

  BlowupReport rep;
  for (std::size_t i = 0; i < branch.eps_values.size(); ++i) {
    const double eps = branch.eps_values[i];
    const NestedSolve* s = nullptr;
    for (const auto& cand : solves)
      if (cand.eps == eps) s = &cand;
    if (!s) throw Error(ErrorKind::Numerical, "blow-up: no solve for eps");
    const FeField f(s->mesh_eps, s->pert[branch.index[i]].coeffs);
    const FieldProbe probe(f);
    const double scale = 1.0 / (c * std::pow(eps, phi.k));
    Vector v(nodes.size());
    for (std::size_t n = 0; n < nodes.size(); ++n) v[n] = scale * probe.value(eps * nodes[n]);
    const Vector e1 = v - Phi, e2 = v - Psi;
    rep.eps.push_back(eps);
    rep.distance.push_back(std::sqrt(e1.dot(H1 * e1)) / nPhi);
    rep.distance_psi.push_back(std::sqrt(e2.dot(H1 * e2)) / nPhi);
  }
  return rep;
}

double quadratic_form_max(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) throw Error(ErrorKind::Numerical, "quadratic form needs a square matrix");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::Numerical, "quadratic form matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double quadratic_form_ratio(const QuadraticFormFamily& Q, double eps) {
  return quadratic_form_max(Q.M(eps)) / (Q.sigma(eps) * Q.mu(eps));
}

}  // namespace tubespec
