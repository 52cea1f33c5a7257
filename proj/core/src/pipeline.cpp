#include "tubespec/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>

#include "json.hpp"
#include "tubespec/error.hpp"
#include "tubespec/report.hpp"

namespace tubespec {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Config, "cannot create output directory " + dir);
}

json mesh_entry(const std::string& file, const Mesh& m) {
  return {{"file", file},
          {"vertices", m.num_vertices()},
          {"triangles", m.num_triangles()},
          {"dofs", m.num_dofs()},
          {"order", m.order == ElementOrder::P2 ? "P2" : "P1"}};
}

void log(const std::string& s) { std::cerr << s << '\n'; }

struct Branches {
  std::vector<SweepResult> results;
  const SweepResult* with_k(int k) const {
    for (const auto& r : results)
      if (r.order.k == k) return &r;
    return nullptr;
  }
};

Branches analyse_all(const RunConfig& cfg, std::vector<NestedSolve>& solves) {
  Branches b;
  for (int j : cfg.branches) b.results.push_back(analyse_branch(solves, j, sweep_options(cfg, j)));
  return b;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

std::string eps_label(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

std::vector<NestedSolve> run_solves(const RunConfig& cfg) { return sweep_solves(sweep_options(cfg, cfg.branches.front())); }

MkReport run_mk(const RunConfig& cfg, int k) {
  MkReport r;
  r.k = k;
  r.sols = solve_exterior_grid(k, cfg.R_grid, cfg.exterior);
  r.estimate = extrapolate_mk(r.sols, k);
  for (const auto& s : r.sols) r.agreement = std::max(r.agreement, rel(s.m_flux, s.m_energy));
  const ProfilePhi phi = build_Phi(k, cfg.phi_R, cfg.exterior);
  r.zeta = zeta_identity_check(phi, r.estimate.m_hat);
  for (double R = 2; R <= cfg.phi_R * (1 + 1e-12); R *= 2) {
    r.F_radii.push_back(R);
    r.F_values.push_back(solve_Z_R(phi, R).F_R);
  }
  r.F_fit = extrapolate_F(r.F_radii, r.F_values, k);
  return r;
}

bool Verdict::pass() const {
  return !criteria.empty() && std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass; });
}

void cmd_mesh(const RunConfig& cfg, const std::string& out) {
  ensure_dir(out);
  json manifest;
  manifest["meshes"] = json::array();
  {
    const Mesh m = generate_mesh(build_domain(unperturbed_spec(cfg)), mesh_options(cfg, cfg.h_junction_min));
    write_mesh(m, join(out, "omega.mesh"));
    json e = mesh_entry("omega.mesh", m);
    e["kind"] = "Unperturbed";
    manifest["meshes"].push_back(e);
  }
  for (double eps : cfg.eps) {
    const Mesh m = generate_mesh(build_domain(perturbed_spec(cfg, eps)), mesh_options(cfg, cfg.h_junction_factor * eps));
    const std::string f = "omega_eps_" + eps_label(eps) + ".mesh";
    write_mesh(m, join(out, f));
    json e = mesh_entry(f, m);
    e["kind"] = "Perturbed";
    e["eps"] = eps;
    manifest["meshes"].push_back(e);
  }
  for (double R : cfg.R_grid) {
    const Mesh m = exterior_mesh(R, {}, cfg.exterior);
    const std::string f = "pi_R" + eps_label(R) + ".mesh";
    write_mesh(m, join(out, f));
    json e = mesh_entry(f, m);
    e["kind"] = "ExteriorTruncated";
    e["R"] = R;
    manifest["meshes"].push_back(e);
  }
  write_text(join(out, "manifest.json"), manifest.dump(2));
}

void cmd_eig(const RunConfig& cfg, const std::string& out) {
  ensure_dir(join(out, "fields"));
  std::vector<NestedSolve> solves = run_solves(cfg);
  CsvWriter csv(join(out, "branch.csv"), {"j", "eps", "lambda0", "lambda_eps", "diff", "overlap", "index"});
  for (int j : cfg.branches) {
    const BranchTrack b = track_branch(j, solves);
    for (std::size_t i = 0; i < b.eps_values.size(); ++i) {
      csv << j << b.eps_values[i] << b.lambda0[i] << b.lambda_eps[i] << b.lambda0[i] - b.lambda_eps[i] << b.overlaps[i]
          << b.index[i] + 1;
      csv.end_row();
      const NestedSolve& s = solves[i];
      write_field(join(out, "fields/phi_j" + std::to_string(j) + "_eps_" + eps_label(s.eps) + ".field"),
                  s.pert[b.index[i]].coeffs);
    }
    write_field(join(out, "fields/phi0_j" + std::to_string(j) + ".field"), solves.back().unpert[j - 1].coeffs);
  }
}

void cmd_frequency(const RunConfig& cfg, const std::string& out) {
  ensure_dir(out);
  std::vector<NestedSolve> solves = run_solves(cfg);
  CsvWriter csv(join(out, "frequency.csv"), {"j", "eps", "r", "E", "H", "N", "valid"});
  CsvWriter ord(join(out, "order.csv"), {"j", "k", "c", "median_N", "r_lo", "r_hi", "fit_residual", "certified"});
  const int samples = 12;
  auto emit = [&](int j, const FrequencyProfile& p) {
    for (std::size_t i = 0; i < p.radii.size(); ++i) {
      csv << j << p.eps << p.radii[i] << p.E[i] << p.H[i] << p.N[i] << static_cast<int>(p.valid[i]);
      csv.end_row();
    }
  };
  for (int j : cfg.branches) {
    const NestedSolve& s0 = solves.back();
    const EigenPair& ref = s0.unpert[j - 1];
    const FeField u0(s0.omega.mesh, ref.coeffs);
    std::vector<double> radii;
    for (int i = 1; i <= samples; ++i) radii.push_back(0.5 * cfg.R0 * i / samples);
    emit(j, frequency_profile(u0, ref.lambda, 0, radii));
    const VanishingOrder vo = extract_vanishing_order(u0, ref.lambda, cfg.R0, cfg.order_window);
    ord << j << vo.k << vo.c << vo.median_N << vo.r_lo << vo.r_hi << vo.fit_residual << static_cast<int>(vo.certified());
    ord.end_row();
    const BranchTrack b = track_branch(j, solves);
    for (std::size_t i = 0; i < solves.size(); ++i) {
      const NestedSolve& s = solves[i];
      std::vector<double> r;
      for (double x : radii)
        if (x > 2 * s.eps) r.push_back(x);
      const EigenPair& pr = s.pert[b.index[i]];
      emit(j, frequency_profile(FeField(s.mesh_eps, pr.coeffs), pr.lambda, s.eps, r));
    }
  }
}

void cmd_mk(const RunConfig& cfg, const std::string& out) {
  ensure_dir(out);
  CsvWriter csv(join(out, "mk.csv"), {"k", "R", "g_R", "m_energy", "m_flux", "agreement"});
  json summary = json::array();
  for (int k : cfg.ks) {
    const MkReport r = run_mk(cfg, k);
    for (const auto& s : r.sols) {
      csv << k << s.R << s.g_R << s.m_energy << s.m_flux << rel(s.m_flux, s.m_energy);
      csv.end_row();
    }
    const ExteriorSolution& last = r.sols.back();
    summary.push_back({{"k", k},
                       {"m_hat", r.estimate.m_hat},
                       {"C_hat", r.estimate.C_hat},
                       {"fit_residual", r.estimate.fit_residual},
                       {"fit_exponent", r.estimate.fit_exponent},
                       {"m_energy", last.m_energy},
                       {"m_flux", last.m_flux},
                       {"agreement", r.agreement},
                       {"zeta1", r.zeta.zeta1},
                       {"zeta_predicted", r.zeta.predicted},
                       {"zeta_rel_err", r.zeta.rel_err},
                       {"C_zeta", r.zeta.C_route},
                       {"F_R", {{"R", r.F_radii}, {"F", r.F_values}}},
                       {"F_limit", r.F_fit.limit}});
  }
  write_text(join(out, "mk_summary.json"), summary.dump(2));
}

void cmd_sweep(const RunConfig& cfg, const std::string& out) {
  ensure_dir(out);
  std::vector<NestedSolve> solves = run_solves(cfg);
  const Branches b = analyse_all(cfg, solves);
  CsvWriter csv(join(out, "sweep.csv"), {"j", "k", "eps", "lambda_eps", "diff", "diff_over_eps2k"});
  json summary = json::array();
  for (const auto& r : b.results) {
    for (std::size_t i = 0; i < r.diffs.size(); ++i) {
      csv << r.branch.j << r.order.k << r.branch.eps_values[i] << r.branch.lambda_eps[i] << r.diffs[i] << r.scaled[i];
      csv.end_row();
    }
    summary.push_back({{"j", r.branch.j},
                       {"k", r.order.k},
                       {"c", r.order.c},
                       {"slope", r.fit.slope_corrected},
                       {"slope_raw", r.fit.slope_raw},
                       {"constant", r.fit.constant},
                       {"a", r.fit.a},
                       {"fit_residual", r.fit.residual},
                       {"near_zero_flag", r.near_zero_flag}});
  }
  write_text(join(out, "sweep_summary.json"), summary.dump(2));
}

Verdict verify(const RunConfig& cfg) {
  Verdict v;
  auto run = [&](int id, const std::string& name, const std::function<void(Criterion&)>& body) {
    Criterion c;
    c.id = id;
    c.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(c);
    } catch (const Error& e) {
      c.pass = false;
      c.note = e.what();
    }
    c.measured.emplace_back("seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    log("criterion " + std::to_string(id) + (c.pass ? " pass" : " FAIL") + (c.note.empty() ? "" : ": " + c.note));
    v.criteria.push_back(c);
  };

  // Half-disk reference: R0 = 2, p = 1, P2, h = 0.02.
  DomainSpec hd;
  hd.kind = DomainKind::Unperturbed;
  hd.R0 = 2.0;
  MeshOptions hmo;
  hmo.policy.h_far = hmo.policy.h_junction = 0.02;
  hmo.order = ElementOrder::P2;
  SolverConfig hcfg = cfg.solver;
  hcfg.num_eigs = 10;
  SpectralResult half;
  const auto oracle = half_disk_spectrum(2.0, 10);

  run(1, "eigensolver oracle", [&](Criterion& c) {
    half = solve_unperturbed(hd, {}, hcfg, hmo);
    Mesh fine = refine_uniform(half.mesh, true);
    SolverConfig fcfg = hcfg;
    fcfg.krylov_dim = 30;
    const auto fine_pairs = solve_dirichlet(fine, {}, fcfg);
    double e0 = 0, e1 = 0;
    for (int m = 1; m <= 3; ++m)
      for (int n = 1; n <= 2; ++n) {
        int idx = -1;
        for (std::size_t i = 0; i < oracle.size(); ++i)
          if (oracle[i].m == m && oracle[i].n == n) idx = static_cast<int>(i);
        if (idx < 0) throw Error(ErrorKind::Numerical, "oracle mode missing");
        e0 = std::max(e0, rel(half.pairs[idx].lambda, oracle[idx].lambda));
        e1 = std::max(e1, rel(fine_pairs[idx].lambda, oracle[idx].lambda));
      }
    c.measured = {{"max_rel_err", e0}, {"max_rel_err_refined", e1}};
    c.pass = e0 < 1e-3 && e1 < 1e-4;
  });

  run(2, "frequency exactness", [&](Criterion& c) {
    const Mesh& m = half.mesh;
    if (m.triangles.empty()) throw Error(ErrorKind::Numerical, "reference mesh unavailable");
    std::vector<double> radii;
    for (int i = 0; i <= 9; ++i) radii.push_back(0.1 + 0.1 * i);
    double dev = 0, cdev = 0;
    bool kok = true;
    for (int k = 1; k <= 3; ++k) {
      const FeField u(m, interpolate(m, [&](const Vec2& x) { return psi_hat(k, x); }));
      const auto prof = frequency_profile(u, 0, 0, radii);
      for (double N : prof.N) dev = std::max(dev, std::abs(N - k));
      const auto vo = extract_vanishing_order(u, 0, 2.0);
      kok = kok && vo.k == k;
      cdev = std::max(cdev, std::abs(vo.c - 1));
    }
    c.measured = {{"max_N_dev", dev}, {"max_c_dev", cdev}};
    c.pass = dev < 5e-3 && cdev < 1e-3 && kok;
  });

  run(3, "vanishing order of eigenfunctions", [&](Criterion& c) {
    if (half.pairs.empty()) throw Error(ErrorKind::Numerical, "reference eigenpairs unavailable");
    bool ok = true;
    for (int m = 1; m <= 2; ++m) {
      int idx = -1;
      for (std::size_t i = 0; i < oracle.size(); ++i)
        if (oracle[i].m == m && oracle[i].n == 1) idx = static_cast<int>(i);
      const auto vo = extract_vanishing_order(FeField(half.mesh, half.pairs[idx].coeffs), half.pairs[idx].lambda, 2.0);
      const double e = rel(std::abs(vo.c), oracle[idx].leading_coefficient());
      c.measured.emplace_back("k_m" + std::to_string(m), vo.k);
      c.measured.emplace_back("c_rel_err_m" + std::to_string(m), e);
      ok = ok && vo.k == m && e < 0.02;
    }
    c.pass = ok;
  });

  run(4, "Steklov quotient", [&](Criterion& c) {
    const double m0 = steklov_m_sigma(0), m1 = steklov_m_sigma(0.1), m2 = steklov_m_sigma(0.2),
                 m3 = steklov_m_sigma(0.3);
    c.measured = {{"m_0", m0}, {"m_0.1", m1}, {"m_0.2", m2}, {"m_0.3", m3}};
    c.pass = std::abs(m0 - 1) < 1e-3 && m3 <= m2 && m2 <= m1 && m1 <= m0;
  });

  std::vector<MkReport> mk;
  run(5, "m_k consistency", [&](Criterion& c) {
    bool ok = true;
    for (int k : {1, 2}) {
      mk.push_back(run_mk(cfg, k));
      const auto& r = mk.back();
      const auto one = solve_U_R(k, 8, cfg.exterior, 1.0);
      const auto two = solve_U_R(k, 8, cfg.exterior, 2.0);
      const double scal = rel(two.m_energy, 4 * one.m_energy);
      c.measured.emplace_back("m_hat_" + std::to_string(k), r.estimate.m_hat);
      c.measured.emplace_back("agreement_" + std::to_string(k), r.agreement);
      c.measured.emplace_back("scaling_rel_" + std::to_string(k), scal);
      ok = ok && r.agreement < 0.02 && r.estimate.m_hat < 0 && scal < 1e-8;
    }
    c.pass = ok;
  });

  run(6, "zeta identity", [&](Criterion& c) {
    if (mk.size() < 2) throw Error(ErrorKind::Numerical, "m_k results unavailable");
    c.measured = {{"zeta_rel_err_1", mk[0].zeta.rel_err}, {"zeta_rel_err_2", mk[1].zeta.rel_err}};
    c.pass = mk[0].zeta.rel_err < 0.01 && mk[1].zeta.rel_err < 0.02;
  });

  run(7, "route agreement", [&](Criterion& c) {
    if (mk.empty()) throw Error(ErrorKind::Numerical, "m_k results unavailable");
    const double a = -2 * mk[0].estimate.m_hat, b = mk[0].zeta.C_route, f = mk[0].F_fit.limit;
    const double gap = std::max({rel(a, b), rel(b, a), rel(a, f), rel(f, a), rel(b, f), rel(f, b)});
    c.measured = {{"C_gR", a}, {"C_zeta", b}, {"C_FR", f}, {"max_rel_gap", gap}};
    c.pass = gap < 0.05;
  });

  std::vector<NestedSolve> solves;
  Branches br;
  run(8, "rate", [&](Criterion& c) {
    solves = run_solves(cfg);
    br = analyse_all(cfg, solves);
    const SweepResult* k1 = br.with_k(1);
    const SweepResult* k2 = br.with_k(2);
    if (!k1 || !k2) throw Error(ErrorKind::Config, "sweep needs branches with k = 1 and k = 2");
    c.measured = {{"slope_k1", k1->fit.slope_corrected},
                  {"slope_k2", k2->fit.slope_corrected},
                  {"slope_raw_k1", k1->fit.slope_raw},
                  {"slope_raw_k2", k2->fit.slope_raw}};
    v.slope = k1->fit.slope_corrected;
    v.constant = k1->fit.constant;
    c.pass = !k1->near_zero_flag && !k2->near_zero_flag && k1->fit.slope_corrected >= 1.9 &&
             k1->fit.slope_corrected <= 2.1 && k2->fit.slope_corrected >= 3.6 && k2->fit.slope_corrected <= 4.4;
  });

  run(9, "constant", [&](Criterion& c) {
    const SweepResult* k1 = br.with_k(1);
    if (!k1 || mk.empty()) throw Error(ErrorKind::Numerical, "sweep or m_k results unavailable");
    v.C_k_predicted = predicted_constant(k1->order.c, mk[0].estimate.m_hat);
    v.discrepancy = compare_constant(k1->fit.constant, k1->order.c, mk[0].estimate.m_hat);
    c.measured = {{"constant", k1->fit.constant}, {"predicted", v.C_k_predicted}, {"discrepancy", v.discrepancy}};
    c.pass = v.discrepancy < 0.10;
  });

  run(10, "blow-up", [&](Criterion& c) {
    bool ok = !br.results.empty();
    for (const auto& r : br.results) {
      const ProfilePhi phi = build_Phi(r.order.k, cfg.phi_R, cfg.exterior);
      const BlowupReport b = blowup_compare(solves, r.branch, phi, r.order.c);
      const std::size_t n = b.eps.size();
      const std::string k = std::to_string(r.order.k);
      c.measured.emplace_back("distance_k" + k, b.distance[n - 1]);
      c.measured.emplace_back("distance_psi_k" + k, b.distance_psi[n - 1]);
      ok = ok && n >= 3 && b.distance[n - 1] < 0.15 && b.distance[n - 1] < b.distance[n - 2] &&
           b.distance[n - 2] < b.distance[n - 3] && b.distance_psi[n - 1] >= 2 * b.distance[n - 1];
    }
    c.pass = ok;
  });

  run(11, "Pohozaev residual", [&](Criterion& c) {
    const NestedSolve* s = nullptr;
    for (const auto& x : solves)
      if (std::abs(x.eps - 0.1) < 1e-12) s = &x;
    NestedSolve own;
    if (!s) {
      own = solve_nested(perturbed_spec(cfg, 0.1), {}, cfg.solver, mesh_options(cfg, cfg.h_junction_factor * 0.1));
      s = &own;
    }
    bool ok = s->pert.size() >= 2;
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 2 && ok; ++j)
      for (double r : {0.3, 0.5}) {
        const auto p = pohozaev_residual(FeField(s->mesh_eps, s->pert[j].coeffs), s->pert[j].lambda, r);
        const double margin = p.residual() + 50 * cfg.h_far * p.arc_grad_sq;
        worst = std::min(worst, margin);
        ok = ok && margin >= 0;
      }
    c.measured = {{"min_margin", worst}};
    c.pass = ok;
  });

  run(12, "inequality suite", [&](Criterion& c) {
    int hardy = 0, poinc = 0, tube = 0, fk = 0, fk_total = 0;
    for (int i = 0; i < 10; ++i) {
      const double a = 0.1 + 0.2 * i, b = a + 0.5 + 0.3 * i;
      const auto rho = [=](double r) { return std::pow((r - a) * (b - r), 2); };
      const auto drho = [=](double r) { return 2 * (r - a) * (b - r) * (a + b - 2 * r); };
      hardy += hardy_2d_check(rho, drho, a, b).holds();
    }
    DomainSpec coarse = hd;
    GradingPolicy cp;
    cp.h_far = cp.h_junction = 0.1;
    const Mesh cm = generate_mesh(build_domain(coarse), cp, ElementOrder::P2);
    std::mt19937 rng(cfg.solver.seed);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int i = 0; i < 50; ++i) {
      const double a0 = U(rng), a1 = U(rng), a2 = U(rng), w1 = 3 * U(rng), w2 = 3 * U(rng);
      const double r = 0.3 + 0.35 * (1 + U(rng));
      const FeField u(cm, interpolate(cm, [&](const Vec2& x) {
                        return a0 + a1 * std::cos(w1 * x.x()) + a2 * std::sin(w2 * x.y());
                      }));
      poinc += poincare_type_check(u, r).holds(1e-12);
    }
    const double teps = 0.1;
    const Mesh tm = generate_mesh(build_domain(perturbed_spec(cfg, teps)), mesh_options(cfg, 0.005));
    for (int n = 1; n <= 10; ++n) {
      const int m = 1 + (n - 1) % 3, q = 1 + (n - 1) / 3;
      const FeField u(tm, interpolate(tm, [&](const Vec2& x) {
                        return std::sin(q * std::numbers::pi * (x.y() + teps) / (2 * teps)) *
                               std::sin((m - 0.5) * std::numbers::pi * (x.x() + 1));
                      }));
      const auto t = tube_poincare_check(u, teps);
      tube += t.lhs <= t.rhs;
    }
    auto fk_check = [&](const Mesh& m, double lambda1) {
      ++fk_total;
      fk += lambda1 >= faber_krahn_lower_bound(m.area()) * (1 - 1e-12);
    };
    if (!half.pairs.empty()) fk_check(half.mesh, half.pairs[0].lambda);
    for (const auto& s : solves) {
      fk_check(s.mesh_eps, s.pert[0].lambda);
      fk_check(s.omega.mesh, s.unpert[0].lambda);
    }
    c.measured = {{"hardy", hardy}, {"poincare", poinc}, {"tube", tube}, {"faber_krahn", fk},
                  {"faber_krahn_meshes", fk_total}};
    c.pass = hardy == 10 && poinc == 50 && tube == 10 && fk == fk_total && fk_total > 0;
  });

  run(13, "quadratic-form lemma", [&](Criterion& c) {
    QuadraticFormFamily Q;
    Q.j = 2;
    Q.M = [](double e) {
      Eigen::MatrixXd M(2, 2);
      M << -1 + e, 0.1 * e * e, 0.1 * e * e, 3 * e * e;
      return M;
    };
    Q.sigma = [](double e) { return e * e; };
    Q.mu = [](double) { return 3.0; };
    double oracle_gap = 0;
    for (double e : {1e-1, 1e-2, 1e-3}) {
      const Eigen::MatrixXd M = Q.M(e);
      const double mid = 0.5 * (M(0, 0) + M(1, 1)), half_gap = 0.5 * (M(0, 0) - M(1, 1));
      const double closed = mid + std::sqrt(half_gap * half_gap + M(0, 1) * M(0, 1));
      oracle_gap = std::max(oracle_gap, std::abs(quadratic_form_max(M) - closed) / std::abs(closed));
    }
    const double ratio = quadratic_form_ratio(Q, 1e-3);
    c.measured = {{"ratio", ratio}, {"oracle_gap", oracle_gap}};
    c.pass = std::abs(ratio - 1) < 1e-2 && oracle_gap < 1e-10;
  });

  return v;
}

int cmd_verify(const RunConfig& cfg, const std::string& out) {
  ensure_dir(out);
  const Verdict v = verify(cfg);
  json j;
  j["slope"] = v.slope;
  j["constant"] = v.constant;
  j["C_k_predicted"] = v.C_k_predicted;
  j["discrepancy"] = v.discrepancy;
  j["criteria"] = json::array();
  for (const auto& c : v.criteria) {
    json m = json::object();
    for (const auto& [k, x] : c.measured) m[k] = x;
    j["criteria"].push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"note", c.note}, {"measured", m}});
  }
  j["pass"] = v.pass();
  write_text(join(out, "verdict.json"), j.dump(2));
  return v.pass() ? 0 : 4;
}

}  // namespace tubespec
