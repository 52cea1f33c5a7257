#include "tubespec/fem.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "tubespec/error.hpp"
#include "tubespec/parallel.hpp"
#include "tubespec/quadrature.hpp"

namespace tubespec {

namespace {
std::atomic<int> g_threads{0};

using Triplet = Eigen::Triplet<double>;

template <class Local>
SparseMatrix assemble(const Mesh& mesh, Local&& local) {
  const int nt = mesh.num_triangles();
  const int nd = mesh.dofs_per_element();
  std::vector<std::vector<Triplet>> parts(parallel_workers(nt));
  parallel_for(nt, [&](int b, int e, int w) {
    auto& trip = parts[w];
    trip.reserve(static_cast<std::size_t>(e - b) * nd * nd);
    double Ae[36];
    for (int t = b; t < e; ++t) {
      local(t, Ae);
      const auto d = mesh.element_dofs(t);
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) trip.emplace_back(d[i], d[j], Ae[i * nd + j]);
    }
  });
  std::vector<Triplet> all;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  SparseMatrix A(mesh.num_dofs(), mesh.num_dofs());
  A.setFromTriplets(all.begin(), all.end());
  return A;
}

double smoothstep5(double s) {
  if (s <= 0) return 0;
  if (s >= 1) return 1;
  return s * s * s * (10 - 15 * s + 6 * s * s);
}

}  // namespace

void set_num_threads(int n) { g_threads = n; }

int num_threads() {
  const int n = g_threads.load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

double WeightField::operator()(const Vec2& x) const {
  if (kind == Kind::ConstantOne) return 1.0;
  const double d = (x - center).norm();
  if (outer_radius <= inner_radius) return d > inner_radius ? 1.0 : 0.0;
  return smoothstep5((d - inner_radius) / (outer_radius - inner_radius));
}

WeightField WeightField::radial_bump(Vec2 c, double r_in, double r_out) {
  WeightField w;
  w.kind = Kind::RadialBump;
  w.center = c;
  w.inner_radius = r_in;
  w.outer_radius = r_out;
  return w;
}

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  const auto& v = mesh.triangles[t];
  const Vec2& a = mesh.vertices[v[0]];
  const Vec2& b = mesh.vertices[v[1]];
  const Vec2& c = mesh.vertices[v[2]];
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  ElementGeometry g;
  g.area = 0.5 * det;
  // grad L_i = rot(opposite edge) / det
  g.grad_bary[0] = Vec2(b.y() - c.y(), c.x() - b.x()) / det;
  g.grad_bary[1] = Vec2(c.y() - a.y(), a.x() - c.x()) / det;
  g.grad_bary[2] = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
  return g;
}

void shape_values(ElementOrder order, const std::array<double, 3>& L, double* N) {
  if (order == ElementOrder::P1) {
    N[0] = L[0];
    N[1] = L[1];
    N[2] = L[2];
    return;
  }
  for (int i = 0; i < 3; ++i) N[i] = L[i] * (2 * L[i] - 1);
  N[3] = 4 * L[0] * L[1];
  N[4] = 4 * L[1] * L[2];
  N[5] = 4 * L[2] * L[0];
}

void shape_gradients(ElementOrder order, const std::array<double, 3>& L, const ElementGeometry& g, Vec2* G) {
  const auto& D = g.grad_bary;
  if (order == ElementOrder::P1) {
    G[0] = D[0];
    G[1] = D[1];
    G[2] = D[2];
    return;
  }
  for (int i = 0; i < 3; ++i) G[i] = (4 * L[i] - 1) * D[i];
  G[3] = 4 * (L[0] * D[1] + L[1] * D[0]);
  G[4] = 4 * (L[1] * D[2] + L[2] * D[1]);
  G[5] = 4 * (L[2] * D[0] + L[0] * D[2]);
}

SparseMatrix assemble_stiffness(const Mesh& mesh) {
  const int nd = mesh.dofs_per_element();
  const TriangleRule& rule = triangle_rule(mesh.order == ElementOrder::P2 ? 2 : 1);
  return assemble(mesh, [&](int t, double* Ae) {
    const ElementGeometry g = element_geometry(mesh, t);
    std::fill(Ae, Ae + nd * nd, 0.0);
    Vec2 G[6];
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      shape_gradients(mesh.order, rule.bary[q], g, G);
      const double w = rule.w[q] * g.area;
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) Ae[i * nd + j] += w * G[i].dot(G[j]);
    }
  });
}

SparseMatrix assemble_mass(const Mesh& mesh, const WeightField& p) {
  const int nd = mesh.dofs_per_element();
  const TriangleRule& rule = triangle_rule(6);
  return assemble(mesh, [&](int t, double* Ae) {
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& v = mesh.triangles[t];
    std::fill(Ae, Ae + nd * nd, 0.0);
    double N[6];
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const auto& L = rule.bary[q];
      const Vec2 x = L[0] * mesh.vertices[v[0]] + L[1] * mesh.vertices[v[1]] + L[2] * mesh.vertices[v[2]];
      const double w = rule.w[q] * g.area * p(x);
      if (w == 0.0) continue;
      shape_values(mesh.order, L, N);
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) Ae[i * nd + j] += w * N[i] * N[j];
    }
  });
}

SparseMatrix assemble_boundary_mass(const Mesh& mesh, BoundaryTag tag) {
  if (!mesh.has_tag(tag)) throw Error(ErrorKind::Geometry, std::string("tag ") + to_string(tag) + " not on mesh");
  const GaussRule gr = gauss_legendre(3);
  const bool p2 = mesh.order == ElementOrder::P2;
  std::vector<Triplet> trip;
  for (const auto& e : mesh.edges_with_tag(tag)) {
    const double len = (mesh.vertices[e.b] - mesh.vertices[e.a]).norm();
    int d[3] = {e.a, e.b, -1};
    int nd = 2;
    if (p2) {
      d[2] = mesh.num_vertices() + mesh.find_edge(e.a, e.b);
      nd = 3;
    }
    double Be[9] = {};
    for (std::size_t q = 0; q < gr.x.size(); ++q) {
      const double s = 0.5 * (1 + gr.x[q]);
      const double w = 0.5 * gr.w[q] * len;
      double N[3];
      if (p2) {
        N[0] = (1 - s) * (1 - 2 * s);
        N[1] = s * (2 * s - 1);
        N[2] = 4 * s * (1 - s);
      } else {
        N[0] = 1 - s;
        N[1] = s;
      }
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) Be[i * 3 + j] += w * N[i] * N[j];
    }
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) trip.emplace_back(d[i], d[j], Be[i * 3 + j]);
  }
  SparseMatrix B(mesh.num_dofs(), mesh.num_dofs());
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

DofMap::DofMap(int n, const std::vector<int>& constrained) : full_to_free_(n, 0) {
  for (int c : constrained) {
    if (c < 0 || c >= n) throw Error(ErrorKind::Numerical, "constrained dof out of range");
    full_to_free_[c] = -1;
  }
  for (int i = 0; i < n; ++i) {
    if (full_to_free_[i] < 0) continue;
    full_to_free_[i] = static_cast<int>(free_to_full_.size());
    free_to_full_.push_back(i);
  }
}

Vector DofMap::restrict(const Vector& full) const {
  Vector r(free_size());
  for (int i = 0; i < free_size(); ++i) r[i] = full[free_to_full_[i]];
  return r;
}

Vector DofMap::expand(const Vector& free) const {
  Vector f = Vector::Zero(full_size());
  for (int i = 0; i < free_size(); ++i) f[free_to_full_[i]] = free[i];
  return f;
}

SparseMatrix restrict_matrix(const SparseMatrix& A, const DofMap& map) {
  std::vector<Triplet> trip;
  trip.reserve(A.nonZeros());
  for (int r = 0; r < A.outerSize(); ++r) {
    const int fr = map.to_free(r);
    if (fr < 0) continue;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      const int fc = map.to_free(static_cast<int>(it.col()));
      if (fc >= 0) trip.emplace_back(fr, fc, it.value());
    }
  }
  SparseMatrix R(map.free_size(), map.free_size());
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

Reduced apply_dirichlet(const SparseMatrix& A, const std::vector<int>& constrained) {
  DofMap map(static_cast<int>(A.rows()), constrained);
  if (map.free_size() == 0) throw Error(ErrorKind::Numerical, "every node is constrained");
  return {restrict_matrix(A, map), std::move(map)};
}

SpdSolver::SpdSolver(const SparseMatrix& A) : A_(A), n_(static_cast<int>(A.rows())) {
  llt_.compute(A_);
  if (llt_.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "sparse Cholesky failed: matrix singular or indefinite");
}

Vector SpdSolver::solve(const Vector& b) const {
  Vector x = llt_.solve(b);
  // one step of iterative refinement
  const Vector r = b - A_ * x;
  x += llt_.solve(r);
  if (!x.allFinite()) throw Error(ErrorKind::Numerical, "sparse solve produced non-finite values");
  return x;
}

Vector solve_sparse(const SparseMatrix& A, const Vector& b) {
  SpdSolver s(A);
  return s.solve(b);
}

Vector solve_constrained(const SparseMatrix& A, const Vector& b, const std::vector<int>& dofs,
                         const Vector& values) {
  const int n = static_cast<int>(A.rows());
  Vector x = Vector::Zero(n);
  for (std::size_t i = 0; i < dofs.size(); ++i) x[dofs[i]] = values[i];
  DofMap map(n, dofs);
  if (map.free_size() == 0) return x;
  const Vector rhs = map.restrict(b - A * x);
  const Vector xf = solve_sparse(restrict_matrix(A, map), rhs);
  for (int i = 0; i < map.free_size(); ++i) x[map.to_full(i)] = xf[i];
  return x;
}

void write_coo(const SparseMatrix& A, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Config, "cannot open '" + path + "' for writing");
  f << std::setprecision(17);
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) f << r << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace tubespec
