#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "tubespec/geometry.hpp"
#include "tubespec/mesh.hpp"

namespace tubespec {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct WeightField {
  enum class Kind { ConstantOne, RadialBump };
  Kind kind = Kind::ConstantOne;
  Vec2 center{0, 0};
  double inner_radius = 0.0;  // p = 0 inside
  double outer_radius = 0.0;  // p = 1 outside, C2 ramp in between

  double operator()(const Vec2& x) const;
  static WeightField one() { return {}; }
  static WeightField radial_bump(Vec2 c, double r_in, double r_out);
};

struct ElementGeometry {
  std::array<Vec2, 3> grad_bary;
  double area = 0;
};

ElementGeometry element_geometry(const Mesh& mesh, int t);
// 3 (P1) or 6 (P2) values in element_dofs order
void shape_values(ElementOrder order, const std::array<double, 3>& L, double* N);
void shape_gradients(ElementOrder order, const std::array<double, 3>& L, const ElementGeometry& g, Vec2* G);

SparseMatrix assemble_stiffness(const Mesh& mesh);
SparseMatrix assemble_mass(const Mesh& mesh, const WeightField& p = {});
SparseMatrix assemble_boundary_mass(const Mesh& mesh, BoundaryTag tag);

class DofMap {
 public:
  DofMap() = default;
  DofMap(int n, const std::vector<int>& constrained);

  int full_size() const { return static_cast<int>(full_to_free_.size()); }
  int free_size() const { return static_cast<int>(free_to_full_.size()); }
  int to_free(int full) const { return full_to_free_[full]; }  // -1 when constrained
  int to_full(int free) const { return free_to_full_[free]; }
  const std::vector<int>& free_dofs() const { return free_to_full_; }
  bool is_identity() const { return free_size() == full_size(); }

  Vector restrict(const Vector& full) const;
  Vector expand(const Vector& free) const;  // zeros on constrained dofs

 private:
  std::vector<int> full_to_free_;
  std::vector<int> free_to_full_;
};

struct Reduced {
  SparseMatrix A;
  DofMap map;
};

Reduced apply_dirichlet(const SparseMatrix& A, const std::vector<int>& constrained);
SparseMatrix restrict_matrix(const SparseMatrix& A, const DofMap& map);

class SpdSolver {
 public:
  explicit SpdSolver(const SparseMatrix& A);
  Vector solve(const Vector& b) const;
  int size() const { return n_; }

 private:
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  Eigen::SparseMatrix<double> A_;
  int n_ = 0;
};

Vector solve_sparse(const SparseMatrix& A, const Vector& b);

// Minimizes x'Ax/2 - b'x with x fixed to `values` on `dofs`.
Vector solve_constrained(const SparseMatrix& A, const Vector& b, const std::vector<int>& dofs,
                         const Vector& values);

void write_coo(const SparseMatrix& A, const std::string& path);

}  // namespace tubespec
