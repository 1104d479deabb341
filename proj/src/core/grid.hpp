#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <vector>

#include "core/common.hpp"

namespace fourtop::fea {

// Regular quad grid. Node ids run x-fastest: node(i, j) = j*(nelx+1) + i,
// with DOFs (2n, 2n+1) for (ux, uy). Element ids likewise x-fastest.
// Element-local DOF order is CCW from the lower-left node.
struct GridMesh {
  int nelx = 0;
  int nely = 0;
  double h = 1.0;
  Eigen::MatrixX2d element_centers;               // n_e x 2
  Eigen::Matrix<int, Eigen::Dynamic, 8> dof_map;  // n_e x 8
  std::vector<int> fixed_dofs;                    // sorted, unique
  Eigen::VectorXd load_vector;                    // size dof_count()
  std::vector<int> passive_solid;                 // sorted element ids, rho forced to 1
  std::vector<int> passive_void;                  // sorted element ids, rho forced to ~0

  int element_count() const { return nelx * nely; }
  int node_count() const { return (nelx + 1) * (nely + 1); }
  int dof_count() const { return 2 * node_count(); }
  int node_id(int i, int j) const { return j * (nelx + 1) + i; }
  int element_id(int i, int j) const { return j * nelx + i; }
  double element_volume() const { return h * h; }
  double domain_volume() const { return element_count() * h * h; }

  void fix_dof(int dof);
  void fix_node(int i, int j, bool x, bool y);
  void add_load(int i, int j, double fx, double fy);
};

// Mesh with centers and DOF maps; no boundary conditions or loads yet.
GridMesh build_grid(int nelx, int nely, double h);

using ElementMatrix = Eigen::Matrix<double, 8, 8>;

struct ElementStiffness {
  ElementMatrix k0;  // unit Young's modulus
};

// Plane-stress bilinear quad, unit thickness; independent of h.
ElementStiffness element_stiffness(double E, double nu, double h);

struct SolveResult {
  Eigen::VectorXd u;                   // full displacement vector, 0 at fixed DOFs
  Eigen::VectorXd element_compliance;  // J_e = u_e^T k0 u_e (unscaled, >= 0)
  double total_stiffness_energy = 0.0;  // f . u
};

// Assembles K = sum_e E_e k0 on the free DOFs and solves with a direct
// sparse Cholesky factorization. The sparsity pattern and the symbolic
// factorization are computed once; repeated solves only refactorize values.
class GridSolver {
 public:
  explicit GridSolver(const GridMesh& mesh, double nu = 0.3);

  SolveResult solve(const Eigen::VectorXd& young_per_element);

  const GridMesh& mesh() const { return mesh_; }
  const ElementMatrix& k0() const { return k0_; }

 private:
  const GridMesh& mesh_;
  ElementMatrix k0_;
  int n_free_ = 0;
  std::vector<int> full_to_free_;  // -1 for fixed DOFs
  Eigen::VectorXd f_free_;
  Eigen::SparseMatrix<double> k_free_;
  std::vector<int> value_slot_;  // 64 slots per element into k_free_ values, -1 if fixed
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

// One-shot convenience wrapper around GridSolver.
SolveResult assemble_and_solve(const GridMesh& mesh,
                               const Eigen::VectorXd& young_per_element,
                               double nu = 0.3);

// J = sum_e rho_e^p J_e
double total_compliance(const Eigen::VectorXd& rho, double p,
                        const Eigen::VectorXd& element_compliance);

}  // namespace fourtop::fea
