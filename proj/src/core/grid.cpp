#include "core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fourtop::fea {

namespace {

void insert_sorted_unique(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

}  // namespace

void GridMesh::fix_dof(int dof) {
  if (dof < 0 || dof >= dof_count())
    throw std::invalid_argument("fix_dof: index out of range");
  insert_sorted_unique(fixed_dofs, dof);
}

void GridMesh::fix_node(int i, int j, bool x, bool y) {
  const int n = node_id(i, j);
  if (x) fix_dof(2 * n);
  if (y) fix_dof(2 * n + 1);
}

void GridMesh::add_load(int i, int j, double fx, double fy) {
  const int n = node_id(i, j);
  load_vector[2 * n] += fx;
  load_vector[2 * n + 1] += fy;
}

GridMesh build_grid(int nelx, int nely, double h) {
  if (nelx < 1 || nely < 1)
    throw std::invalid_argument("build_grid: nelx and nely must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("build_grid: h must be positive");

  GridMesh m;
  m.nelx = nelx;
  m.nely = nely;
  m.h = h;
  const int ne = m.element_count();
  m.element_centers.resize(ne, 2);
  m.dof_map.resize(ne, 8);
  m.load_vector = Eigen::VectorXd::Zero(m.dof_count());

  for (int j = 0; j < nely; ++j) {
    for (int i = 0; i < nelx; ++i) {
      const int e = m.element_id(i, j);
      m.element_centers(e, 0) = (i + 0.5) * h;
      m.element_centers(e, 1) = (j + 0.5) * h;
      const int n_bl = m.node_id(i, j);
      const int n_br = m.node_id(i + 1, j);
      const int n_tr = m.node_id(i + 1, j + 1);
      const int n_tl = m.node_id(i, j + 1);
      const int nodes[4] = {n_bl, n_br, n_tr, n_tl};
      for (int a = 0; a < 4; ++a) {
        m.dof_map(e, 2 * a) = 2 * nodes[a];
        m.dof_map(e, 2 * a + 1) = 2 * nodes[a] + 1;
      }
    }
  }
  return m;
}

ElementStiffness element_stiffness(double E, double nu, double h) {
  if (!(E > 0.0))
    throw std::invalid_argument("element_stiffness: E must be positive");
  if (!(nu >= 0.0 && nu < 0.5))
    throw std::invalid_argument("element_stiffness: nu must lie in [0, 0.5)");
  if (!(h > 0.0))
    throw std::invalid_argument("element_stiffness: h must be positive");

  // Closed-form integral of B^T D B over the square bilinear quad
  // (plane stress, unit thickness). The result does not depend on h.
  const double k[8] = {0.5 - nu / 6.0,
                       0.125 + nu / 8.0,
                       -0.25 - nu / 12.0,
                       -0.125 + 3.0 * nu / 8.0,
                       -0.25 + nu / 12.0,
                       -0.125 - nu / 8.0,
                       nu / 6.0,
                       0.125 - 3.0 * nu / 8.0};
  static const int pattern[8][8] = {
      {0, 1, 2, 3, 4, 5, 6, 7}, {1, 0, 7, 6, 5, 4, 3, 2},
      {2, 7, 0, 5, 6, 3, 4, 1}, {3, 6, 5, 0, 7, 2, 1, 4},
      {4, 5, 6, 7, 0, 1, 2, 3}, {5, 4, 3, 2, 1, 0, 7, 6},
      {6, 3, 4, 1, 2, 7, 0, 5}, {7, 2, 1, 4, 3, 6, 5, 0}};

  ElementStiffness ke;
  const double scale = E / (1.0 - nu * nu);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) ke.k0(i, j) = scale * k[pattern[i][j]];
  return ke;
}

GridSolver::GridSolver(const GridMesh& mesh, double nu) : mesh_(mesh) {
  k0_ = element_stiffness(1.0, nu, mesh.h).k0;

  const int ndof = mesh.dof_count();
  full_to_free_.assign(ndof, -1);
  {
    std::size_t fi = 0;
    int free = 0;
    for (int d = 0; d < ndof; ++d) {
      if (fi < mesh.fixed_dofs.size() && mesh.fixed_dofs[fi] == d) {
        ++fi;
        continue;
      }
      full_to_free_[d] = free++;
    }
    n_free_ = free;
  }

  f_free_.resize(n_free_);
  for (int d = 0; d < ndof; ++d)
    if (full_to_free_[d] >= 0) f_free_[full_to_free_[d]] = mesh.load_vector[d];

  if (n_free_ == 0) return;

  const int ne = mesh.element_count();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(ne) * 64);
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < 8; ++a) {
      const int ra = full_to_free_[mesh.dof_map(e, a)];
      if (ra < 0) continue;
      for (int b = 0; b < 8; ++b) {
        const int rb = full_to_free_[mesh.dof_map(e, b)];
        if (rb < 0) continue;
        trips.emplace_back(ra, rb, 0.0);
      }
    }
  }
  k_free_.resize(n_free_, n_free_);
  k_free_.setFromTriplets(trips.begin(), trips.end());
  k_free_.makeCompressed();

  // Map each element entry to its slot in the compressed value array so the
  // per-solve assembly is a flat scatter-add.
  value_slot_.assign(static_cast<std::size_t>(ne) * 64, -1);
  const int* outer = k_free_.outerIndexPtr();
  const int* inner = k_free_.innerIndexPtr();
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < 8; ++a) {
      const int ra = full_to_free_[mesh.dof_map(e, a)];
      if (ra < 0) continue;
      for (int b = 0; b < 8; ++b) {
        const int rb = full_to_free_[mesh.dof_map(e, b)];
        if (rb < 0) continue;
        // column-major: search row ra within column rb
        const int* begin = inner + outer[rb];
        const int* end = inner + outer[rb + 1];
        const int* it = std::lower_bound(begin, end, ra);
        value_slot_[static_cast<std::size_t>(e) * 64 + a * 8 + b] =
            static_cast<int>(outer[rb] + (it - begin));
      }
    }
  }

  llt_.analyzePattern(k_free_);
}

SolveResult GridSolver::solve(const Eigen::VectorXd& young_per_element) {
  const int ne = mesh_.element_count();
  if (young_per_element.size() != ne)
    throw std::invalid_argument(
        "assemble_and_solve: young_per_element length must equal element "
        "count");
  if ((young_per_element.array() <= 0.0).any())
    throw std::invalid_argument(
        "assemble_and_solve: Young's moduli must be positive (apply an E_min "
        "floor)");

  SolveResult res;
  res.u = Eigen::VectorXd::Zero(mesh_.dof_count());
  res.element_compliance = Eigen::VectorXd::Zero(ne);

  if (n_free_ > 0) {
    double* vals = k_free_.valuePtr();
    std::fill(vals, vals + k_free_.nonZeros(), 0.0);
    for (int e = 0; e < ne; ++e) {
      const double Ee = young_per_element[e];
      const int* slots = value_slot_.data() + static_cast<std::size_t>(e) * 64;
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
          const int s = slots[a * 8 + b];
          if (s >= 0) vals[s] += Ee * k0_(a, b);
        }
    }

    llt_.factorize(k_free_);
    if (llt_.info() != Eigen::Success)
      throw SolverError(
          "reduced stiffness matrix is not positive definite; the mesh is "
          "under-constrained (rigid-body mode) or the modulus field is "
          "degenerate");
    const Eigen::VectorXd u_free = llt_.solve(f_free_);
    for (int d = 0; d < mesh_.dof_count(); ++d)
      if (full_to_free_[d] >= 0) res.u[d] = u_free[full_to_free_[d]];
  }

  Eigen::Matrix<double, 8, 1> ue;
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < 8; ++a) ue[a] = res.u[mesh_.dof_map(e, a)];
    const double je = ue.dot(k0_ * ue);
    res.element_compliance[e] = std::max(je, 0.0);
  }
  res.total_stiffness_energy = mesh_.load_vector.dot(res.u);
  return res;
}

SolveResult assemble_and_solve(const GridMesh& mesh,
                               const Eigen::VectorXd& young_per_element,
                               double nu) {
  GridSolver solver(mesh, nu);
  return solver.solve(young_per_element);
}

double total_compliance(const Eigen::VectorXd& rho, double p,
                        const Eigen::VectorXd& element_compliance) {
  if (rho.size() != element_compliance.size())
    throw std::invalid_argument(
        "total_compliance: rho and element_compliance length mismatch");
  return (rho.array().pow(p) * element_compliance.array()).sum();
}

}  // namespace fourtop::fea
