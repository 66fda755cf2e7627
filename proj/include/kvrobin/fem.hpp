#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <vector>

#include "kvrobin/coefficient.hpp"
#include "kvrobin/mesh.hpp"

namespace kvrobin {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Ordered chain of boundary dofs along one connected labelled segment, with
/// arclength measured from the counterclockwise start of the segment.
struct BoundaryArc {
  std::vector<int> dofs;
  std::vector<double> s;
  double length() const { return s.empty() ? 0.0 : s.back(); }
};

/// Piecewise-linear function on a boundary arc: values at increasing
/// arclengths. `dofs` ties each node to a mesh vertex when it comes from a
/// FemSpace and may be empty for free-standing samples.
struct BoundaryTrace {
  std::vector<int> dofs;
  std::vector<double> s;
  std::vector<double> values;

  double evaluate(double at) const;
  double max_abs() const;
};

/// Continuous P1 Lagrange space on a TriMesh (one dof per vertex).
class FemSpace {
 public:
  explicit FemSpace(std::shared_ptr<const TriMesh> mesh);

  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }
  int dof_count() const { return static_cast<int>(mesh_->vertices.size()); }

  /// Dofs on the closed observation arc Γ_a′; these are constrained in V_h^{0,a}.
  const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }
  bool is_dirichlet(int dof) const { return dirichlet_mask_[dof] != 0; }

  /// Chain of dofs along a connected segment (Γ_i or Γ_a′); throws otherwise.
  const BoundaryArc& arc(BoundaryLabel label) const;
  /// Boundary edges carrying one of the labels.
  std::vector<std::array<int, 2>> edges(std::initializer_list<BoundaryLabel> labels) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::vector<int> dirichlet_dofs_;
  std::vector<char> dirichlet_mask_;
  std::optional<BoundaryArc> robin_arc_;
  std::optional<BoundaryArc> observation_arc_;
};

/// (grad phi_i, grad phi_j) over Ω, exact for P1.
SparseMatrix assemble_stiffness(const FemSpace& space);

/// (phi_i, phi_j) over Ω, exact for P1.
SparseMatrix assemble_domain_mass(const FemSpace& space);

/// (w phi_i, phi_j) over a connected boundary segment for a piecewise-constant
/// weight on that segment's arclength. Edges are split at weight breakpoints
/// and integrated with 2-point Gauss.
SparseMatrix assemble_boundary_mass(const FemSpace& space, BoundaryLabel segment, const RobinCoefficient& weight);

/// (g, phi_i) over every boundary edge carrying one of `labels`, 2-point Gauss
/// per edge.
Vector assemble_boundary_load(const FemSpace& space, std::initializer_list<BoundaryLabel> labels, const ScalarField& g);

/// (q * g, phi_i) over Γ_i with q piecewise constant; edges split at breakpoints.
Vector assemble_weighted_boundary_load(const FemSpace& space, BoundaryLabel segment, const RobinCoefficient& weight,
                                       const ScalarField& g);

/// Dofs held fixed at prescribed values.
struct Constraints {
  std::vector<int> dofs;
  std::vector<double> values;
};

/// Sparse LDL^T factorisation of an SPD operator reduced to its free dofs.
/// Built once, reused for many right-hand sides.
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& op, const std::vector<int>& constrained_dofs = {});

  /// Solves op * x = rhs on the free dofs with x fixed to `values` on the
  /// constrained dofs (zero when `values` is empty).
  Vector solve(const Vector& rhs, const std::vector<double>& values = {}) const;
  /// Applies the inverse of the free-free block to the free part of rhs and
  /// returns a full-length vector that is zero on constrained dofs.
  Vector solve_homogeneous(const Vector& rhs) const;

  int size() const { return n_; }

 private:
  int n_ = 0;
  std::vector<int> free_;
  std::vector<int> fixed_;
  std::vector<int> position_;  // full dof -> free index or -1
  SparseMatrix free_free_;
  SparseMatrix free_fixed_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

/// Relative residual tolerance every solve must meet.
inline constexpr double kSolveTolerance = 1e-10;

/// One-shot constrained SPD solve.
Vector solve_spd(const SparseMatrix& op, const Vector& rhs, const Constraints* constraints = nullptr);

/// Energy projection onto V_h for the Robin form a(u,v) = (grad u, grad v) + (q u, v)_{Γ_i}.
/// The gradient term of the right side is evaluated through the divergence
/// theorem, so `v` only needs point values.
Vector ritz_projection(const FemSpace& space, const RobinCoefficient& q, const ScalarField& v);

Vector lagrange_interpolate(const FemSpace& space, const ScalarField& v);

/// L2(segment) orthogonal projection of a piecewise-linear sample function onto
/// the P1 traces of `space` along a connected segment.
BoundaryTrace boundary_l2_projection(const FemSpace& space, BoundaryLabel segment, const BoundaryTrace& samples);

/// 1D P1 mass matrix on the arc nodes (used for L2(arc) norms and projections).
SparseMatrix arc_mass_matrix(const BoundaryArc& arc);

/// Exact integral of the product of two piecewise-linear functions on an arc.
double arc_inner_product(const BoundaryTrace& a, const BoundaryTrace& b);

/// ||u_h - u||_{L2(Ω)} with a degree-5 triangle rule.
double l2_error(const FemSpace& space, const Vector& uh, const ScalarField& exact);
/// ||grad(u_h - u)||_{L2(Ω)} with a degree-5 triangle rule.
double h1_seminorm_error(const FemSpace& space, const Vector& uh, const VectorField& exact_gradient);

/// sqrt(u^T op u).
double energy_norm(const SparseMatrix& op, const Vector& u);

}  // namespace kvrobin
