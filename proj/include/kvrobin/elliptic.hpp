#pragma once

#include <optional>

#include "kvrobin/fem.hpp"

namespace kvrobin {

/// Right-hand side data for the Neumann-Robin and Dirichlet-Robin problems.
struct EllipticProblemData {
  ScalarField g;                               // flux on Γ_a
  std::optional<BoundaryTrace> dirichlet_data;  // values on the Γ_a′ dofs
  std::optional<Vector> extra_domain_source;    // nodal s, enters as -(s, v)
  ScalarField extra_robin_data;                 // ψ on Γ_i, empty when unused
};

/// Assembled operators shared by every solve on one (space, q) pair.
struct FemSystem {
  SparseMatrix stiffness;
  SparseMatrix robin_mass;
  SparseMatrix domain_mass;
  SparseMatrix robin_operator;  // stiffness + robin_mass

  FemSystem(const FemSpace& space, const RobinCoefficient& q);
};

/// Dirichlet values on Γ_a′ ordered like FemSpace::dirichlet_dofs().
std::vector<double> constraint_values(const FemSpace& space, const BoundaryTrace& data);

/// Right side (g, v)_{Γ_a} + (ψ, v)_{Γ_i} - (s, v). When `q` is given the ψ term
/// is integrated with Γ_i edges split at its breakpoints, where ψ may jump.
Vector elliptic_load(const FemSpace& space, const SparseMatrix& domain_mass, const EllipticProblemData& data,
                     const RobinCoefficient* q = nullptr);

/// (∇u, ∇v) + (q u, v)_{Γ_i} = (g, v)_{Γ_a} for all v in V_h.
Vector solve_neumann_robin(const FemSpace& space, const RobinCoefficient& q, const EllipticProblemData& data);

/// Same form tested against V_h^{0,a}, with u = dirichlet_data on Γ_a′.
Vector solve_dirichlet_robin(const FemSpace& space, const RobinCoefficient& q, const EllipticProblemData& data);

/// Nodal values of u along a connected segment (Γ_i or Γ_a′) with arclength.
BoundaryTrace trace_on_segment(const FemSpace& space, const Vector& u, BoundaryLabel segment);

}  // namespace kvrobin
