#include "kvrobin/elliptic.hpp"

#include <cmath>
#include <map>

#include "kvrobin/error.hpp"

namespace kvrobin {

FemSystem::FemSystem(const FemSpace& space, const RobinCoefficient& q)
    : stiffness(assemble_stiffness(space)),
      robin_mass(assemble_boundary_mass(space, BoundaryLabel::GammaI, q)),
      domain_mass(assemble_domain_mass(space)),
      robin_operator(stiffness + robin_mass) {}

std::vector<double> constraint_values(const FemSpace& space, const BoundaryTrace& data) {
  if (data.dofs.size() != data.values.size()) {
    throw ValidationError("Dirichlet data must carry one value per Γ_a′ dof");
  }
  std::map<int, double> by_dof;
  for (std::size_t k = 0; k < data.dofs.size(); ++k) by_dof[data.dofs[k]] = data.values[k];
  std::vector<double> out;
  out.reserve(space.dirichlet_dofs().size());
  for (int d : space.dirichlet_dofs()) {
    const auto it = by_dof.find(d);
    if (it == by_dof.end()) throw ValidationError("Dirichlet data missing on a Γ_a′ dof");
    out.push_back(it->second);
  }
  if (by_dof.size() != out.size()) throw ValidationError("Dirichlet data given on dofs outside Γ_a′");
  return out;
}

Vector elliptic_load(const FemSpace& space, const SparseMatrix& domain_mass, const EllipticProblemData& data,
                     const RobinCoefficient* q) {
  Vector b = data.g ? assemble_boundary_load(space, {BoundaryLabel::GammaA, BoundaryLabel::GammaAPrime}, data.g)
                    : Vector::Zero(space.dof_count());
  if (data.extra_robin_data) {
    if (q) {
      const auto cuts = q->with_values(std::vector<double>(q->piece_count(), 1.0));
      b += assemble_weighted_boundary_load(space, BoundaryLabel::GammaI, cuts, data.extra_robin_data);
    } else {
      b += assemble_boundary_load(space, {BoundaryLabel::GammaI}, data.extra_robin_data);
    }
  }
  if (data.extra_domain_source) {
    if (data.extra_domain_source->size() != space.dof_count()) {
      throw ValidationError("domain source has wrong length");
    }
    b -= domain_mass * (*data.extra_domain_source);
  }
  return b;
}

Vector solve_neumann_robin(const FemSpace& space, const RobinCoefficient& q, const EllipticProblemData& data) {
  const FemSystem sys(space, q);
  return SpdSolver(sys.robin_operator).solve(elliptic_load(space, sys.domain_mass, data, &q));
}

Vector solve_dirichlet_robin(const FemSpace& space, const RobinCoefficient& q, const EllipticProblemData& data) {
  if (!data.dirichlet_data) throw ValidationError("Dirichlet-Robin solve needs dirichlet_data");
  const FemSystem sys(space, q);
  const SpdSolver solver(sys.robin_operator, space.dirichlet_dofs());
  return solver.solve(elliptic_load(space, sys.domain_mass, data, &q), constraint_values(space, *data.dirichlet_data));
}

BoundaryTrace trace_on_segment(const FemSpace& space, const Vector& u, BoundaryLabel segment) {
  if (u.size() != space.dof_count()) throw ValidationError("nodal vector has wrong length");
  const auto& arc = space.arc(segment);
  BoundaryTrace t;
  t.dofs = arc.dofs;
  t.s = arc.s;
  t.values.reserve(arc.dofs.size());
  for (int d : arc.dofs) t.values.push_back(u[d]);
  return t;
}

}  // namespace kvrobin
