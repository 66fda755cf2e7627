#include "kvrobin/parabolic.hpp"

#include <cmath>

#include "kvrobin/error.hpp"

namespace kvrobin {

void TimeGrid::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("final time T must be positive");
  if (M < 1) throw ValidationError("time step count M must be at least 1");
}

TimeGrid TimeGrid::with_step(double T, double tau) {
  if (!(tau > 0.0)) throw ValidationError("time step must be positive");
  // Guard against T/tau landing a hair above an integer.
  const int m = static_cast<int>(std::ceil(T / tau - 1e-9));
  TimeGrid grid{T, std::max(1, m)};
  grid.validate();
  return grid;
}

Vector build_initial_data(const FemSpace& space, const RobinCoefficient& q_dag, const ScalarField& source,
                          const ScalarField& g) {
  EllipticProblemData data;
  data.g = g;
  if (source) data.extra_domain_source = -lagrange_interpolate(space, source);
  return solve_neumann_robin(space, q_dag, data);
}

ParabolicSolution step_backward_euler(const FemSystem& sys, const Vector& load, const Vector& u0,
                                      const TimeGrid& grid, bool store_trajectory, const StepObserver& observer) {
  grid.validate();
  if (u0.size() != sys.domain_mass.rows()) throw ValidationError("initial state has wrong length");
  const double inv_tau = 1.0 / grid.tau();
  const SparseMatrix mass_tau = inv_tau * sys.domain_mass;
  const SpdSolver solver(SparseMatrix(mass_tau + sys.robin_operator));

  ParabolicSolution sol;
  if (store_trajectory) {
    sol.trajectory.reserve(static_cast<std::size_t>(grid.M) + 1);
    sol.trajectory.push_back(u0);
  }
  if (observer) observer(0, u0);
  Vector prev = u0;
  Vector cur;
  for (int m = 1; m <= grid.M; ++m) {
    cur = solver.solve(mass_tau * prev + load);
    if (store_trajectory) sol.trajectory.push_back(cur);
    if (observer) observer(m, cur);
    if (m < grid.M) prev.swap(cur);
  }
  sol.time_derivative = (cur - prev) * inv_tau;
  sol.final_state = std::move(cur);
  return sol;
}

ParabolicSolution step_backward_euler(const FemSpace& space, const RobinCoefficient& q, const ScalarField& g,
                                      const Vector& u0, const TimeGrid& grid, bool store_trajectory,
                                      const StepObserver& observer) {
  const FemSystem sys(space, q);
  EllipticProblemData data;
  data.g = g;
  return step_backward_euler(sys, elliptic_load(space, sys.domain_mass, data), u0, grid, store_trajectory, observer);
}

Vector solve_terminal_dirichlet(const FemSpace& space, const RobinCoefficient& q, const ScalarField& g,
                                const BoundaryTrace& z, const Vector& dtu) {
  EllipticProblemData data;
  data.g = g;
  data.dirichlet_data = z;
  data.extra_domain_source = dtu;
  return solve_dirichlet_robin(space, q, data);
}

double l2_norm(const SparseMatrix& domain_mass, const Vector& v) { return energy_norm(domain_mass, v); }

}  // namespace kvrobin
