#pragma once

#include <functional>
#include <vector>

#include "kvrobin/elliptic.hpp"

namespace kvrobin {

struct TimeGrid {
  double T = 10.0;
  int M = 50;

  double tau() const { return T / M; }
  void validate() const;
  /// Smallest M with T / M <= tau.
  static TimeGrid with_step(double T, double tau);
};

struct ParabolicSolution {
  Vector final_state;
  Vector time_derivative;          // (u^M - u^{M-1}) / tau
  std::vector<Vector> trajectory;  // u^0 .. u^M when requested
};

/// u_0 solving -Δu_0 = f with ∂_n u_0 + q u_0 = 0 on Γ_i and ∂_n u_0 = g on Γ_a,
/// discretised on `space` (so R_h u_0 is the discrete solution itself).
Vector build_initial_data(const FemSpace& space, const RobinCoefficient& q_dag, const ScalarField& source,
                          const ScalarField& g);

/// Called with (m, u^m) for m = 0..M.
using StepObserver = std::function<void(int, const Vector&)>;

/// Backward Euler: (M/tau + K + B_q) u^m = (M/tau) u^{m-1} + (g, v)_{Γ_a}.
ParabolicSolution step_backward_euler(const FemSpace& space, const RobinCoefficient& q, const ScalarField& g,
                                      const Vector& u0, const TimeGrid& grid, bool store_trajectory,
                                      const StepObserver& observer = {});

/// Same scheme reusing an assembled system and a precomputed load.
ParabolicSolution step_backward_euler(const FemSystem& sys, const Vector& load, const Vector& u0,
                                      const TimeGrid& grid, bool store_trajectory, const StepObserver& observer = {});

/// Dirichlet-Robin problem at t = T with the term -(dtu, v) on the right side.
Vector solve_terminal_dirichlet(const FemSpace& space, const RobinCoefficient& q, const ScalarField& g,
                                const BoundaryTrace& z, const Vector& dtu);

/// ||v||_{L2(Ω)} for a nodal vector, via the mass matrix.
double l2_norm(const SparseMatrix& domain_mass, const Vector& v);

}  // namespace kvrobin
