#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "kvrobin/parabolic.hpp"

namespace kvrobin {

enum class Model : std::uint8_t { Elliptic, Parabolic };

struct FunctionalConfig {
  double alpha = 0.0;
  Model mode = Model::Elliptic;
  /// When false the adjoint sources drop the alpha-weighted terms. Only
  /// meaningful as a diagnostic; with alpha = 0 both settings agree.
  bool alpha_branch = true;

  void validate() const;
};

/// Gradient density on Γ_i, quadratic on each boundary edge:
///   a00 (1-t)^2 + a01 t (1-t) + a11 t^2   for s = s0 + t (s1 - s0).
class GradientDensity {
 public:
  struct Edge {
    double s0, s1;
    double a00, a01, a11;
  };

  GradientDensity() = default;
  explicit GradientDensity(std::vector<Edge> edges) : edges_(std::move(edges)) {}

  const std::vector<Edge>& edges() const { return edges_; }
  double value_at(double s) const;
  /// ∫_{lo}^{hi} density ds, split at edge ends, 3-point Gauss per piece.
  double integrate(double lo, double hi) const;

 private:
  std::vector<Edge> edges_;
};

struct ObjectiveEvaluation {
  double total = 0.0;
  double energy_misfit = 0.0;   // ||∇(u_N - u_D)||^2
  double robin_misfit = 0.0;    // ||q^{1/2}(u_N - u_D)||^2 on Γ_i
  double l2_penalty = 0.0;      // alpha ||u_N - u_D||^2
  Vector u_N;
  Vector u_D;
  // Adjoint states of the discrete problem: lambda_N pairs with u_N (in the
  // parabolic case its value at t_M), lambda_D with u_D.
  Vector adjoint_N;
  Vector adjoint_D;
  bool has_gradient = false;
  GradientDensity density;
  std::vector<double> piece_gradients;
  std::vector<double> breakpoint_gradients;
};

/// Objective with the gradients the optimisers need.
class ObjectiveFunction {
 public:
  virtual ~ObjectiveFunction() = default;
  virtual ObjectiveEvaluation evaluate(const RobinCoefficient& q, bool with_gradient) const = 0;
};

/// Discrete Kohn-Vogelius functional
///   J(q) = ||∇e||^2 + ||q^{1/2} e||^2_{Γ_i} + alpha ||e||^2,   e = u_N(q) - u_D(q),
/// elliptic or backward-Euler parabolic (observed at t = T).
class KohnVogelius : public ObjectiveFunction {
 public:
  /// Elliptic functional.
  KohnVogelius(std::shared_ptr<const FemSpace> space, ScalarField g, BoundaryTrace z, FunctionalConfig config);
  /// Parabolic functional; u0 is fixed (independent of q).
  KohnVogelius(std::shared_ptr<const FemSpace> space, ScalarField g, BoundaryTrace z, FunctionalConfig config,
               TimeGrid grid, Vector u0);

  ObjectiveEvaluation evaluate(const RobinCoefficient& q, bool with_gradient) const override;

  const FemSpace& space() const { return *space_; }
  const FunctionalConfig& config() const { return config_; }
  const BoundaryTrace& data() const { return z_; }

 private:
  ObjectiveEvaluation evaluate_elliptic(const RobinCoefficient& q, bool with_gradient) const;
  ObjectiveEvaluation evaluate_parabolic(const RobinCoefficient& q, bool with_gradient) const;
  void fill_misfit(ObjectiveEvaluation& out, const SparseMatrix& robin_mass, const Vector& e) const;
  void fill_gradients(ObjectiveEvaluation& out, const RobinCoefficient& q, GradientDensity density) const;

  std::shared_ptr<const FemSpace> space_;
  ScalarField g_;
  BoundaryTrace z_;
  FunctionalConfig config_;
  std::optional<TimeGrid> grid_;
  Vector u0_;
  SparseMatrix stiffness_;
  SparseMatrix domain_mass_;
  Vector load_;
  std::vector<double> constraint_values_;
};

/// Per-edge products of two nodal vectors on the Γ_i arc, accumulated into
/// density coefficients with weight w.
void accumulate_product(std::vector<GradientDensity::Edge>& edges, const BoundaryArc& arc, const Vector& a,
                        const Vector& b, double w);

}  // namespace kvrobin
