#include "kvrobin/objective.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "kvrobin/error.hpp"

namespace kvrobin {

namespace {

constexpr std::array<double, 3> kGauss3X{0.1127016653792583, 0.5, 0.8872983346207417};
constexpr std::array<double, 3> kGauss3W{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double edge_value(const GradientDensity::Edge& e, double s) {
  const double t = (s - e.s0) / (e.s1 - e.s0);
  return e.a00 * (1.0 - t) * (1.0 - t) + e.a01 * t * (1.0 - t) + e.a11 * t * t;
}

std::vector<GradientDensity::Edge> empty_edges(const BoundaryArc& arc) {
  std::vector<GradientDensity::Edge> edges;
  edges.reserve(arc.dofs.size());
  for (std::size_t k = 0; k + 1 < arc.dofs.size(); ++k) edges.push_back({arc.s[k], arc.s[k + 1], 0.0, 0.0, 0.0});
  return edges;
}

}  // namespace

void FunctionalConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be finite and non-negative");
}

double GradientDensity::value_at(double s) const {
  if (edges_.empty()) return 0.0;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), s, [](double v, const Edge& e) { return v < e.s1; });
  if (it == edges_.end()) --it;
  return edge_value(*it, std::clamp(s, it->s0, it->s1));
}

double GradientDensity::integrate(double lo, double hi) const {
  double total = 0.0;
  for (const auto& e : edges_) {
    const double a = std::max(lo, e.s0), b = std::min(hi, e.s1);
    if (b <= a) continue;
    for (int k = 0; k < 3; ++k) total += kGauss3W[k] * (b - a) * edge_value(e, a + kGauss3X[k] * (b - a));
  }
  return total;
}

void accumulate_product(std::vector<GradientDensity::Edge>& edges, const BoundaryArc& arc, const Vector& a,
                        const Vector& b, double w) {
  for (std::size_t k = 0; k + 1 < arc.dofs.size(); ++k) {
    const int i = arc.dofs[k], j = arc.dofs[k + 1];
    edges[k].a00 += w * a[i] * b[i];
    edges[k].a01 += w * (a[i] * b[j] + a[j] * b[i]);
    edges[k].a11 += w * a[j] * b[j];
  }
}

KohnVogelius::KohnVogelius(std::shared_ptr<const FemSpace> space, ScalarField g, BoundaryTrace z,
                           FunctionalConfig config)
    : space_(std::move(space)), g_(std::move(g)), z_(std::move(z)), config_(config) {
  if (!space_) throw ValidationError("objective needs a FEM space");
  config_.validate();
  stiffness_ = assemble_stiffness(*space_);
  domain_mass_ = assemble_domain_mass(*space_);
  EllipticProblemData data;
  data.g = g_;
  load_ = elliptic_load(*space_, domain_mass_, data);
  constraint_values_ = constraint_values(*space_, z_);
}

KohnVogelius::KohnVogelius(std::shared_ptr<const FemSpace> space, ScalarField g, BoundaryTrace z,
                           FunctionalConfig config, TimeGrid grid, Vector u0)
    : KohnVogelius(std::move(space), std::move(g), std::move(z), config) {
  grid.validate();
  if (u0.size() != space_->dof_count()) throw ValidationError("initial state has wrong length");
  config_.mode = Model::Parabolic;
  grid_ = grid;
  u0_ = std::move(u0);
}

ObjectiveEvaluation KohnVogelius::evaluate(const RobinCoefficient& q, bool with_gradient) const {
  if (!q.in_box()) throw ValidationError("coefficient outside its box");
  return config_.mode == Model::Elliptic ? evaluate_elliptic(q, with_gradient) : evaluate_parabolic(q, with_gradient);
}

void KohnVogelius::fill_misfit(ObjectiveEvaluation& out, const SparseMatrix& robin_mass, const Vector& e) const {
  out.energy_misfit = e.dot(stiffness_ * e);
  out.robin_misfit = e.dot(robin_mass * e);
  out.l2_penalty = config_.alpha * e.dot(domain_mass_ * e);
  out.total = out.energy_misfit + out.robin_misfit + out.l2_penalty;
}

void KohnVogelius::fill_gradients(ObjectiveEvaluation& out, const RobinCoefficient& q,
                                  GradientDensity density) const {
  out.piece_gradients.resize(q.piece_count());
  for (std::size_t j = 0; j < q.piece_count(); ++j) {
    out.piece_gradients[j] = density.integrate(q.piece_start(j), q.piece_end(j));
  }
  out.breakpoint_gradients.resize(q.breakpoints().size());
  for (std::size_t j = 0; j < q.breakpoints().size(); ++j) {
    out.breakpoint_gradients[j] = (q.values()[j] - q.values()[j + 1]) * density.value_at(q.breakpoints()[j]);
  }
  out.density = std::move(density);
  out.has_gradient = true;
}

ObjectiveEvaluation KohnVogelius::evaluate_elliptic(const RobinCoefficient& q, bool with_gradient) const {
  const SparseMatrix robin_mass = assemble_boundary_mass(*space_, BoundaryLabel::GammaI, q);
  const SparseMatrix op = stiffness_ + robin_mass;
  const SpdSolver neumann(op);
  const SpdSolver dirichlet(op, space_->dirichlet_dofs());

  ObjectiveEvaluation out;
  out.u_N = neumann.solve(load_);
  out.u_D = dirichlet.solve(load_, constraint_values_);
  const Vector e = out.u_N - out.u_D;
  fill_misfit(out, robin_mass, e);
  if (!with_gradient) return out;

  // dJ/dq_j = e^T B_j e - 2 lambda_N^T B_j u_N + 2 lambda_D^T B_j u_D,
  // with A lambda_N = r and A_FF lambda_D = r_F, r = (A + alpha M) e.
  const double a = config_.alpha_branch ? config_.alpha : 0.0;
  const Vector r = op * e + a * (domain_mass_ * e);
  out.adjoint_N = neumann.solve(r);
  out.adjoint_D = dirichlet.solve_homogeneous(r);

  const auto& arc = space_->arc(BoundaryLabel::GammaI);
  auto edges = empty_edges(arc);
  accumulate_product(edges, arc, e, e, 1.0);
  accumulate_product(edges, arc, out.adjoint_N, out.u_N, -2.0);
  accumulate_product(edges, arc, out.adjoint_D, out.u_D, 2.0);
  fill_gradients(out, q, GradientDensity(std::move(edges)));
  return out;
}

ObjectiveEvaluation KohnVogelius::evaluate_parabolic(const RobinCoefficient& q, bool with_gradient) const {
  const TimeGrid& grid = *grid_;
  const double inv_tau = 1.0 / grid.tau();
  const SparseMatrix robin_mass = assemble_boundary_mass(*space_, BoundaryLabel::GammaI, q);
  const SparseMatrix op = stiffness_ + robin_mass;
  const SparseMatrix mass_tau = inv_tau * domain_mass_;
  const SpdSolver stepper(SparseMatrix(mass_tau + op));
  const auto& arc = space_->arc(BoundaryLabel::GammaI);
  const std::size_t n_arc = arc.dofs.size();

  // Forward sweep keeping only Γ_i traces of u^m (all the gradient needs).
  std::vector<double> traces;
  if (with_gradient) traces.reserve((static_cast<std::size_t>(grid.M) + 1) * n_arc);
  auto keep_trace = [&](const Vector& u) {
    for (int d : arc.dofs) traces.push_back(u[d]);
  };
  Vector prev = u0_;
  if (with_gradient) keep_trace(prev);
  Vector cur = prev;
  for (int m = 1; m <= grid.M; ++m) {
    cur = stepper.solve(mass_tau * prev + load_);
    if (with_gradient) keep_trace(cur);
    if (m < grid.M) prev.swap(cur);
  }
  const Vector dtu = (cur - prev) * inv_tau;

  const SpdSolver dirichlet(op, space_->dirichlet_dofs());
  ObjectiveEvaluation out;
  out.u_N = cur;
  out.u_D = dirichlet.solve(load_ - domain_mass_ * dtu, constraint_values_);
  const Vector e = out.u_N - out.u_D;
  fill_misfit(out, robin_mass, e);
  if (!with_gradient) return out;

  // mu: Dirichlet adjoint (zero on Γ_a′); p^m: backward-Euler adjoint with
  // terminal sources c_M = r + M mu / tau and c_{M-1} = -M mu / tau.
  const double a = config_.alpha_branch ? config_.alpha : 0.0;
  const Vector r = op * e + a * (domain_mass_ * e);
  const Vector mu = dirichlet.solve_homogeneous(r);
  const Vector m_mu = mass_tau * mu;
  out.adjoint_D = mu;

  auto edges = empty_edges(arc);
  accumulate_product(edges, arc, e, e, 1.0);
  accumulate_product(edges, arc, mu, out.u_D, 2.0);

  Vector p = stepper.solve(r + m_mu);
  out.adjoint_N = p;
  Vector u_m(space_->dof_count());
  for (int m = grid.M; m >= 1; --m) {
    // Only Γ_i entries of u^m are read by accumulate_product.
    const double* tr = traces.data() + static_cast<std::size_t>(m) * n_arc;
    for (std::size_t k = 0; k < n_arc; ++k) u_m[arc.dofs[k]] = tr[k];
    accumulate_product(edges, arc, p, u_m, -2.0);
    if (m == 1) break;
    Vector rhs = mass_tau * p;
    if (m == grid.M) rhs -= m_mu;
    p = stepper.solve(rhs);
  }
  fill_gradients(out, q, GradientDensity(std::move(edges)));
  return out;
}

}  // namespace kvrobin
