#include "kvrobin/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kvrobin/error.hpp"

namespace kvrobin {

namespace {

// Gauss-Legendre nodes/weights on [0, 1].
constexpr std::array<double, 2> kGauss2X{0.21132486540518713, 0.78867513459481287};
constexpr std::array<double, 2> kGauss2W{0.5, 0.5};
constexpr std::array<double, 5> kGauss5X{0.046910077030668004, 0.23076534494715845, 0.5, 0.76923465505284155,
                                         0.95308992296933200};
constexpr std::array<double, 5> kGauss5W{0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                                         0.23931433524968324, 0.11846344252809454};

// Degree-5 Dunavant rule (7 points), barycentric (a, b, c) with weights summing to 1.
struct TriQuad {
  double l0, l1, l2, w;
};
constexpr double kA1 = 0.059715871789770, kB1 = 0.470142064105115;
constexpr double kA2 = 0.797426985353087, kB2 = 0.101286507323456;
constexpr std::array<TriQuad, 7> kDunavant5{{
    {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
    {kA1, kB1, kB1, 0.132394152788506},
    {kB1, kA1, kB1, 0.132394152788506},
    {kB1, kB1, kA1, 0.132394152788506},
    {kA2, kB2, kB2, 0.125939180544827},
    {kB2, kA2, kB2, 0.125939180544827},
    {kB2, kB2, kA2, 0.125939180544827},
}};

// Gradients of the three barycentric hats on a triangle, plus its area.
struct P1Geometry {
  std::array<Point, 3> grad;
  double area;
};

P1Geometry p1_geometry(const TriMesh& mesh, const std::array<int, 3>& t) {
  const Point a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
  const double twice = cross(b - a, c - a);
  if (!(twice > 0.0)) throw ValidationError("degenerate or inverted triangle in assembly");
  P1Geometry g;
  g.area = 0.5 * twice;
  // grad phi_k = rot90(opposite edge) / (2 * area)
  const std::array<Point, 3> opp{c - b, a - c, b - a};
  for (int k = 0; k < 3; ++k) g.grad[k] = {-opp[k].y / twice, opp[k].x / twice};
  return g;
}

std::optional<BoundaryArc> chain_arc(const TriMesh& mesh, BoundaryLabel label) {
  std::map<int, int> next;
  std::map<int, int> indegree;
  for (const auto& e : mesh.boundary_edges) {
    if (e.label != label) continue;
    next[e.v[0]] = e.v[1];
    indegree[e.v[1]] += 1;
  }
  if (next.empty()) return std::nullopt;
  std::vector<int> starts;
  for (const auto& [tail, head] : next) {
    if (!indegree.contains(tail)) starts.push_back(tail);
  }
  if (starts.size() != 1) return std::nullopt;  // closed loop or several components
  BoundaryArc arc;
  int cur = starts.front();
  arc.dofs.push_back(cur);
  arc.s.push_back(0.0);
  while (next.contains(cur)) {
    const int nxt = next.at(cur);
    arc.s.push_back(arc.s.back() + distance(mesh.vertices[cur], mesh.vertices[nxt]));
    arc.dofs.push_back(nxt);
    cur = nxt;
  }
  if (arc.dofs.size() != next.size() + 1) return std::nullopt;
  return arc;
}

void add_edge_mass(std::vector<Eigen::Triplet<double>>& trip, int a, int b, double w, double t0, double t1,
                   double edge_len) {
  // ∫_{t0}^{t1} w φ_a φ_b on an edge parameterised by t in [0,1].
  const double len = (t1 - t0) * edge_len;
  double maa = 0.0, mab = 0.0, mbb = 0.0;
  for (int g = 0; g < 2; ++g) {
    const double t = t0 + (t1 - t0) * kGauss2X[g];
    const double pa = 1.0 - t, pb = t;
    maa += kGauss2W[g] * pa * pa;
    mab += kGauss2W[g] * pa * pb;
    mbb += kGauss2W[g] * pb * pb;
  }
  trip.emplace_back(a, a, w * len * maa);
  trip.emplace_back(a, b, w * len * mab);
  trip.emplace_back(b, a, w * len * mab);
  trip.emplace_back(b, b, w * len * mbb);
}

// Sub-intervals [t0, t1] of the unit edge parameter between weight breakpoints.
template <typename F>
void for_each_piece(const RobinCoefficient& weight, double s0, double s1, F&& f) {
  std::vector<double> cuts{s0};
  for (double b : weight.breakpoints()) {
    if (b > s0 && b < s1) cuts.push_back(b);
  }
  cuts.push_back(s1);
  const double len = s1 - s0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    f((cuts[k] - s0) / len, (cuts[k + 1] - s0) / len, weight.evaluate(std::min(mid, weight.length())));
  }
}

void check_weight_fits(const BoundaryArc& arc, const RobinCoefficient& weight) {
  if (std::abs(arc.length() - weight.length()) > 1e-9 * arc.length()) {
    throw ValidationError("coefficient length does not match the boundary segment length");
  }
}

}  // namespace

double BoundaryTrace::evaluate(double at) const {
  if (s.empty()) throw ValidationError("empty boundary trace");
  if (at <= s.front()) return values.front();
  if (at >= s.back()) return values.back();
  const auto it = std::upper_bound(s.begin(), s.end(), at);
  const std::size_t k = static_cast<std::size_t>(it - s.begin());
  const double t = (at - s[k - 1]) / (s[k] - s[k - 1]);
  return (1.0 - t) * values[k - 1] + t * values[k];
}

double BoundaryTrace::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

FemSpace::FemSpace(std::shared_ptr<const TriMesh> mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw ValidationError("FemSpace needs a mesh");
  dirichlet_mask_.assign(mesh_->vertices.size(), 0);
  for (const auto& e : mesh_->boundary_edges) {
    if (e.label != BoundaryLabel::GammaAPrime) continue;
    dirichlet_mask_[e.v[0]] = 1;
    dirichlet_mask_[e.v[1]] = 1;
  }
  for (int i = 0; i < dof_count(); ++i) {
    if (dirichlet_mask_[i]) dirichlet_dofs_.push_back(i);
  }
  robin_arc_ = chain_arc(*mesh_, BoundaryLabel::GammaI);
  observation_arc_ = chain_arc(*mesh_, BoundaryLabel::GammaAPrime);
}

const BoundaryArc& FemSpace::arc(BoundaryLabel label) const {
  if (label == BoundaryLabel::GammaI && robin_arc_) return *robin_arc_;
  if (label == BoundaryLabel::GammaAPrime && observation_arc_) return *observation_arc_;
  throw ValidationError("boundary segment " + std::string(to_string(label)) + " is not a single connected arc");
}

std::vector<std::array<int, 2>> FemSpace::edges(std::initializer_list<BoundaryLabel> labels) const {
  std::vector<std::array<int, 2>> out;
  for (const auto& e : mesh_->boundary_edges) {
    if (std::find(labels.begin(), labels.end(), e.label) != labels.end()) out.push_back(e.v);
  }
  return out;
}

SparseMatrix assemble_stiffness(const FemSpace& space) {
  const auto& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const auto g = p1_geometry(mesh, t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], g.area * dot(g.grad[i], g.grad[j]));
    }
  }
  SparseMatrix k(space.dof_count(), space.dof_count());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

SparseMatrix assemble_domain_mass(const FemSpace& space) {
  const auto& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const double area = p1_geometry(mesh, t).area;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
    }
  }
  SparseMatrix m(space.dof_count(), space.dof_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix assemble_boundary_mass(const FemSpace& space, BoundaryLabel segment, const RobinCoefficient& weight) {
  const auto& arc = space.arc(segment);
  check_weight_fits(arc, weight);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k + 1 < arc.dofs.size(); ++k) {
    const double s0 = arc.s[k], s1 = arc.s[k + 1];
    const int a = arc.dofs[k], b = arc.dofs[k + 1];
    for_each_piece(weight, s0, s1,
                   [&](double t0, double t1, double w) { add_edge_mass(trip, a, b, w, t0, t1, s1 - s0); });
  }
  SparseMatrix m(space.dof_count(), space.dof_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Vector assemble_boundary_load(const FemSpace& space, std::initializer_list<BoundaryLabel> labels,
                              const ScalarField& g) {
  const auto& mesh = space.mesh();
  Vector f = Vector::Zero(space.dof_count());
  for (const auto& [a, b] : space.edges(labels)) {
    const Point pa = mesh.vertices[a], pb = mesh.vertices[b];
    const double len = distance(pa, pb);
    for (int q = 0; q < 2; ++q) {
      const double t = kGauss2X[q];
      const double gv = g(pa + t * (pb - pa)) * kGauss2W[q] * len;
      f[a] += gv * (1.0 - t);
      f[b] += gv * t;
    }
  }
  return f;
}

Vector assemble_weighted_boundary_load(const FemSpace& space, BoundaryLabel segment, const RobinCoefficient& weight,
                                       const ScalarField& g) {
  const auto& arc = space.arc(segment);
  check_weight_fits(arc, weight);
  const auto& mesh = space.mesh();
  Vector f = Vector::Zero(space.dof_count());
  for (std::size_t k = 0; k + 1 < arc.dofs.size(); ++k) {
    const int a = arc.dofs[k], b = arc.dofs[k + 1];
    const Point pa = mesh.vertices[a], pb = mesh.vertices[b];
    const double len = arc.s[k + 1] - arc.s[k];
    for_each_piece(weight, arc.s[k], arc.s[k + 1], [&](double t0, double t1, double w) {
      for (int q = 0; q < 5; ++q) {
        const double t = t0 + (t1 - t0) * kGauss5X[q];
        const double gv = w * g(pa + t * (pb - pa)) * kGauss5W[q] * (t1 - t0) * len;
        f[a] += gv * (1.0 - t);
        f[b] += gv * t;
      }
    });
  }
  return f;
}

SpdSolver::SpdSolver(const SparseMatrix& op, const std::vector<int>& constrained_dofs) : n_(op.rows()) {
  if (op.rows() != op.cols()) throw ValidationError("operator must be square");
  position_.assign(n_, -1);
  std::vector<char> fixed(n_, 0);
  for (int d : constrained_dofs) fixed.at(d) = 1;
  for (int i = 0; i < n_; ++i) {
    if (fixed[i]) {
      fixed_.push_back(i);
    } else {
      position_[i] = static_cast<int>(free_.size());
      free_.push_back(i);
    }
  }
  std::vector<int> fixed_pos(n_, -1);
  for (std::size_t k = 0; k < fixed_.size(); ++k) fixed_pos[fixed_[k]] = static_cast<int>(k);

  std::vector<Eigen::Triplet<double>> ff, fc;
  for (int col = 0; col < op.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(op, col); it; ++it) {
      const int r = position_[it.row()];
      if (r < 0) continue;
      if (position_[col] >= 0) {
        ff.emplace_back(r, position_[col], it.value());
      } else {
        fc.emplace_back(r, fixed_pos[col], it.value());
      }
    }
  }
  free_free_.resize(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(free_.size()));
  free_free_.setFromTriplets(ff.begin(), ff.end());
  free_fixed_.resize(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(fixed_.size()));
  free_fixed_.setFromTriplets(fc.begin(), fc.end());
  if (!free_.empty()) {
    ldlt_.compute(free_free_);
    if (ldlt_.info() != Eigen::Success) throw SolverError("sparse LDLT factorisation failed");
    if (!(ldlt_.vectorD().minCoeff() > 0.0)) throw SolverError("operator is not positive definite");
  }
}

Vector SpdSolver::solve(const Vector& rhs, const std::vector<double>& values) const {
  if (rhs.size() != n_) throw ValidationError("right-hand side has wrong length");
  if (!values.empty() && values.size() != fixed_.size()) {
    throw ValidationError("constraint values do not match the constrained dofs");
  }
  Vector x = Vector::Zero(n_);
  Vector xc = Vector::Zero(static_cast<Eigen::Index>(fixed_.size()));
  for (std::size_t k = 0; k < fixed_.size(); ++k) {
    xc[static_cast<Eigen::Index>(k)] = values.empty() ? 0.0 : values[k];
    x[fixed_[k]] = xc[static_cast<Eigen::Index>(k)];
  }
  if (free_.empty()) return x;
  Vector bf(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) bf[static_cast<Eigen::Index>(k)] = rhs[free_[k]];
  if (!fixed_.empty()) bf -= free_fixed_ * xc;
  Vector xf = ldlt_.solve(bf);
  Vector res = bf - free_free_ * xf;
  const double scale = bf.norm();
  if (res.norm() > kSolveTolerance * scale) {
    xf += ldlt_.solve(res);
    res = bf - free_free_ * xf;
    if (res.norm() > kSolveTolerance * scale) throw SolverError("linear solve residual above tolerance");
  }
  for (std::size_t k = 0; k < free_.size(); ++k) x[free_[k]] = xf[static_cast<Eigen::Index>(k)];
  return x;
}

Vector SpdSolver::solve_homogeneous(const Vector& rhs) const { return solve(rhs, {}); }

Vector solve_spd(const SparseMatrix& op, const Vector& rhs, const Constraints* constraints) {
  if (constraints && constraints->dofs.size() != constraints->values.size()) {
    throw ValidationError("constraint dofs and values differ in length");
  }
  if (!constraints) return SpdSolver(op).solve(rhs);
  // SpdSolver orders constrained values by ascending dof.
  std::vector<std::pair<int, double>> pairs;
  for (std::size_t k = 0; k < constraints->dofs.size(); ++k) pairs.emplace_back(constraints->dofs[k], constraints->values[k]);
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> dofs;
  std::vector<double> values;
  for (const auto& [d, v] : pairs) {
    dofs.push_back(d);
    values.push_back(v);
  }
  return SpdSolver(op, dofs).solve(rhs, values);
}

Vector ritz_projection(const FemSpace& space, const RobinCoefficient& q, const ScalarField& v) {
  const auto& mesh = space.mesh();
  // (grad v, grad phi_k)_T = grad phi_k · ∫_T grad v = grad phi_k · ∮_{∂T} v n ds
  Vector rhs = Vector::Zero(space.dof_count());
  for (const auto& t : mesh.triangles) {
    const auto g = p1_geometry(mesh, t);
    Point flux{0.0, 0.0};
    for (int e = 0; e < 3; ++e) {
      const Point a = mesh.vertices[t[e]], b = mesh.vertices[t[(e + 1) % 3]];
      const Point d = b - a;
      const Point n_len{d.y, -d.x};  // outward normal times edge length (CCW triangle)
      double integral = 0.0;
      for (int k = 0; k < 5; ++k) integral += kGauss5W[k] * v(a + kGauss5X[k] * d);
      flux = flux + integral * n_len;
    }
    for (int k = 0; k < 3; ++k) rhs[t[k]] += dot(g.grad[k], flux);
  }
  rhs += assemble_weighted_boundary_load(space, BoundaryLabel::GammaI, q, v);
  const SparseMatrix op = assemble_stiffness(space) + assemble_boundary_mass(space, BoundaryLabel::GammaI, q);
  return solve_spd(op, rhs);
}

Vector lagrange_interpolate(const FemSpace& space, const ScalarField& v) {
  Vector out(space.dof_count());
  for (int i = 0; i < space.dof_count(); ++i) out[i] = v(space.mesh().vertices[i]);
  return out;
}

SparseMatrix arc_mass_matrix(const BoundaryArc& arc) {
  const int n = static_cast<int>(arc.dofs.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k + 1 < n; ++k) {
    const double len = arc.s[k + 1] - arc.s[k];
    trip.emplace_back(k, k, len / 3.0);
    trip.emplace_back(k + 1, k + 1, len / 3.0);
    trip.emplace_back(k, k + 1, len / 6.0);
    trip.emplace_back(k + 1, k, len / 6.0);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

double arc_inner_product(const BoundaryTrace& a, const BoundaryTrace& b) {
  std::vector<double> cuts = a.s;
  cuts.insert(cuts.end(), b.s.begin(), b.s.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double lo = std::max(a.s.front(), b.s.front());
  const double hi = std::min(a.s.back(), b.s.back());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double s0 = std::max(cuts[k], lo), s1 = std::min(cuts[k + 1], hi);
    if (s1 <= s0) continue;
    // Both factors are linear on [s0, s1]: 2-point Gauss is exact.
    for (int q = 0; q < 2; ++q) {
      const double s = s0 + (s1 - s0) * kGauss2X[q];
      total += kGauss2W[q] * (s1 - s0) * a.evaluate(s) * b.evaluate(s);
    }
  }
  return total;
}

BoundaryTrace boundary_l2_projection(const FemSpace& space, BoundaryLabel segment, const BoundaryTrace& samples) {
  const auto& arc = space.arc(segment);
  if (samples.s.size() < 2 || samples.s.size() != samples.values.size()) {
    throw ValidationError("boundary samples need at least two (arclength, value) pairs");
  }
  if (std::abs(samples.s.front() - arc.s.front()) > 1e-9 * arc.length() ||
      std::abs(samples.s.back() - arc.s.back()) > 1e-9 * arc.length()) {
    throw ValidationError("boundary samples do not span the segment");
  }
  const int n = static_cast<int>(arc.dofs.size());
  Vector load = Vector::Zero(n);
  for (int k = 0; k < n; ++k) {
    BoundaryTrace hat;
    const double s = arc.s[k];
    if (k > 0) {
      hat.s.push_back(arc.s[k - 1]);
      hat.values.push_back(0.0);
    }
    hat.s.push_back(s);
    hat.values.push_back(1.0);
    if (k + 1 < n) {
      hat.s.push_back(arc.s[k + 1]);
      hat.values.push_back(0.0);
    }
    load[k] = arc_inner_product(hat, samples);
  }
  const Vector coeff = solve_spd(arc_mass_matrix(arc), load);
  BoundaryTrace out;
  out.dofs = arc.dofs;
  out.s = arc.s;
  out.values.assign(coeff.data(), coeff.data() + coeff.size());
  return out;
}

double l2_error(const FemSpace& space, const Vector& uh, const ScalarField& exact) {
  const auto& mesh = space.mesh();
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const auto g = p1_geometry(mesh, t);
    const Point a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    for (const auto& qp : kDunavant5) {
      const Point x = qp.l0 * a + qp.l1 * b + qp.l2 * c;
      const double diff = qp.l0 * uh[t[0]] + qp.l1 * uh[t[1]] + qp.l2 * uh[t[2]] - exact(x);
      total += qp.w * g.area * diff * diff;
    }
  }
  return std::sqrt(total);
}

double h1_seminorm_error(const FemSpace& space, const Vector& uh, const VectorField& exact_gradient) {
  const auto& mesh = space.mesh();
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const auto g = p1_geometry(mesh, t);
    const Point gh = uh[t[0]] * g.grad[0] + uh[t[1]] * g.grad[1] + uh[t[2]] * g.grad[2];
    const Point a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    for (const auto& qp : kDunavant5) {
      const Point d = gh - exact_gradient(qp.l0 * a + qp.l1 * b + qp.l2 * c);
      total += qp.w * g.area * dot(d, d);
    }
  }
  return std::sqrt(total);
}

double energy_norm(const SparseMatrix& op, const Vector& u) { return std::sqrt(std::max(0.0, u.dot(op * u))); }

}  // namespace kvrobin
