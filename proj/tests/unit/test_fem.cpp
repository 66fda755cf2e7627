#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "kvrobin/error.hpp"

using namespace kvrobin;
using namespace kvrobin::testing;

namespace {

std::shared_ptr<const FemSpace> unit_triangle() {
  auto m = std::make_shared<TriMesh>();
  m->vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m->triangles = {{0, 1, 2}};
  m->boundary_edges = {{{0, 1}, BoundaryLabel::GammaI},
                       {{1, 2}, BoundaryLabel::GammaAPrime},
                       {{2, 0}, BoundaryLabel::GammaA}};
  m->rebuild_vertex_labels();
  return std::make_shared<const FemSpace>(std::shared_ptr<const TriMesh>(m));
}

BoundaryTrace hat(const BoundaryArc& arc, std::size_t k) {
  BoundaryTrace h;
  if (k > 0) {
    h.s.push_back(arc.s[k - 1]);
    h.values.push_back(0.0);
  }
  h.s.push_back(arc.s[k]);
  h.values.push_back(1.0);
  if (k + 1 < arc.s.size()) {
    h.s.push_back(arc.s[k + 1]);
    h.values.push_back(0.0);
  }
  return h;
}

double boundary_norm_sq(const FemSpace& space, const Vector& v) {
  double total = 0.0;
  for (const auto& e : space.mesh().boundary_edges) {
    const double L = distance(space.mesh().vertices[e.v[0]], space.mesh().vertices[e.v[1]]);
    const double a = v[e.v[0]], b = v[e.v[1]];
    total += L / 3.0 * (a * a + a * b + b * b);
  }
  return total;
}

}  // namespace

TEST_CASE("local P1 matrices on the unit right triangle") {
  const auto space = unit_triangle();
  const Eigen::MatrixXd K = assemble_stiffness(*space);
  const double k_expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  const Eigen::MatrixXd M = assemble_domain_mass(*space);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(K(i, j) == doctest::Approx(k_expected[i][j]).epsilon(1e-15));
      CHECK(M(i, j) == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("boundary mass on a single edge") {
  const auto space = unit_triangle();
  const Eigen::MatrixXd B = assemble_boundary_mass(*space, BoundaryLabel::GammaI, RobinCoefficient::constant(1.0, 1.0));
  CHECK(B(0, 0) == doctest::Approx(2.0 / 6.0));
  CHECK(B(0, 1) == doctest::Approx(1.0 / 6.0));
  CHECK(B(1, 1) == doctest::Approx(2.0 / 6.0));
  CHECK(B(2, 2) == 0.0);

  // breakpoint at the edge midpoint: sum of the two half-edge blocks
  const Eigen::MatrixXd S = assemble_boundary_mass(*space, BoundaryLabel::GammaI, RobinCoefficient(1.0, {0.5}, {1.0, 2.0}));
  CHECK(S(0, 0) == doctest::Approx(0.375));
  CHECK(S(0, 1) == doctest::Approx(0.25));
  CHECK(S(1, 0) == doctest::Approx(0.25));
  CHECK(S(1, 1) == doctest::Approx(0.625));
}

TEST_CASE("assembled operators on the square") {
  const auto space = square_space(0.25);
  const SparseMatrix K = assemble_stiffness(*space);
  const SparseMatrix M = assemble_domain_mass(*space);
  const Vector ones = Vector::Ones(space->dof_count());
  CHECK((K * ones).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(SparseMatrix(K - SparseMatrix(K.transpose())).norm() == 0.0);
  CHECK(SparseMatrix(M - SparseMatrix(M.transpose())).norm() == 0.0);
  CHECK(ones.dot(M * ones) == doctest::Approx(4.0).epsilon(1e-14));

  const RobinCoefficient q(2.0, {0.7, 1.3}, {1.0, 2.5, 1.5});
  const SparseMatrix B = assemble_boundary_mass(*space, BoundaryLabel::GammaI, q);
  CHECK(ones.dot(B * ones) == doctest::Approx(0.7 + 2.5 * 0.6 + 1.5 * 0.7).epsilon(1e-14));
  CHECK(SparseMatrix(B - SparseMatrix(B.transpose())).norm() < 1e-15);
}

TEST_CASE("boundary loads") {
  const auto space = square_space(0.25, ObservationArc::edge(SquareEdge::Right, SquareEdge::Top));
  const Vector one = assemble_boundary_load(*space, {BoundaryLabel::GammaAPrime}, [](const Point&) { return 1.0; });
  CHECK(one.sum() == doctest::Approx(2.0).epsilon(1e-14));
  const Vector zero = assemble_boundary_load(*space, {BoundaryLabel::GammaA}, [](const Point&) { return 0.0; });
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
  const Vector g = assemble_boundary_load(*space, {BoundaryLabel::GammaAPrime}, flux);
  CHECK(std::abs(g.sum() - 4.0 / 3.0) < 1e-12);
  const Vector all = assemble_boundary_load(*space, {BoundaryLabel::GammaA, BoundaryLabel::GammaAPrime},
                                            [](const Point&) { return 1.0; });
  CHECK(all.sum() == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("solve_spd small cases") {
  SparseMatrix I(3, 3);
  I.setIdentity();
  Vector b(3);
  b << 1.0, -2.0, 3.5;
  CHECK((solve_spd(I, b) - b).norm() < 1e-15);

  SparseMatrix A(2, 2);
  A.insert(0, 0) = 2.0;
  A.insert(0, 1) = 1.0;
  A.insert(1, 0) = 1.0;
  A.insert(1, 1) = 2.0;
  const Vector x = solve_spd(A, Vector::Constant(2, 3.0));
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));

  Constraints all{{0, 1}, {4.0, -7.0}};
  const Vector y = solve_spd(A, Vector::Constant(2, 3.0), &all);
  CHECK(y[0] == 4.0);
  CHECK(y[1] == -7.0);

  SparseMatrix bad(2, 2);
  bad.insert(0, 0) = 1.0;
  bad.insert(1, 1) = -1.0;
  CHECK_THROWS_AS(solve_spd(bad, Vector::Ones(2)), SolverError);
}

TEST_CASE("constrained solve keeps boundary values and meets the residual bound") {
  const auto space = square_space(0.25);
  const FemSpace& s = *space;
  SparseMatrix A = assemble_stiffness(s) + assemble_boundary_mass(s, BoundaryLabel::GammaI, RobinCoefficient::constant(2.0, 1.0));
  std::mt19937_64 rng(7);
  const Vector rhs = random_vector(s.dof_count(), rng);
  Constraints c;
  c.dofs = s.dirichlet_dofs();
  for (std::size_t k = 0; k < c.dofs.size(); ++k) c.values.push_back(0.1 * static_cast<double>(k));
  const Vector u = solve_spd(A, rhs, &c);
  for (std::size_t k = 0; k < c.dofs.size(); ++k) CHECK(u[c.dofs[k]] == c.values[k]);
  Vector r = A * u - rhs;
  for (int d : c.dofs) r[d] = 0.0;
  CHECK(r.norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("Robin operator is positive definite") {
  const auto space = square_space(0.25);
  const RobinCoefficient q(2.0, {1.0}, {0.1, 10.0});
  const SparseMatrix A = assemble_stiffness(*space) + assemble_boundary_mass(*space, BoundaryLabel::GammaI, q);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const Vector v = random_vector(space->dof_count(), rng);
    CHECK(v.dot(A * v) > 0.0);
  }
}

TEST_CASE("boundary trace inequality on P1 functions") {
  // On the square |x . n| = 1 on every edge, so ||v||^2_{∂Ω} <= (2 + 2 sqrt 2) ||v|| ||v||_{H1}.
  const auto space = square_space(0.25);
  const SparseMatrix K = assemble_stiffness(*space);
  const SparseMatrix M = assemble_domain_mass(*space);
  const double c = 2.0 + 2.0 * std::sqrt(2.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Vector v = random_vector(space->dof_count(), rng);
    const double l2 = std::sqrt(v.dot(M * v));
    const double h1 = std::sqrt(v.dot(M * v) + v.dot(K * v));
    CHECK(boundary_norm_sq(*space, v) <= c * l2 * h1);
  }
}

TEST_CASE("Ritz projection reproduces V_h and converges for smooth functions") {
  const RobinCoefficient q(2.0, {1.2}, {1.0, 2.0});
  const auto space = square_space(0.25);
  const ScalarField lin = [](const Point& p) { return 0.3 + p.x - 2.0 * p.y; };
  CHECK((ritz_projection(*space, q, lin) - lagrange_interpolate(*space, lin)).cwiseAbs().maxCoeff() < 1e-10);

  const ScalarField v = [](const Point& p) { return std::sin(p.x) * std::cosh(p.y) + p.x * p.y; };
  const VectorField dv = [](const Point& p) {
    return Point{std::cos(p.x) * std::cosh(p.y) + p.y, std::sin(p.x) * std::sinh(p.y) + p.x};
  };
  std::vector<double> e0, e1;
  for (int level = 0; level < 5; ++level) {
    const auto s = refined_space(0.5, level);
    const Vector r = ritz_projection(*s, q, v);
    e0.push_back(l2_error(*s, r, v));
    e1.push_back(h1_seminorm_error(*s, r, dv));
  }
  for (std::size_t k = 1; k < e0.size(); ++k) {
    CHECK(std::log2(e0[k - 1] / e0[k]) >= 1.8);
    CHECK(std::log2(e1[k - 1] / e1[k]) >= 0.9);
  }
}

TEST_CASE("Lagrange interpolation") {
  const auto space = square_space(0.25);
  const ScalarField lin = [](const Point& p) { return 2.0 - p.x + 0.5 * p.y; };
  const Vector u = lagrange_interpolate(*space, lin);
  CHECK(l2_error(*space, u, lin) < 1e-13);

  const ScalarField sq = [](const Point& p) { return p.x * p.x; };
  double previous = 0.0;
  for (int level = 0; level < 3; ++level) {
    const auto s = refined_space(0.5, level);
    const Vector w = lagrange_interpolate(*s, sq);
    double err = 0.0;
    for (const auto& t : s->mesh().triangles) {
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3];
        const Point m = midpoint(s->mesh().vertices[a], s->mesh().vertices[b]);
        err = std::max(err, std::abs(0.5 * (w[a] + w[b]) - sq(m)));
      }
    }
    const double h = s->mesh().max_diameter();
    CHECK(err <= h * h / 8.0 * 2.0 + 1e-14);
    if (level > 0) CHECK(previous / err == doctest::Approx(4.0).epsilon(1e-9));
    previous = err;
  }
}

TEST_CASE("boundary L2 projection") {
  const auto space = square_space(0.25);
  const auto& arc = space->arc(BoundaryLabel::GammaAPrime);

  BoundaryTrace coarse{arc.dofs, arc.s, {}};
  for (double s : arc.s) coarse.values.push_back(std::sin(s));
  const auto same = boundary_l2_projection(*space, BoundaryLabel::GammaAPrime, coarse);
  for (std::size_t k = 0; k < arc.s.size(); ++k) CHECK(same.values[k] == doctest::Approx(coarse.values[k]).epsilon(1e-12));

  BoundaryTrace fine;
  const int n = 8 * static_cast<int>(arc.s.size());
  for (int k = 0; k <= n; ++k) {
    const double s = arc.length() * k / n;
    fine.s.push_back(s);
    fine.values.push_back(std::cos(3.0 * s) + 0.5);
  }
  const auto p = boundary_l2_projection(*space, BoundaryLabel::GammaAPrime, fine);
  double worst = 0.0;
  for (std::size_t k = 0; k < arc.s.size(); ++k) {
    const auto h = hat(arc, k);
    worst = std::max(worst, std::abs(arc_inner_product(h, p) - arc_inner_product(h, fine)));
  }
  CHECK(worst <= 1e-10);

  BoundaryTrace constant{{}, {0.0, arc.length()}, {2.5, 2.5}};
  for (double v : boundary_l2_projection(*space, BoundaryLabel::GammaAPrime, constant).values) {
    CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
  }
  BoundaryTrace short_samples{{}, {0.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(boundary_l2_projection(*space, BoundaryLabel::GammaAPrime, short_samples), ValidationError);
}

TEST_CASE("FemSpace arcs") {
  const auto space = square_space(0.25, ObservationArc{1.0, 5.0});
  const auto& gi = space->arc(BoundaryLabel::GammaI);
  CHECK(gi.length() == doctest::Approx(2.0));
  for (std::size_t k = 1; k < gi.s.size(); ++k) CHECK(gi.s[k] > gi.s[k - 1]);
  CHECK(space->arc(BoundaryLabel::GammaAPrime).length() == doctest::Approx(4.0));
  CHECK_THROWS_AS(space->arc(BoundaryLabel::GammaA), ValidationError);
  for (int d : space->dirichlet_dofs()) CHECK(space->is_dirichlet(d));
}
