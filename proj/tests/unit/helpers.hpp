#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "kvrobin/fem.hpp"
#include "kvrobin/geometry.hpp"
#include "kvrobin/mesh.hpp"

namespace kvrobin::testing {

inline std::shared_ptr<const TriMesh> square_mesh(double h, ObservationArc obs = ObservationArc::full(), double r = 1.0) {
  MeshSpec spec;
  spec.h = h;
  spec.r = r;
  return std::make_shared<const TriMesh>(generate_graded_mesh(build_square_domain(SquareEdge::Right, obs), spec));
}

inline std::shared_ptr<const FemSpace> square_space(double h, ObservationArc obs = ObservationArc::full()) {
  return std::make_shared<const FemSpace>(square_mesh(h, obs));
}

inline std::shared_ptr<const FemSpace> refined_space(double h, int times, ObservationArc obs = ObservationArc::full()) {
  TriMesh m = *square_mesh(h, obs);
  for (int i = 0; i < times; ++i) m = refine_uniform(m);
  return std::make_shared<const FemSpace>(std::make_shared<const TriMesh>(std::move(m)));
}

inline double flux(const Point& p) { return 1.0 - p.x * p.x; }

inline Vector random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace kvrobin::testing
