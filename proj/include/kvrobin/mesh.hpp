#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kvrobin/geometry.hpp"

namespace kvrobin {

/// Sizing parameters for a graded mesh. An element T at distance d_T from the
/// nearest grading vertex must satisfy
///   diam(T) <= C * d_T^(1-r) * h   if d_T > h_star,
///   diam(T) <= C * h_star          otherwise.
struct MeshSpec {
  double h = 0.25;
  double r = 1.0;
  std::optional<double> h_star;  // defaults to h^(1/r)
  double sizing_constant = 4.0;
  bool grade_robin_corners = false;  // also grade at Γ_i/Γ_a junctions
  std::size_t max_triangles = 4'000'000;

  double innermost_size() const;
  void validate() const;
};

struct BoundaryEdge {
  std::array<int, 2> v{};  // counterclockwise along ∂Ω
  BoundaryLabel label = BoundaryLabel::GammaA;

  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// Conforming triangulation with positively oriented triangles and labelled
/// boundary edges. Immutable once built.
struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  /// Boundary label per vertex; at junctions GammaAPrime wins over GammaI,
  /// which wins over GammaA.
  std::vector<std::optional<BoundaryLabel>> vertex_labels;

  double triangle_area(std::size_t t) const;
  double triangle_diameter(std::size_t t) const;
  double max_diameter() const;
  double total_area() const;
  void rebuild_vertex_labels();

  friend bool operator==(const TriMesh&, const TriMesh&) = default;
};

/// Points toward which a mesh is graded for this spec.
std::vector<Point> grading_points(const DomainSpec& domain, const MeshSpec& spec);

/// Distance from p to the closed triangle t.
double point_triangle_distance(const TriMesh& mesh, std::size_t t, Point p);

/// True when triangle t satisfies the sizing rule.
bool satisfies_sizing(const TriMesh& mesh, std::size_t t, const std::vector<Point>& grading, const MeshSpec& spec);

/// Uniform structured mesh of size h, then longest-edge (Rivara) bisection of
/// every element violating the sizing rule until none does.
TriMesh generate_graded_mesh(const DomainSpec& domain, const MeshSpec& spec);

/// Red refinement: every triangle split into four congruent children.
TriMesh refine_uniform(const TriMesh& mesh);

/// Human-readable list of violated mesh invariants; empty when valid.
std::vector<std::string> validate_mesh(const TriMesh& mesh, const DomainSpec& domain, const MeshSpec& spec);

void write_mesh(std::ostream& out, const TriMesh& mesh);
TriMesh read_mesh(std::istream& in);

}  // namespace kvrobin
