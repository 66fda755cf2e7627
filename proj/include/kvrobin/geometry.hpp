#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kvrobin {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Distance from p to the closed segment [a, b].
double point_segment_distance(Point p, Point a, Point b);

/// Boundary part a mesh edge belongs to. Γ_a is the union of GammaA and
/// GammaAPrime; GammaAPrime is the observation arc where Dirichlet data live.
enum class BoundaryLabel : std::uint8_t { GammaI, GammaA, GammaAPrime };

std::string_view to_string(BoundaryLabel label);
BoundaryLabel parse_boundary_label(std::string_view text);

/// Half-open arclength interval [start, end) of the boundary with one label.
struct BoundarySegment {
  double start = 0.0;
  double end = 0.0;
  BoundaryLabel label = BoundaryLabel::GammaA;
};

enum class SingularKind : std::uint8_t {
  ObservationEndpoint,  // endpoint of Γ_a′ (Dirichlet/Neumann switch)
  RobinCorner,          // Γ_i/Γ_a junction
};

struct SingularVertex {
  Point point;
  SingularKind kind = SingularKind::ObservationEndpoint;
};

/// Convex polygon with a labelled boundary. Arclength starts at vertex 0 and
/// runs counterclockwise.
struct DomainSpec {
  std::vector<Point> vertices;
  std::vector<BoundarySegment> segments;
  std::vector<SingularVertex> singular_vertices;

  double perimeter() const;
  double area() const;
  double diameter() const;
  Point point_at(double arclength) const;
  /// Arclength of a point on the boundary; throws if the point is farther
  /// than `tol` from every polygon edge.
  double arclength_of(Point p, double tol = 1e-10) const;
  /// Label of the segment containing arclength s (half-open convention).
  BoundaryLabel label_at(double arclength) const;
  /// Total arclength carrying a label.
  double measure(BoundaryLabel label) const;
  /// Throws ValidationError when any DomainSpec invariant fails.
  void validate() const;
};

enum class SquareEdge : std::uint8_t { Right, Top, Left, Bottom };

SquareEdge parse_square_edge(std::string_view text);

/// Observation arc Γ_a′ given as offsets [start, end] along Γ_a, measured from
/// the counterclockwise end of Γ_i.
struct ObservationArc {
  double start = 0.0;
  double end = 6.0;

  static ObservationArc full() { return {0.0, 6.0}; }
  /// The whole square edge `edge`, which must differ from `gamma_i`.
  static ObservationArc edge(SquareEdge gamma_i, SquareEdge edge);
};

/// The square (-1,1)^2 with Γ_i on `gamma_i` and Γ_a the other three edges.
/// Vertex 0 is the start of Γ_i, so Γ_i occupies arclength [0, 2].
DomainSpec build_square_domain(SquareEdge gamma_i, ObservationArc gamma_a_prime = ObservationArc::full());

}  // namespace kvrobin
