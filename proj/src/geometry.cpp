#include "kvrobin/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "kvrobin/error.hpp"

namespace kvrobin {

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

std::string_view to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::GammaI:
      return "GAMMA_I";
    case BoundaryLabel::GammaA:
      return "GAMMA_A";
    case BoundaryLabel::GammaAPrime:
      return "GAMMA_A_PRIME";
  }
  return "?";
}

BoundaryLabel parse_boundary_label(std::string_view text) {
  if (text == "GAMMA_I") return BoundaryLabel::GammaI;
  if (text == "GAMMA_A") return BoundaryLabel::GammaA;
  if (text == "GAMMA_A_PRIME") return BoundaryLabel::GammaAPrime;
  throw ValidationError("unknown boundary label '" + std::string(text) + "'");
}

double DomainSpec::perimeter() const {
  double total = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    total += distance(vertices[i], vertices[(i + 1) % vertices.size()]);
  }
  return total;
}

double DomainSpec::area() const {
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    twice += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  }
  return 0.5 * twice;
}

double DomainSpec::diameter() const {
  double d = 0.0;
  for (const auto& a : vertices) {
    for (const auto& b : vertices) d = std::max(d, distance(a, b));
  }
  return d;
}

Point DomainSpec::point_at(double s) const {
  const double total = perimeter();
  if (s < 0.0 || s > total) throw ValidationError("arclength outside [0, perimeter]");
  double acc = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Point a = vertices[i];
    const Point b = vertices[(i + 1) % vertices.size()];
    const double len = distance(a, b);
    if (s <= acc + len || i + 1 == vertices.size()) {
      const double t = std::clamp((s - acc) / len, 0.0, 1.0);
      return a + t * (b - a);
    }
    acc += len;
  }
  return vertices.front();
}

double DomainSpec::arclength_of(Point p, double tol) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Point a = vertices[i];
    const Point b = vertices[(i + 1) % vertices.size()];
    const double len = distance(a, b);
    if (point_segment_distance(p, a, b) <= tol) {
      const double t = std::clamp(dot(p - a, b - a) / (len * len), 0.0, 1.0);
      return acc + t * len;
    }
    acc += len;
  }
  throw ValidationError("point is not on the domain boundary");
}

BoundaryLabel DomainSpec::label_at(double s) const {
  for (const auto& seg : segments) {
    if (s >= seg.start && s < seg.end) return seg.label;
  }
  if (!segments.empty() && s >= segments.back().start) return segments.back().label;
  throw ValidationError("arclength not covered by any boundary segment");
}

double DomainSpec::measure(BoundaryLabel label) const {
  double total = 0.0;
  for (const auto& seg : segments) {
    if (seg.label == label) total += seg.end - seg.start;
  }
  return total;
}

void DomainSpec::validate() const {
  if (vertices.size() < 3) throw ValidationError("domain needs at least 3 vertices");
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Point a = vertices[i];
    const Point b = vertices[(i + 1) % vertices.size()];
    const Point c = vertices[(i + 2) % vertices.size()];
    if (cross(b - a, c - b) <= 0.0) {
      throw ValidationError("domain polygon is not strictly convex and counterclockwise");
    }
  }
  if (segments.empty()) throw ValidationError("domain has no boundary segments");
  const double total = perimeter();
  const double tol = 1e-12 * total;
  if (std::abs(segments.front().start) > tol) throw ValidationError("boundary segments must start at arclength 0");
  if (std::abs(segments.back().end - total) > tol) throw ValidationError("boundary segments must end at the perimeter");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!(segments[i].end > segments[i].start)) throw ValidationError("empty boundary segment");
    if (i > 0 && std::abs(segments[i].start - segments[i - 1].end) > tol) {
      throw ValidationError("boundary segments overlap or leave a gap");
    }
  }
  auto count = [&](BoundaryLabel l) {
    return std::count_if(segments.begin(), segments.end(), [&](const auto& s) { return s.label == l; });
  };
  if (count(BoundaryLabel::GammaI) != 1) throw ValidationError("Γ_i must be one connected segment");
  if (count(BoundaryLabel::GammaAPrime) != 1) throw ValidationError("Γ_a′ must be one connected, non-empty segment");
  for (const auto& sv : singular_vertices) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      dmin = std::min(dmin, point_segment_distance(sv.point, vertices[i], vertices[(i + 1) % vertices.size()]));
    }
    if (dmin > tol) throw ValidationError("singular vertex is not on the boundary");
  }
}

SquareEdge parse_square_edge(std::string_view text) {
  if (text == "right") return SquareEdge::Right;
  if (text == "top") return SquareEdge::Top;
  if (text == "left") return SquareEdge::Left;
  if (text == "bottom") return SquareEdge::Bottom;
  throw ValidationError("unknown square edge '" + std::string(text) + "' (expected right|top|left|bottom)");
}

ObservationArc ObservationArc::edge(SquareEdge gamma_i, SquareEdge edge) {
  const int k = (static_cast<int>(edge) - static_cast<int>(gamma_i) + 4) % 4;
  if (k == 0) throw ValidationError("observation edge coincides with Γ_i");
  return {2.0 * (k - 1), 2.0 * k};
}

DomainSpec build_square_domain(SquareEdge gamma_i, ObservationArc arc) {
  constexpr double kSide = 2.0;
  constexpr double kGammaA = 3 * kSide;
  if (!(arc.start >= 0.0 && arc.end <= kGammaA && arc.end > arc.start)) {
    throw ValidationError("Γ_a′ must be a non-empty connected sub-arc of Γ_a (offsets within [0, 6])");
  }
  // Counterclockwise corners; corner k starts edge k (Right, Top, Left, Bottom).
  static constexpr std::array<Point, 4> kCorners{{{1, -1}, {1, 1}, {-1, 1}, {-1, -1}}};
  DomainSpec d;
  const int first = static_cast<int>(gamma_i);
  for (int k = 0; k < 4; ++k) d.vertices.push_back(kCorners[(first + k) % 4]);

  const double a0 = kSide + arc.start;
  const double a1 = kSide + arc.end;
  d.segments.push_back({0.0, kSide, BoundaryLabel::GammaI});
  if (a0 > kSide) d.segments.push_back({kSide, a0, BoundaryLabel::GammaA});
  d.segments.push_back({a0, a1, BoundaryLabel::GammaAPrime});
  if (a1 < 4 * kSide) d.segments.push_back({a1, 4 * kSide, BoundaryLabel::GammaA});

  auto add_singular = [&](Point p, SingularKind kind) {
    for (const auto& sv : d.singular_vertices) {
      if (distance(sv.point, p) < 1e-14) return;
    }
    d.singular_vertices.push_back({p, kind});
  };
  add_singular(d.point_at(a0), SingularKind::ObservationEndpoint);
  add_singular(d.point_at(std::fmod(a1, 4 * kSide)), SingularKind::ObservationEndpoint);
  add_singular(d.point_at(0.0), SingularKind::RobinCorner);
  add_singular(d.point_at(kSide), SingularKind::RobinCorner);
  d.validate();
  return d;
}

}  // namespace kvrobin
