#include "kvrobin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "kvrobin/error.hpp"

namespace kvrobin {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

constexpr double kOnGridTol = 1e-12;

bool is_axis_aligned_rectangle(const DomainSpec& d) {
  if (d.vertices.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point e = d.vertices[(i + 1) % 4] - d.vertices[i];
    if (std::abs(e.x) > 0.0 && std::abs(e.y) > 0.0) return false;
  }
  return true;
}

// Label every edge with a single adjacent triangle, oriented as in that
// triangle (counterclockwise), then order them along the boundary starting at
// polygon vertex 0.
std::vector<BoundaryEdge> label_boundary(const std::vector<Point>& pts, const std::vector<std::array<int, 3>>& tris,
                                         const DomainSpec& domain) {
  std::unordered_map<std::uint64_t, std::pair<int, std::array<int, 2>>> count;
  for (const auto& t : tris) {
    for (int i = 0; i < 3; ++i) {
      auto& entry = count[edge_key(t[i], t[(i + 1) % 3])];
      entry.first += 1;
      entry.second = {t[i], t[(i + 1) % 3]};
    }
  }
  std::map<int, BoundaryEdge> by_tail;
  for (const auto& [key, entry] : count) {
    if (entry.first != 1) continue;
    const auto [a, b] = entry.second;
    const double s = domain.arclength_of(midpoint(pts[a], pts[b]));
    by_tail[a] = BoundaryEdge{{a, b}, domain.label_at(s)};
  }
  int start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [tail, edge] : by_tail) {
    const double dist = distance(pts[tail], domain.vertices.front());
    if (dist < best) {
      best = dist;
      start = tail;
    }
  }
  std::vector<BoundaryEdge> ordered;
  ordered.reserve(by_tail.size());
  int cur = start;
  for (std::size_t n = 0; n < by_tail.size(); ++n) {
    auto it = by_tail.find(cur);
    if (it == by_tail.end()) throw ValidationError("boundary edges do not form a closed loop");
    ordered.push_back(it->second);
    cur = it->second.v[1];
  }
  return ordered;
}

TriMesh structured_rectangle(const DomainSpec& domain, double h, bool& ok) {
  double xmin = domain.vertices[0].x, xmax = xmin, ymin = domain.vertices[0].y, ymax = ymin;
  for (const auto& p : domain.vertices) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int nx = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / h - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / h - 1e-9)));
  const double dx = (xmax - xmin) / nx;
  const double dy = (ymax - ymin) / ny;

  ok = true;
  for (const auto& seg : domain.segments) {
    const Point p = domain.point_at(seg.start);
    const double fx = (p.x - xmin) / dx;
    const double fy = (p.y - ymin) / dy;
    if (std::abs(fx - std::round(fx)) > kOnGridTol * nx || std::abs(fy - std::round(fy)) > kOnGridTol * ny) ok = false;
  }
  TriMesh mesh;
  if (!ok) return mesh;

  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Pin the outermost nodes exactly onto the rectangle.
      const double x = (i == nx) ? xmax : xmin + i * dx;
      const double y = (j == ny) ? ymax : ymin + j * dy;
      mesh.vertices.push_back({x, y});
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return mesh;
}

// Fan from the centroid through polygon vertices and segment endpoints, then
// red-refined until every element is no larger than h.
TriMesh fan_mesh(const DomainSpec& domain, double h) {
  std::vector<double> marks;
  double acc = 0.0;
  for (std::size_t i = 0; i < domain.vertices.size(); ++i) {
    marks.push_back(acc);
    acc += distance(domain.vertices[i], domain.vertices[(i + 1) % domain.vertices.size()]);
  }
  for (const auto& seg : domain.segments) marks.push_back(seg.start);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              marks.end());

  TriMesh mesh;
  Point c{0, 0};
  for (const auto& p : domain.vertices) c = c + p;
  c = (1.0 / static_cast<double>(domain.vertices.size())) * c;
  mesh.vertices.push_back(c);
  for (double s : marks) mesh.vertices.push_back(domain.point_at(s));
  const int n = static_cast<int>(marks.size());
  for (int k = 0; k < n; ++k) mesh.triangles.push_back({0, 1 + k, 1 + (k + 1) % n});
  mesh.boundary_edges = label_boundary(mesh.vertices, mesh.triangles, domain);
  while (mesh.max_diameter() > h * (1 + 1e-12)) mesh = refine_uniform(mesh);
  return mesh;
}

// Conforming longest-edge bisection (Rivara's LEPP algorithm).
class Bisector {
 public:
  explicit Bisector(TriMesh mesh) : pts_(std::move(mesh.vertices)), tris_(std::move(mesh.triangles)) {
    alive_.assign(tris_.size(), 1);
    for (std::size_t t = 0; t < tris_.size(); ++t) attach(static_cast<int>(t));
    for (const auto& e : mesh.boundary_edges) boundary_[edge_key(e.v[0], e.v[1])] = e.label;
    live_count_ = tris_.size();
  }

  std::size_t size() const { return tris_.size(); }
  std::size_t live_count() const { return live_count_; }
  bool alive(int t) const { return alive_[t] != 0; }
  const std::array<int, 3>& tri(int t) const { return tris_[t]; }
  const std::vector<Point>& points() const { return pts_; }

  // Bisect until triangle t has been split.
  void refine(int t) {
    while (alive_[t]) {
      int cur = t;
      for (;;) {
        const auto [a, b] = longest_edge(cur);
        const int nb = neighbour(cur, a, b);
        if (nb < 0) {
          bisect(a, b);
          break;
        }
        const auto [c, d] = longest_edge(nb);
        if (edge_key(c, d) == edge_key(a, b)) {
          bisect(a, b);
          break;
        }
        cur = nb;
      }
    }
  }

  TriMesh finish(const DomainSpec& domain) && {
    TriMesh out;
    out.vertices = std::move(pts_);
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (alive_[t]) out.triangles.push_back(tris_[t]);
    }
    out.boundary_edges = label_boundary(out.vertices, out.triangles, domain);
    out.rebuild_vertex_labels();
    return out;
  }

 private:
  std::pair<int, int> longest_edge(int t) const {
    const auto& v = tris_[t];
    int best = 0;
    double best_len = -1.0;
    std::uint64_t best_key = 0;
    for (int i = 0; i < 3; ++i) {
      const int a = v[i];
      const int b = v[(i + 1) % 3];
      const double len = distance(pts_[a], pts_[b]);
      const std::uint64_t key = edge_key(a, b);
      const bool longer = len > best_len * (1 + 1e-12);
      const bool tie = !longer && len >= best_len * (1 - 1e-12);
      if (longer || (tie && key < best_key)) {
        best = i;
        best_len = len;
        best_key = key;
      }
    }
    return {v[best], v[(best + 1) % 3]};
  }

  int neighbour(int t, int a, int b) const {
    const auto& slots = edges_.at(edge_key(a, b));
    return slots[0] == t ? slots[1] : slots[0];
  }

  void attach(int t) {
    const auto& v = tris_[t];
    for (int i = 0; i < 3; ++i) {
      auto [it, inserted] = edges_.try_emplace(edge_key(v[i], v[(i + 1) % 3]), std::array<int, 2>{-1, -1});
      auto& slots = it->second;
      if (slots[0] < 0) {
        slots[0] = t;
      } else {
        slots[1] = t;
      }
    }
  }

  void detach(int t) {
    const auto& v = tris_[t];
    for (int i = 0; i < 3; ++i) {
      const auto key = edge_key(v[i], v[(i + 1) % 3]);
      auto& slots = edges_.at(key);
      if (slots[0] == t) {
        slots[0] = slots[1];
      }
      slots[1] = -1;
      if (slots[0] < 0) edges_.erase(key);
    }
  }

  void bisect(int a, int b) {
    const auto key = edge_key(a, b);
    const auto slots = edges_.at(key);
    const int m = static_cast<int>(pts_.size());
    pts_.push_back(midpoint(pts_[a], pts_[b]));
    for (int t : slots) {
      if (t < 0) continue;
      const auto v = tris_[t];
      int i = 0;
      while (edge_key(v[i], v[(i + 1) % 3]) != key) ++i;
      const int p = v[i];
      const int q = v[(i + 1) % 3];
      const int r = v[(i + 2) % 3];
      detach(t);
      alive_[t] = 0;
      tris_.push_back({p, m, r});
      alive_.push_back(1);
      attach(static_cast<int>(tris_.size()) - 1);
      tris_.push_back({m, q, r});
      alive_.push_back(1);
      attach(static_cast<int>(tris_.size()) - 1);
      live_count_ += 1;
    }
    if (auto it = boundary_.find(key); it != boundary_.end()) {
      const BoundaryLabel label = it->second;
      boundary_.erase(it);
      boundary_[edge_key(a, m)] = label;
      boundary_[edge_key(m, b)] = label;
    }
  }

  std::vector<Point> pts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<char> alive_;
  std::unordered_map<std::uint64_t, std::array<int, 2>> edges_;
  std::unordered_map<std::uint64_t, BoundaryLabel> boundary_;
  std::size_t live_count_ = 0;
};

double triangle_signed_area(const Point& a, const Point& b, const Point& c) { return 0.5 * cross(b - a, c - a); }

double sizing_bound(double d, const MeshSpec& spec) {
  const double hs = spec.innermost_size();
  if (d > hs) return spec.sizing_constant * std::pow(d, 1.0 - spec.r) * spec.h;
  return spec.sizing_constant * hs;
}

double tri_diameter(const std::vector<Point>& pts, const std::array<int, 3>& v) {
  return std::max({distance(pts[v[0]], pts[v[1]]), distance(pts[v[1]], pts[v[2]]), distance(pts[v[2]], pts[v[0]])});
}

double tri_point_distance(const std::vector<Point>& pts, const std::array<int, 3>& v, Point p) {
  const Point a = pts[v[0]], b = pts[v[1]], c = pts[v[2]];
  const double d1 = cross(b - a, p - a);
  const double d2 = cross(c - b, p - b);
  const double d3 = cross(a - c, p - c);
  const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
  if (!(has_neg && has_pos)) return 0.0;
  return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c), point_segment_distance(p, c, a)});
}

bool sizing_ok(const std::vector<Point>& pts, const std::array<int, 3>& v, const std::vector<Point>& grading,
               const MeshSpec& spec) {
  if (grading.empty()) return tri_diameter(pts, v) <= spec.sizing_constant * spec.h * (1 + 1e-12);
  double d = std::numeric_limits<double>::infinity();
  for (const auto& g : grading) d = std::min(d, tri_point_distance(pts, v, g));
  return tri_diameter(pts, v) <= sizing_bound(d, spec) * (1 + 1e-12);
}

}  // namespace

double MeshSpec::innermost_size() const { return h_star.value_or(std::pow(h, 1.0 / r)); }

void MeshSpec::validate() const {
  if (!(h > 0.0 && h <= 1.0)) throw ValidationError("mesh size h must lie in (0, 1]");
  if (!(r > 0.0 && r <= 1.0)) throw ValidationError("grading exponent r must lie in (0, 1]");
  if (!(innermost_size() > 0.0 && innermost_size() <= h)) throw ValidationError("h_star must lie in (0, h]");
  if (!(sizing_constant > 0.0)) throw ValidationError("sizing constant must be positive");
}

double TriMesh::triangle_area(std::size_t t) const {
  const auto& v = triangles[t];
  return triangle_signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
}

double TriMesh::triangle_diameter(std::size_t t) const { return tri_diameter(vertices, triangles[t]); }

double TriMesh::max_diameter() const {
  double d = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) d = std::max(d, triangle_diameter(t));
  return d;
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
  return a;
}

void TriMesh::rebuild_vertex_labels() {
  auto rank = [](BoundaryLabel l) {
    switch (l) {
      case BoundaryLabel::GammaAPrime:
        return 3;
      case BoundaryLabel::GammaI:
        return 2;
      case BoundaryLabel::GammaA:
        return 1;
    }
    return 0;
  };
  vertex_labels.assign(vertices.size(), std::nullopt);
  for (const auto& e : boundary_edges) {
    for (int v : e.v) {
      auto& slot = vertex_labels[v];
      if (!slot || rank(e.label) > rank(*slot)) slot = e.label;
    }
  }
}

std::vector<Point> grading_points(const DomainSpec& domain, const MeshSpec& spec) {
  std::vector<Point> out;
  if (spec.r >= 1.0 && !spec.h_star) return out;
  for (const auto& sv : domain.singular_vertices) {
    if (sv.kind == SingularKind::ObservationEndpoint || spec.grade_robin_corners) out.push_back(sv.point);
  }
  return out;
}

double point_triangle_distance(const TriMesh& mesh, std::size_t t, Point p) {
  return tri_point_distance(mesh.vertices, mesh.triangles[t], p);
}

bool satisfies_sizing(const TriMesh& mesh, std::size_t t, const std::vector<Point>& grading, const MeshSpec& spec) {
  return sizing_ok(mesh.vertices, mesh.triangles[t], grading, spec);
}

TriMesh generate_graded_mesh(const DomainSpec& domain, const MeshSpec& spec) {
  domain.validate();
  spec.validate();
  bool structured = false;
  TriMesh base;
  if (is_axis_aligned_rectangle(domain)) base = structured_rectangle(domain, spec.h, structured);
  if (!structured) base = fan_mesh(domain, spec.h);
  base.boundary_edges = label_boundary(base.vertices, base.triangles, domain);

  const auto grading = grading_points(domain, spec);
  Bisector bis(std::move(base));
  for (;;) {
    std::vector<int> violators;
    for (std::size_t t = 0; t < bis.size(); ++t) {
      const int ti = static_cast<int>(t);
      if (bis.alive(ti) && !sizing_ok(bis.points(), bis.tri(ti), grading, spec)) violators.push_back(ti);
    }
    if (violators.empty()) break;
    for (int t : violators) {
      if (bis.alive(t)) bis.refine(t);
      if (bis.live_count() > spec.max_triangles) {
        throw ValidationError("graded mesh would exceed the maximum element count of " +
                              std::to_string(spec.max_triangles));
      }
    }
  }
  return std::move(bis).finish(domain);
}

TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh out;
  out.vertices = mesh.vertices;
  std::unordered_map<std::uint64_t, int> mid;
  auto midpoint_of = [&](int a, int b) {
    auto [it, inserted] = mid.try_emplace(edge_key(a, b), static_cast<int>(out.vertices.size()));
    if (inserted) out.vertices.push_back(midpoint(mesh.vertices[a], mesh.vertices[b]));
    return it->second;
  };
  out.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const int m01 = midpoint_of(t[0], t[1]);
    const int m12 = midpoint_of(t[1], t[2]);
    const int m20 = midpoint_of(t[2], t[0]);
    out.triangles.push_back({t[0], m01, m20});
    out.triangles.push_back({m01, t[1], m12});
    out.triangles.push_back({m20, m12, t[2]});
    out.triangles.push_back({m01, m12, m20});
  }
  out.boundary_edges.reserve(2 * mesh.boundary_edges.size());
  for (const auto& e : mesh.boundary_edges) {
    const int m = midpoint_of(e.v[0], e.v[1]);
    out.boundary_edges.push_back({{e.v[0], m}, e.label});
    out.boundary_edges.push_back({{m, e.v[1]}, e.label});
  }
  out.rebuild_vertex_labels();
  return out;
}

std::vector<std::string> validate_mesh(const TriMesh& mesh, const DomainSpec& domain, const MeshSpec& spec) {
  std::vector<std::string> issues;
  auto report = [&](std::string msg) { issues.push_back(std::move(msg)); };

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size()) {
        report("triangle " + std::to_string(t) + " references a missing vertex");
        return issues;
      }
    }
    if (!(mesh.triangle_area(t) > 0.0)) report("triangle " + std::to_string(t) + " is not positively oriented");
  }

  std::unordered_map<std::uint64_t, int> use;
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) use[edge_key(t[i], t[(i + 1) % 3])] += 1;
  }
  std::unordered_map<std::uint64_t, BoundaryLabel> labelled;
  for (const auto& e : mesh.boundary_edges) labelled[edge_key(e.v[0], e.v[1])] = e.label;
  double boundary_length = 0.0;
  for (const auto& [key, n] : use) {
    if (n > 2) report("edge shared by " + std::to_string(n) + " triangles");
    if (n == 1 && !labelled.contains(key)) {
      report("boundary edge (" + std::to_string(key >> 32) + "," + std::to_string(key & 0xffffffffu) +
             ") is unlabelled");
    }
  }
  for (const auto& e : mesh.boundary_edges) {
    const auto key = edge_key(e.v[0], e.v[1]);
    const auto it = use.find(key);
    if (it == use.end() || it->second != 1) {
      report("labelled edge (" + std::to_string(e.v[0]) + "," + std::to_string(e.v[1]) + ") is not a boundary edge");
      continue;
    }
    const Point a = mesh.vertices[e.v[0]];
    const Point b = mesh.vertices[e.v[1]];
    boundary_length += distance(a, b);
    try {
      const double s = domain.arclength_of(midpoint(a, b), 1e-9);
      domain.arclength_of(a, 1e-9);
      domain.arclength_of(b, 1e-9);
      if (domain.label_at(s) != e.label) {
        report("boundary edge (" + std::to_string(e.v[0]) + "," + std::to_string(e.v[1]) + ") labelled " +
               std::string(to_string(e.label)) + " but lies on " + std::string(to_string(domain.label_at(s))));
      }
    } catch (const ValidationError&) {
      report("boundary edge (" + std::to_string(e.v[0]) + "," + std::to_string(e.v[1]) + ") leaves the polygon boundary");
    }
  }
  if (std::abs(boundary_length - domain.perimeter()) > 1e-10 * domain.perimeter()) {
    report("boundary edges do not reproduce the polygon boundary");
  }
  if (std::abs(mesh.total_area() - domain.area()) > 1e-12 * domain.area()) {
    report("triangle areas do not sum to the polygon area");
  }
  const auto grading = grading_points(domain, spec);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!satisfies_sizing(mesh, t, grading, spec)) report("triangle " + std::to_string(t) + " violates the sizing rule");
  }
  return issues;
}

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << "trimesh v1\n" << std::setprecision(17);
  out << mesh.vertices.size() << '\n';
  for (const auto& p : mesh.vertices) out << p.x << ' ' << p.y << '\n';
  out << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges) out << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.label) << '\n';
}

TriMesh read_mesh(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "trimesh v1") throw ValidationError("mesh file must start with 'trimesh v1'");
  TriMesh mesh;
  std::size_t n = 0;
  auto fail = [](const char* what) { throw ValidationError(std::string("malformed mesh file: ") + what); };
  if (!(in >> n)) fail("vertex count");
  mesh.vertices.resize(n);
  for (auto& p : mesh.vertices) {
    if (!(in >> p.x >> p.y)) fail("vertex");
  }
  if (!(in >> n)) fail("triangle count");
  mesh.triangles.resize(n);
  for (auto& t : mesh.triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) fail("triangle");
  }
  if (!(in >> n)) fail("boundary edge count");
  mesh.boundary_edges.resize(n);
  for (auto& e : mesh.boundary_edges) {
    std::string label;
    if (!(in >> e.v[0] >> e.v[1] >> label)) fail("boundary edge");
    e.label = parse_boundary_label(label);
  }
  mesh.rebuild_vertex_labels();
  return mesh;
}

}  // namespace kvrobin
