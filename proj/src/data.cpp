#include "kvrobin/data.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "kvrobin/error.hpp"

namespace kvrobin {

void NoiseSpec::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("noise level delta must be non-negative");
}

GaussianStream::GaussianStream(std::uint64_t seed) : engine_(seed) {}

double GaussianStream::next_uniform() {
  // (0, 1) from the top 53 bits.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform(), u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

BoundaryTrace generate_exact_data(const TriMesh& inversion_mesh, const RobinCoefficient& q_dag, const ScalarField& g,
                                  const DataModel& model, int refinement_depth) {
  if (refinement_depth < 2) throw ValidationError("data mesh must be at least two refinements finer (inverse crime)");
  auto fine = std::make_shared<TriMesh>(inversion_mesh);
  for (int k = 0; k < refinement_depth; ++k) *fine = refine_uniform(*fine);
  const FemSpace space(fine);
  EllipticProblemData data;
  data.g = g;
  if (model.kind == Model::Elliptic) {
    return trace_on_segment(space, solve_neumann_robin(space, q_dag, data), BoundaryLabel::GammaAPrime);
  }
  const TimeGrid grid{model.grid.T, model.grid.M << refinement_depth};
  const Vector u0 = build_initial_data(space, q_dag, model.u0_source, g);
  const auto sol = step_backward_euler(space, q_dag, g, u0, grid, false);
  return trace_on_segment(space, sol.final_state, BoundaryLabel::GammaAPrime);
}

BoundaryTrace add_noise(const BoundaryTrace& f, const NoiseSpec& spec) {
  spec.validate();
  BoundaryTrace z = f;
  if (spec.delta == 0.0) return z;
  const double scale = spec.delta * f.max_abs();
  GaussianStream xi(spec.seed);
  for (double& v : z.values) v += scale * xi.next();
  return z;
}

BoundaryTrace transfer_to_coarse(const BoundaryTrace& z_delta, const FemSpace& space) {
  const auto& arc = space.arc(BoundaryLabel::GammaAPrime);
  const double tol = 1e-9 * arc.length();
  for (double s : arc.s) {
    const auto it = std::lower_bound(z_delta.s.begin(), z_delta.s.end(), s - tol);
    if (it == z_delta.s.end() || std::abs(*it - s) > tol) {
      throw ValidationError("fine boundary grid does not refine the coarse Γ_a′ grid");
    }
  }
  return boundary_l2_projection(space, BoundaryLabel::GammaAPrime, z_delta);
}

double trace_l2_distance(const BoundaryTrace& a, const BoundaryTrace& b) {
  BoundaryTrace diff;
  diff.s = a.s;
  diff.s.insert(diff.s.end(), b.s.begin(), b.s.end());
  std::sort(diff.s.begin(), diff.s.end());
  diff.s.erase(std::unique(diff.s.begin(), diff.s.end()), diff.s.end());
  for (double s : diff.s) diff.values.push_back(a.evaluate(s) - b.evaluate(s));
  return std::sqrt(arc_inner_product(diff, diff));
}

namespace {

void write_trace(std::ostream& out, const char* name, const BoundaryTrace& t) {
  out << name << ' ' << t.s.size() << '\n';
  for (std::size_t k = 0; k < t.s.size(); ++k) out << t.s[k] << ' ' << t.values[k] << '\n';
}

BoundaryTrace read_trace(std::istream& in, const char* name) {
  std::string word;
  std::size_t n = 0;
  if (!(in >> word >> n) || word != name) throw ValidationError(std::string("obsdata: expected '") + name + "'");
  BoundaryTrace t;
  t.s.resize(n);
  t.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) in >> t.s[k] >> t.values[k];
  if (!in) throw ValidationError("obsdata: truncated trace");
  return t;
}

}  // namespace

void write_obsdata(std::ostream& out, const ObservedData& data) {
  out << "obsdata v1\n" << std::setprecision(17);
  out << "provenance model=" << data.model << " depth=" << data.depth << " seed=" << data.seed
      << " delta=" << data.delta << '\n';
  write_trace(out, "f", data.fine);
  write_trace(out, "z_h", data.coarse);
}

ObservedData read_obsdata(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line != "obsdata v1") throw ValidationError("data file must start with 'obsdata v1'");
  std::getline(in, line);
  std::istringstream prov(line);
  std::string word;
  prov >> word;
  if (word != "provenance") throw ValidationError("obsdata: missing provenance line");
  ObservedData data;
  while (prov >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw ValidationError("obsdata: malformed provenance entry '" + word + "'");
    const std::string key = word.substr(0, eq), value = word.substr(eq + 1);
    if (key == "model") {
      data.model = value;
    } else if (key == "depth") {
      data.depth = std::stoi(value);
    } else if (key == "seed") {
      data.seed = std::stoull(value);
    } else if (key == "delta") {
      data.delta = std::stod(value);
    }
  }
  data.fine = read_trace(in, "f");
  data.coarse = read_trace(in, "z_h");
  return data;
}

}  // namespace kvrobin
