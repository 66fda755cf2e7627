#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "kvrobin/data.hpp"
#include "kvrobin/experiment.hpp"
#include "kvrobin/objective.hpp"

using namespace kvrobin;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double flux(const Point& p) { return 1.0 - p.x * p.x; }
double source(const Point& p) { return 0.25 * std::cos(M_PI * p.x) * std::cos(M_PI * p.y); }

std::shared_ptr<const FemSpace> space_for(double h, int refinements = 0, ObservationArc obs = ObservationArc::full()) {
  MeshSpec spec;
  spec.h = h;
  TriMesh m = generate_graded_mesh(build_square_domain(SquareEdge::Right, obs), spec);
  for (int i = 0; i < refinements; ++i) m = refine_uniform(m);
  return std::make_shared<const FemSpace>(std::make_shared<const TriMesh>(std::move(m)));
}

const RobinCoefficient kQDag(2.0, {0.7, 1.3}, {1.0, 2.0, 1.0});
const TimeGrid kGrid{10.0, 50};

std::unique_ptr<KohnVogelius> functional(const std::shared_ptr<const FemSpace>& space, Model mode, double alpha,
                                         const BoundaryTrace& z, const Vector& u0) {
  FunctionalConfig fc;
  fc.alpha = alpha;
  fc.mode = mode;
  if (mode == Model::Elliptic) return std::make_unique<KohnVogelius>(space, flux, z, fc);
  return std::make_unique<KohnVogelius>(space, flux, z, fc, kGrid, u0);
}

Outcome adjoint_exactness() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> val(0.5, 3.0), pos(0.15, 1.85);
  double worst_piece = 0.0, worst_break = 0.0;
  const double eps = 1e-5;
  for (Model mode : {Model::Elliptic, Model::Parabolic}) {
    for (double h : {0.25, 0.125}) {
      const auto space = space_for(h, 0, ObservationArc{1.0, 5.0});
      Vector u0;
      if (mode == Model::Parabolic) u0 = build_initial_data(*space, kQDag, source, flux);
      DataModel dm{mode, kGrid, source};
      const auto f = generate_exact_data(space->mesh(), kQDag, flux, dm, 2);
      const auto z = transfer_to_coarse(add_noise(f, NoiseSpec{0.01, 7}), *space);
      const auto J = functional(space, mode, mode == Model::Elliptic ? 1.6e-4 : 1.6e-5, z, u0);
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> b{pos(rng), pos(rng)};
        std::sort(b.begin(), b.end());
        if (b[1] - b[0] < 0.2) b[1] = std::min(1.9, b[0] + 0.2);
        const RobinCoefficient q(2.0, b, {val(rng), val(rng), val(rng)});
        const auto e = J->evaluate(q, true);
        double gmax = 0.0, bmax = 0.0;
        for (double g : e.piece_gradients) gmax = std::max(gmax, std::abs(g));
        for (double g : e.breakpoint_gradients) bmax = std::max(bmax, std::abs(g));
        for (std::size_t j = 0; j < q.piece_count(); ++j) {
          auto up = q.values(), dn = q.values();
          up[j] += eps;
          dn[j] -= eps;
          const double fd = (J->evaluate(q.with_values(up), false).total - J->evaluate(q.with_values(dn), false).total) / (2 * eps);
          worst_piece = std::max(worst_piece, std::abs(fd - e.piece_gradients[j]) / std::max(std::abs(fd), 1e-3 * gmax));
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
          auto up = b, dn = b;
          up[j] += eps;
          dn[j] -= eps;
          const double fd =
              (J->evaluate(q.with_breakpoints(up), false).total - J->evaluate(q.with_breakpoints(dn), false).total) / (2 * eps);
          worst_break = std::max(worst_break, std::abs(fd - e.breakpoint_gradients[j]) / std::max(std::abs(fd), 1e-3 * bmax));
        }
      }
    }
  }
  return {worst_piece <= 1e-5 && worst_break <= 1e-4,
          "max rel err pieces " + num(worst_piece) + " (<= 1e-5), breakpoints " + num(worst_break) + " (<= 1e-4)"};
}

ScalarField normal_flux(VectorField grad) {
  return [grad](const Point& p) {
    const Point g = grad(p);
    if (std::abs(p.x - 1.0) < 1e-12) return g.x;
    if (std::abs(p.x + 1.0) < 1e-12) return -g.x;
    if (std::abs(p.y - 1.0) < 1e-12) return g.y;
    return -g.y;
  };
}

Outcome forward_convergence() {
  const RobinCoefficient q(2.0, {1.2}, {1.0, 2.0});
  const ScalarField u = [](const Point& p) { return p.x * p.x - p.y * p.y; };
  const VectorField du = [](const Point& p) { return Point{2.0 * p.x, -2.0 * p.y}; };
  const ScalarField dn = normal_flux(du);
  EllipticProblemData d;
  d.g = dn;
  d.extra_robin_data = [q, dn, u](const Point& p) { return dn(p) + q.evaluate(p.y + 1.0) * u(p); };
  std::vector<double> e0, e1;
  for (int level = 0; level <= 4; ++level) {
    const auto s = space_for(0.5, level);
    const Vector uh = solve_neumann_robin(*s, q, d);
    e0.push_back(l2_error(*s, uh, u));
    e1.push_back(h1_seminorm_error(*s, uh, du));
  }
  double min_l2 = 1e300, min_h1 = 1e300;
  for (std::size_t k = 1; k < e0.size(); ++k) {
    min_l2 = std::min(min_l2, std::log2(e0[k - 1] / e0[k]));
    min_h1 = std::min(min_h1, std::log2(e1[k - 1] / e1[k]));
  }

  const auto space = space_for(0.25);
  const Vector u0 = build_initial_data(*space, kQDag, source, flux);
  const SparseMatrix M = assemble_domain_mass(*space);
  const int m0 = 4;
  const Vector ref = step_backward_euler(*space, kQDag, flux, u0, TimeGrid{1.0, 64 * m0}, false).final_state;
  std::vector<double> et;
  for (int m : {m0, 2 * m0, 4 * m0}) {
    et.push_back(l2_norm(M, step_backward_euler(*space, kQDag, flux, u0, TimeGrid{1.0, m}, false).final_state - ref));
  }
  double min_tau = 1e300;
  for (std::size_t k = 1; k < et.size(); ++k) min_tau = std::min(min_tau, std::log2(et[k - 1] / et[k]));
  return {min_l2 >= 1.8 && min_h1 >= 0.9 && min_tau >= 0.9,
          "min rates L2 " + num(min_l2) + " (>= 1.8), H1 " + num(min_h1) + " (>= 0.9), tau " + num(min_tau) + " (>= 0.9)"};
}

Outcome steady_state_decay() {
  const auto space = space_for(0.25);
  const RobinCoefficient q(2.0, {1.0}, {1.0, 2.0});
  EllipticProblemData d;
  d.g = flux;
  const Vector ubar = solve_neumann_robin(*space, q, d);
  const SparseMatrix M = assemble_domain_mass(*space);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector u0(space->dof_count());
  for (int i = 0; i < u0.size(); ++i) u0[i] = uni(rng);
  std::vector<double> dist;
  for (double T : {2.0, 4.0, 8.0, 16.0}) {
    const auto sol = step_backward_euler(*space, q, flux, u0, TimeGrid{T, static_cast<int>(10 * T)}, false);
    dist.push_back(l2_norm(M, sol.final_state - ubar));
  }
  double worst = 0.0;
  for (std::size_t k = 1; k < dist.size(); ++k) worst = std::max(worst, dist[k] / dist[k - 1]);
  std::string detail = "distances";
  for (double v : dist) detail += " " + num(v);
  return {worst < 0.9, detail + "; max ratio " + num(worst) + " (< 0.9)"};
}

Outcome consistency() {
  double worst_J = 0.0, worst_g = 0.0;
  for (Model mode : {Model::Elliptic, Model::Parabolic}) {
    const auto space = space_for(0.25, 0, ObservationArc{1.0, 5.0});
    Vector u0, u;
    EllipticProblemData d;
    d.g = flux;
    if (mode == Model::Elliptic) {
      u = solve_neumann_robin(*space, kQDag, d);
    } else {
      u0 = build_initial_data(*space, kQDag, source, flux);
      u = step_backward_euler(*space, kQDag, flux, u0, kGrid, false).final_state;
    }
    const auto z = trace_on_segment(*space, u, BoundaryLabel::GammaAPrime);
    const auto J = functional(space, mode, 1e-3, z, u0);
    const auto e = J->evaluate(kQDag, true);
    const double scale = e.u_N.dot(FemSystem(*space, kQDag).robin_operator * e.u_N);
    worst_J = std::max(worst_J, e.total / scale);
    for (double g : e.piece_gradients) worst_g = std::max(worst_g, std::abs(g) / scale);
    for (double g : e.breakpoint_gradients) worst_g = std::max(worst_g, std::abs(g) / scale);
  }
  return {worst_J <= 1e-12 && worst_g <= 1e-9,
          "J/scale " + num(worst_J) + " (<= 1e-12), |grad|/scale " + num(worst_g) + " (<= 1e-9)"};
}

Outcome noise_pipeline() {
  const RobinCoefficient q(2.0, {1.2}, {1.0, 2.0});
  const auto space = space_for(0.25, 0, ObservationArc{1.0, 5.0});
  const auto f = generate_exact_data(space->mesh(), q, flux, DataModel{}, 2);
  const auto pf = transfer_to_coarse(f, *space);
  std::vector<double> x, y;
  double orth = 0.0;
  const auto& arc = space->arc(BoundaryLabel::GammaAPrime);
  for (double delta : {1e-3, 1e-2, 1e-1}) {
    const auto z = add_noise(f, NoiseSpec{delta, 3});
    const auto pz = transfer_to_coarse(z, *space);
    x.push_back(std::log(delta));
    y.push_back(std::log(trace_l2_distance(pz, pf)));
    for (std::size_t k = 0; k < arc.s.size(); ++k) {
      BoundaryTrace hat;
      if (k > 0) {
        hat.s.push_back(arc.s[k - 1]);
        hat.values.push_back(0.0);
      }
      hat.s.push_back(arc.s[k]);
      hat.values.push_back(1.0);
      if (k + 1 < arc.s.size()) {
        hat.s.push_back(arc.s[k + 1]);
        hat.values.push_back(0.0);
      }
      orth = std::max(orth, std::abs(arc_inner_product(hat, pz) - arc_inner_product(hat, z)));
    }
  }
  const double mx = (x[0] + x[1] + x[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {std::abs(slope - 1.0) <= 0.1 && orth <= 1e-10,
          "log-log slope " + num(slope) + " (1 +- 0.1), orthogonality residual " + num(orth) + " (<= 1e-10)"};
}

Outcome rate_oracle() {
  const auto fit = estimate_rate({{1e-2, 8.70e-3}, {5e-3, 4.28e-3}, {2e-3, 1.51e-3}, {1e-3, 8.34e-4}, {5e-4, 4.00e-4}});
  return {std::abs(fit.slope - 1.03) <= 0.03, "slope " + num(fit.slope) + " (1.03 +- 0.03)"};
}

struct SweepCheck {
  std::string config;
  double max_median;
  double rate_lo, rate_hi;
};

Outcome sweep(const std::filesystem::path& configs, const SweepCheck& check, int threads,
              const std::optional<std::filesystem::path>& out) {
  const auto config = ExperimentConfig::load(configs / (check.config + ".cfg"));
  std::optional<std::filesystem::path> dir;
  if (out) dir = *out / check.config;
  const auto report = run_sweep(config, threads, dir);
  std::size_t failed = 0;
  for (const auto& r : report.rows) failed += r.error.empty() ? 0 : 1;
  double at_first = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [d, e] : report.medians) {
    if (std::abs(d - 1e-2) < 1e-12) at_first = e;
  }
  std::string detail = check.config + ": median e_q at 1e-2 " + num(at_first) + " (<= " + num(check.max_median) + ")";
  if (!report.rate) return {false, detail + ", rate unavailable"};
  detail += ", rate " + num(report.rate->slope) + " +- " + num(report.rate->half_width) + " (in [" +
            num(check.rate_lo) + ", " + num(check.rate_hi) + "])";
  if (failed) detail += ", " + std::to_string(failed) + " failed runs";
  const bool ok = failed == 0 && at_first <= check.max_median && report.rate->slope >= check.rate_lo &&
                  report.rate->slope <= check.rate_hi;
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for kvrobin"};
  bool quick = false;
  std::vector<int> only;
  int threads = 1;
  std::string configs = KVROBIN_SOURCE_DIR "/configs";
  std::string out;
  app.add_flag("--quick", quick, "Skip the sweep reproductions (criteria 4-6)");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 9));
  app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--configs", configs, "Directory holding the experiment configs");
  app.add_option("--out", out, "Write sweep artefacts here");
  CLI11_PARSE(app, argc, argv);

  const std::optional<std::filesystem::path> out_dir = out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, adjoint_exactness},
      {2, forward_convergence},
      {3, steady_state_decay},
      {4, [&] { return sweep(configs, {"ex4_1_i", 3e-2, 0.7, 1.3}, threads, out_dir); }},
      {5, [&] { return sweep(configs, {"ex4_2_i", 3e-2, 0.65, 1.35}, threads, out_dir); }},
      {6, [&] { return sweep(configs, {"ex4_3_i", 0.15, 0.25, 0.75}, threads, out_dir); }},
      {7, consistency},
      {8, noise_pipeline},
      {9, rate_oracle},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.contains(id)) continue;
    if (selected.empty() && quick && id >= 4 && id <= 6) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  [" << num(secs)
              << " s]" << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
