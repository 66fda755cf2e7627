#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "kvrobin/error.hpp"
#include "kvrobin/experiment.hpp"
#include "kvrobin/svg.hpp"

using namespace kvrobin;
namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

double pick_delta(const ExperimentConfig& c, std::optional<double> delta) { return delta ? *delta : c.deltas.front(); }

std::uint64_t pick_seed(const ExperimentConfig& c, std::optional<std::uint64_t> seed) {
  return seed ? *seed : c.seeds.front();
}

void print_row(const SweepRow& r) {
  std::cout << std::setprecision(6) << "delta=" << r.delta << " h=" << r.h << " tau=" << r.tau << " alpha=" << r.alpha
            << " seed=" << r.seed << " e_q=" << r.e_q << " J=" << r.J << " iters=" << r.iters
            << " seconds=" << r.seconds << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robin coefficient reconstruction from Cauchy data (Kohn-Vogelius, P1 FEM)"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;

  auto* mesh_cmd = app.add_subcommand("mesh", "Generate the inversion mesh for one noise level");
  mesh_cmd->add_option("--config", config_path, "Experiment config")->required();
  mesh_cmd->add_option("--delta", delta, "Noise level (default: first in config)");
  mesh_cmd->add_option("--out", out, "Output trimesh file (default: stdout)");

  auto* fwd_cmd = app.add_subcommand("forward", "Generate exact and noisy observation data");
  fwd_cmd->add_option("--config", config_path, "Experiment config")->required();
  fwd_cmd->add_option("--delta", delta, "Noise level (default: first in config)");
  fwd_cmd->add_option("--seed", seed, "Noise seed (default: first in config)");
  fwd_cmd->add_option("--out", out, "Output obsdata file (default: stdout)");

  auto* inv_cmd = app.add_subcommand("invert", "Run one reconstruction");
  inv_cmd->add_option("--config", config_path, "Experiment config")->required();
  inv_cmd->add_option("--delta", delta, "Noise level (default: first in config)");
  inv_cmd->add_option("--seed", seed, "Noise seed (default: first in config)");
  inv_cmd->add_option("--out", out, "Output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run every (delta, seed) cell and fit the rate");
  sweep_cmd->add_option("--config", config_path, "Experiment config")->required();
  sweep_cmd->add_option("--out", out, "Output directory");
  sweep_cmd->add_option("--threads", threads, "Concurrent cells")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", seed, "Run only this seed");

  std::string csv_path;
  auto* rate_cmd = app.add_subcommand("rate", "Fit log e_q against log delta");
  rate_cmd->add_option("--csv", csv_path, "Sweep CSV, or a file of 'delta error' pairs")->required();

  std::string history_path, recon_path, sweep_path;
  bool error_panel = false;
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG charts from CSV outputs");
  plot_cmd->add_option("--history", history_path, "History CSV");
  plot_cmd->add_flag("--error", error_panel, "Plot e_q instead of J for --history");
  plot_cmd->add_option("--reconstruction", recon_path, "Reconstruction CSV");
  plot_cmd->add_option("--sweep", sweep_path, "Sweep CSV");
  plot_cmd->add_option("--out", out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*mesh_cmd) {
      const auto config = ExperimentConfig::load(config_path);
      const auto disc = discretise(config, pick_delta(config, delta));
      const auto domain = build_square_domain(config.gamma_i, config.observation);
      MeshSpec spec;
      spec.h = disc.h;
      spec.r = config.mesh_r;
      spec.validate();
      const auto mesh = generate_graded_mesh(domain, spec);
      for (const auto& issue : validate_mesh(mesh, domain, spec)) std::cerr << "mesh issue: " << issue << '\n';
      std::ostringstream text;
      write_mesh(text, mesh);
      if (out.empty()) {
        std::cout << text.str();
      } else {
        write_file_atomic(out, text.str());
      }
      std::cerr << "h=" << disc.h << " vertices=" << mesh.vertices.size() << " triangles=" << mesh.triangles.size()
                << '\n';
    } else if (*fwd_cmd) {
      const auto config = ExperimentConfig::load(config_path);
      const auto problem = prepare_problem(config, pick_delta(config, delta));
      ObservedData data;
      data.model = config.model == Model::Elliptic ? "elliptic" : "parabolic";
      data.depth = config.data_depth;
      data.seed = pick_seed(config, seed);
      data.delta = problem.disc.delta;
      data.fine = problem.exact_fine;
      data.coarse = transfer_to_coarse(add_noise(data.fine, NoiseSpec{data.delta, data.seed}), *problem.space);
      // obsdata carries its own header line, so the provenance goes to stderr
      std::ostringstream body;
      write_obsdata(body, data);
      if (out.empty()) {
        std::cout << body.str();
      } else {
        write_file_atomic(out, body.str());
      }
      std::cerr << provenance_line(config, data.seed, data.delta) << '\n';
    } else if (*inv_cmd) {
      const auto config = ExperimentConfig::load(config_path);
      std::optional<fs::path> dir;
      if (!out.empty()) dir = fs::path(out);
      const auto run = run_single(config, pick_delta(config, delta), pick_seed(config, seed), dir);
      print_row(run.row);
      std::cout << "termination=" << to_string(run.result.reason) << '\n';
      write_coefficient(std::cout, run.result.q_star);
    } else if (*sweep_cmd) {
      auto config = ExperimentConfig::load(config_path);
      if (seed) config.seeds = {*seed};
      std::optional<fs::path> dir;
      if (!out.empty()) dir = fs::path(out);
      const auto report = run_sweep(config, threads, dir);
      for (const auto& r : report.rows) {
        print_row(r);
        if (!r.error.empty()) std::cerr << "cell failed: " << r.error << '\n';
      }
      for (const auto& [d, e] : report.medians) std::cout << "median delta=" << d << " e_q=" << e << '\n';
      if (report.rate) std::cout << "rate " << report.rate->slope << " +- " << report.rate->half_width << '\n';
    } else if (*rate_cmd) {
      auto in = open_input(csv_path);
      std::string first;
      while (std::getline(in, first) && (first.empty() || first[0] == '#')) {
      }
      in.clear();
      in.seekg(0);
      std::vector<std::pair<double, double>> pairs;
      if (first.rfind("delta,", 0) == 0) {
        pairs = median_by_delta(read_sweep_csv(in));
      } else {
        std::string line;
        while (std::getline(in, line)) {
          if (line.empty() || line[0] == '#') continue;
          std::istringstream s(line);
          std::string a, b;
          if (!(s >> a >> b)) throw ValidationError("expected 'delta error' on each line");
          pairs.emplace_back(parse_number(a), parse_number(b));
        }
      }
      const auto fit = estimate_rate(pairs);
      std::cout << std::setprecision(6) << "rate " << fit.slope << " +- " << fit.half_width << " (n=" << fit.points
                << ")\n";
    } else if (*plot_cmd) {
      const int given = !history_path.empty() + !recon_path.empty() + !sweep_path.empty();
      if (given != 1) throw ValidationError("plot needs exactly one of --history, --reconstruction, --sweep");
      std::string svg;
      if (!history_path.empty()) {
        auto in = open_input(history_path);
        svg = history_svg(read_history_csv(in), error_panel);
      } else if (!sweep_path.empty()) {
        auto in = open_input(sweep_path);
        const auto medians = median_by_delta(read_sweep_csv(in));
        std::optional<RateFit> fit;
        if (medians.size() >= 3) fit = estimate_rate(medians);
        svg = sweep_svg(medians, fit);
      } else {
        auto in = open_input(recon_path);
        Series qs{"q*", {}, {}, "#d62728", false}, qd{"q exact", {}, {}, "#1f77b4", true};
        std::string line;
        bool header = false;
        while (std::getline(in, line)) {
          if (line.empty() || line[0] == '#') continue;
          if (!header) {
            if (line != "s,q_star,q_dag") throw ValidationError("unexpected reconstruction CSV header");
            header = true;
            continue;
          }
          std::istringstream s(line);
          std::string a, b, c;
          std::getline(s, a, ',');
          std::getline(s, b, ',');
          std::getline(s, c, ',');
          qs.x.push_back(std::stod(a));
          qs.y.push_back(std::stod(b));
          qd.x.push_back(std::stod(a));
          qd.y.push_back(std::stod(c));
        }
        ChartSpec spec;
        spec.title = "reconstruction";
        spec.x_label = "arclength s on inaccessible boundary";
        spec.y_label = "q";
        svg = line_chart_svg(spec, {qs, qd});
      }
      write_file_atomic(out, svg);
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
