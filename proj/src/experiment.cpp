#include "kvrobin/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "kvrobin/error.hpp"
#include "kvrobin/svg.hpp"

namespace kvrobin {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string delta_tag(double delta) {
  std::ostringstream s;
  s << std::setprecision(6) << delta;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double parse_number(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
    const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
    const double a = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument(text);
    const double b = std::stod(den, &used);
    if (used != den.size() || b == 0.0) throw std::invalid_argument(text);
    return a / b;
  } catch (const std::logic_error&) {
    throw ValidationError("not a number: '" + text + "'");
  }
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.entries_.contains(key)) throw ValidationError("config key '" + key + "' given twice");
    cfg.entries_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  return parse(in);
}

const std::string& KeyValueConfig::text(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ValidationError("missing config key '" + key + "'");
  used_[key] = true;
  return it->second;
}

std::string KeyValueConfig::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double KeyValueConfig::number(const std::string& key) const {
  try {
    return parse_number(text(key));
  } catch (const ValidationError& e) {
    if (!has(key)) throw;
    throw ValidationError("config key '" + key + "': " + e.what());
  }
}

double KeyValueConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::vector<double> KeyValueConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : split_words(text(key))) {
    try {
      out.push_back(parse_number(w));
    } catch (const ValidationError& e) {
      throw ValidationError("config key '" + key + "': " + e.what());
    }
  }
  return out;
}

std::vector<double> KeyValueConfig::numbers_or(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? numbers(key) : fallback;
}

bool KeyValueConfig::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = text(key);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ValidationError("config key '" + key + "': expected true or false");
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (!used_.contains(k)) out.push_back(k);
  }
  return out;
}

double PowerLaw::at(double delta, double delta0) const { return scale * std::pow(delta / delta0, exponent); }

ScalarField named_field(const std::string& name) {
  if (name == "one_minus_x1_sq") return [](const Point& p) { return 1.0 - p.x * p.x; };
  if (name == "quarter_cos_cos") {
    return [](const Point& p) { return 0.25 * std::cos(std::numbers::pi * p.x) * std::cos(std::numbers::pi * p.y); };
  }
  if (name == "one") return [](const Point&) { return 1.0; };
  if (name == "zero" || name == "none") return [](const Point&) { return 0.0; };
  throw ValidationError("unknown field '" + name + "' (one_minus_x1_sq, quarter_cos_cos, one, zero)");
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.name = kv.text_or("name", c.name);
  const std::string model = kv.text("model");
  if (model == "elliptic") {
    c.model = Model::Elliptic;
  } else if (model == "parabolic") {
    c.model = Model::Parabolic;
  } else {
    throw ValidationError("config key 'model': expected elliptic or parabolic");
  }
  c.gamma_i = parse_square_edge(kv.text_or("gamma_i", "right"));
  c.observation_text = kv.text_or("observation", "full");
  {
    const auto words = split_words(c.observation_text);
    if (words.size() == 1 && words[0] == "full") {
      c.observation = ObservationArc::full();
    } else if (words.size() == 1) {
      c.observation = ObservationArc::edge(c.gamma_i, parse_square_edge(words[0]));
    } else if (words.size() == 2) {
      c.observation = {parse_number(words[0]), parse_number(words[1])};
    } else {
      throw ValidationError("config key 'observation': expected full, an edge name, or 'start end'");
    }
    try {
      build_square_domain(c.gamma_i, c.observation);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("config key 'observation': ") + e.what());
    }
  }
  const auto bounds_list = kv.numbers_or("bounds", {0.1, 10.0});
  if (bounds_list.size() != 2) throw ValidationError("config key 'bounds': expected 'lower upper'");
  const CoefficientBounds bounds{bounds_list[0], bounds_list[1]};
  const double length = 2.0;
  try {
    c.q_dag = RobinCoefficient(length, kv.numbers_or("q_dag.breakpoints", {}), kv.numbers("q_dag.values"), bounds);
  } catch (const ValidationError& e) {
    if (!kv.has("q_dag.values")) throw;
    throw ValidationError(std::string("config key 'q_dag': ") + e.what());
  }
  try {
    c.q0 = RobinCoefficient(length, kv.numbers_or("q0.breakpoints", {}), kv.numbers("q0.values"), bounds);
  } catch (const ValidationError& e) {
    if (!kv.has("q0.values")) throw;
    throw ValidationError(std::string("config key 'q0': ") + e.what());
  }
  const std::string partition = kv.text("partition");
  if (partition == "known") {
    c.known_partition = true;
  } else if (partition == "unknown") {
    c.known_partition = false;
  } else {
    throw ValidationError("config key 'partition': expected known or unknown");
  }
  c.flux = kv.text_or("flux", c.flux);
  named_field(c.flux);
  c.u0_source = kv.text_or("u0_source", c.u0_source);
  named_field(c.u0_source);
  c.T = kv.number_or("T", c.T);

  c.deltas = kv.numbers("delta");
  if (c.deltas.empty()) throw ValidationError("config key 'delta': needs at least one value");
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    if (!(c.deltas[i] > 0.0)) throw ValidationError("config key 'delta': values must be positive");
    if (i > 0 && !(c.deltas[i] < c.deltas[i - 1])) {
      throw ValidationError("config key 'delta': values must be sorted descending");
    }
  }
  if (kv.has("seeds")) {
    c.seeds.clear();
    for (double s : kv.numbers("seeds")) {
      if (s < 0 || s != std::floor(s)) throw ValidationError("config key 'seeds': expected non-negative integers");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (c.seeds.empty()) throw ValidationError("config key 'seeds': needs at least one seed");
  c.delta0 = kv.number_or("delta0", c.delta0);
  c.h = {kv.number("h0"), kv.number_or("h_exponent", c.h.exponent)};
  c.alpha = {kv.number("alpha0"), kv.number_or("alpha_exponent", c.alpha.exponent)};
  if (c.model == Model::Parabolic) {
    c.tau = {kv.number("tau0"), kv.number_or("tau_exponent", c.tau.exponent)};
  }
  c.mesh_r = kv.number_or("mesh.r", c.mesh_r);
  c.data_depth = static_cast<int>(kv.number_or("data.depth", c.data_depth));
  if (c.data_depth < 2) throw ValidationError("config key 'data.depth': must be at least 2");

  c.partition_set.max_pieces = static_cast<std::size_t>(kv.number_or("max_pieces", 4));
  c.partition_set.min_piece_measure = kv.number_or("min_piece_measure", 0.05);
  c.partition_set.bounds = bounds;

  auto& o = c.optimizer;
  o.max_iterations = static_cast<int>(kv.number_or("optimizer.max_iterations", c.known_partition ? 500 : 4000));
  o.cg_restart_period = static_cast<int>(kv.number_or("optimizer.cg_restart", o.cg_restart_period));
  o.fix_background = kv.flag_or("optimizer.fix_background", !c.known_partition);
  o.background = kv.number_or("optimizer.background", o.background);
  o.move_breakpoints = kv.flag_or("optimizer.move_breakpoints", o.move_breakpoints);
  o.line_search.initial_step = kv.number_or("optimizer.initial_step", o.line_search.initial_step);
  o.line_search.max_step = kv.number_or("optimizer.max_step", o.line_search.max_step);
  o.line_search.enlarge_after = static_cast<int>(kv.number_or("optimizer.enlarge_after", o.line_search.enlarge_after));
  o.line_search.enlarge_factor = kv.number_or("optimizer.enlarge_factor", o.line_search.enlarge_factor);
  o.line_search.max_halvings = static_cast<int>(kv.number_or("optimizer.max_halvings", o.line_search.max_halvings));
  o.stop.gradient_rel_tol = kv.number_or("optimizer.grad_rel_tol", o.stop.gradient_rel_tol);
  o.stop.gradient_abs_tol = kv.number_or("optimizer.grad_abs_tol", o.stop.gradient_abs_tol);
  o.stop.stagnation_tol = kv.number_or("optimizer.stagnation_tol", o.stop.stagnation_tol);
  o.stop.window = static_cast<int>(kv.number_or("optimizer.window", o.stop.window));
  o.initial_guess = c.q0;
  o.validate();

  const auto unused = kv.unused_keys();
  if (!unused.empty()) throw ValidationError("unknown config key '" + unused.front() + "'");

  std::ostringstream canon;
  for (const auto& [k, v] : kv.entries()) canon << k << '=' << v << '\n';
  c.source_text = canon.str();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from(KeyValueConfig::load(path));
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(source_text); }

std::string ExperimentConfig::schedule_text() const {
  std::ostringstream s;
  s << std::setprecision(17) << "delta0=" << delta0 << " h=" << h.scale << "^" << h.exponent << " alpha=" << alpha.scale
    << "^" << alpha.exponent;
  if (model == Model::Parabolic) s << " tau=" << tau.scale << "^" << tau.exponent;
  return s.str();
}

Discretisation discretise(const ExperimentConfig& config, double delta) {
  Discretisation d;
  d.delta = delta;
  d.h = config.h.at(delta, config.delta0);
  d.alpha = config.alpha.at(delta, config.delta0);
  if (config.model == Model::Parabolic) {
    d.tau = config.tau.at(delta, config.delta0);
    d.grid = TimeGrid::with_step(config.T, d.tau);
  }
  return d;
}

Problem prepare_problem(const ExperimentConfig& config, double delta) {
  Problem p;
  p.disc = discretise(config, delta);
  p.domain = build_square_domain(config.gamma_i, config.observation);
  MeshSpec spec;
  spec.h = p.disc.h;
  spec.r = config.mesh_r;
  spec.validate();
  p.mesh = std::make_shared<const TriMesh>(generate_graded_mesh(p.domain, spec));
  p.space = std::make_shared<const FemSpace>(p.mesh);
  p.g = named_field(config.flux);
  DataModel model;
  model.kind = config.model;
  if (config.model == Model::Parabolic) {
    model.grid = *p.disc.grid;
    model.u0_source = named_field(config.u0_source);
    p.u0 = build_initial_data(*p.space, config.q_dag, model.u0_source, p.g);
  }
  p.exact_fine = generate_exact_data(*p.mesh, config.q_dag, p.g, model, config.data_depth);
  return p;
}

std::string provenance_line(const ExperimentConfig& config, std::optional<std::uint64_t> seed,
                            std::optional<double> delta) {
  std::ostringstream s;
  s << "# " << kVersion << " config=" << config.name << " config_hash=" << hex(config.hash());
  if (seed) s << " seed=" << *seed;
  if (delta) s << " delta=" << format_number(*delta);
  s << " schedule=[" << config.schedule_text() << "] depth=" << config.data_depth << " rng=mt19937_64+box_muller";
  return s.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_reconstruction_csv(std::ostream& out, const RobinCoefficient& q_star, const RobinCoefficient& q_dag,
                              int samples) {
  std::vector<double> s;
  for (int k = 0; k <= samples; ++k) s.push_back(q_dag.length() * k / samples);
  s.insert(s.end(), q_star.breakpoints().begin(), q_star.breakpoints().end());
  s.insert(s.end(), q_dag.breakpoints().begin(), q_dag.breakpoints().end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  out << "s,q_star,q_dag\n" << std::setprecision(17);
  for (double x : s) out << x << ',' << q_star.evaluate(x) << ',' << q_dag.evaluate(x) << '\n';
}

RunOutput run_single(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed,
                     const std::optional<std::filesystem::path>& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  RunOutput out;
  const auto& disc = problem.disc;
  out.data.model = config.model == Model::Elliptic ? "elliptic" : "parabolic";
  out.data.depth = config.data_depth;
  out.data.seed = seed;
  out.data.delta = disc.delta;
  out.data.fine = problem.exact_fine;
  out.data.coarse = transfer_to_coarse(add_noise(problem.exact_fine, NoiseSpec{disc.delta, seed}), *problem.space);

  FunctionalConfig fc;
  fc.alpha = disc.alpha;
  fc.mode = config.model;
  std::unique_ptr<KohnVogelius> objective;
  if (config.model == Model::Elliptic) {
    objective = std::make_unique<KohnVogelius>(problem.space, problem.g, out.data.coarse, fc);
  } else {
    objective = std::make_unique<KohnVogelius>(problem.space, problem.g, out.data.coarse, fc, *disc.grid, problem.u0);
  }
  if (config.known_partition) {
    out.result = solve_known_partition(*objective, AdmissibleSetA{config.q0.breakpoints(), config.q0.bounds()},
                                       config.optimizer, &config.q_dag);
  } else {
    out.result = solve_unknown_partition(*objective, config.partition_set, config.optimizer, &config.q_dag);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.row = {disc.delta,
             disc.h,
             disc.grid ? disc.grid->tau() : 0.0,
             disc.alpha,
             seed,
             relative_error_eq(out.result.q_star, config.q_dag),
             out.result.final_J,
             out.result.iterations,
             seconds,
             {}};

  if (out_dir) {
    const std::string prov = provenance_line(config, seed, disc.delta) + '\n';
    std::ostringstream history, profile, coeff, obs;
    history << prov;
    write_history_csv(history, out.result.history);
    profile << prov;
    write_reconstruction_csv(profile, out.result.q_star, config.q_dag);
    write_coefficient(coeff, out.result.q_star);
    write_obsdata(obs, out.data);
    write_file_atomic(*out_dir / "history.csv", history.str());
    write_file_atomic(*out_dir / "reconstruction.csv", profile.str());
    write_file_atomic(*out_dir / "q_star.robin", coeff.str());
    write_file_atomic(*out_dir / "data.obs", obs.str());
    write_file_atomic(*out_dir / "history_J.svg", history_svg(out.result.history, false));
    write_file_atomic(*out_dir / "history_eq.svg", history_svg(out.result.history, true));
    write_file_atomic(*out_dir / "reconstruction.svg", reconstruction_svg(out.result.q_star, config.q_dag));
  }
  return out;
}

RunOutput run_single(const ExperimentConfig& config, double delta, std::uint64_t seed,
                     const std::optional<std::filesystem::path>& out_dir) {
  return run_single(config, prepare_problem(config, delta), seed, out_dir);
}

RateFit estimate_rate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw ValidationError("rate fit needs at least two (delta, error) pairs");
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [d, e] : pairs) {
    if (!(d > 0.0) || !(e > 0.0)) throw ValidationError("rate fit needs positive delta and error values");
    mx += std::log(d);
    my += std::log(e);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [d, e] : pairs) {
    sxx += (std::log(d) - mx) * (std::log(d) - mx);
    sxy += (std::log(d) - mx) * (std::log(e) - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("rate fit needs at least two distinct delta values");
  RateFit fit;
  fit.points = pairs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (pairs.size() == 2) {
    fit.half_width = std::numeric_limits<double>::infinity();
    return fit;
  }
  double ssr = 0.0;
  for (const auto& [d, e] : pairs) {
    const double r = std::log(e) - fit.intercept - fit.slope * std::log(d);
    ssr += r * r;
  }
  const double se = std::sqrt(ssr / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  fit.half_width = boost::math::quantile(dist, 0.975) * se;
  return fit;
}

std::vector<std::pair<double, double>> median_by_delta(const std::vector<SweepRow>& rows) {
  std::map<double, std::vector<double>, std::greater<>> by;
  for (const auto& r : rows) {
    if (r.error.empty() && std::isfinite(r.e_q)) by[r.delta].push_back(r.e_q);
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [d, v] : by) out.emplace_back(d, median(v));
  return out;
}

SweepReport run_sweep(const ExperimentConfig& config, int threads, const std::optional<std::filesystem::path>& out_dir) {
  threads = std::max(1, threads);
  const std::size_t nd = config.deltas.size(), ns = config.seeds.size();
  std::vector<std::optional<Problem>> problems(nd);
  std::vector<std::string> problem_errors(nd);
  SweepReport report;
  report.rows.resize(nd * ns);

  auto parallel = [threads](std::size_t count, const std::function<void(std::size_t)>& task) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min<int>(threads, static_cast<int>(count)); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  };

  parallel(nd, [&](std::size_t i) {
    try {
      problems[i] = prepare_problem(config, config.deltas[i]);
    } catch (const std::exception& e) {
      problem_errors[i] = e.what();
    }
  });
  parallel(nd * ns, [&](std::size_t cell) {
    const std::size_t i = cell / ns, j = cell % ns;
    SweepRow& row = report.rows[cell];
    const auto disc = discretise(config, config.deltas[i]);
    row.delta = disc.delta;
    row.h = disc.h;
    row.tau = disc.grid ? disc.grid->tau() : 0.0;
    row.alpha = disc.alpha;
    row.seed = config.seeds[j];
    if (!problems[i]) {
      row.error = problem_errors[i];
      row.e_q = row.J = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    try {
      std::optional<std::filesystem::path> cell_dir;
      if (out_dir) cell_dir = *out_dir / "cells" / ("delta_" + delta_tag(disc.delta) + "_seed_" + std::to_string(row.seed));
      row = run_single(config, *problems[i], row.seed, cell_dir).row;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.e_q = row.J = std::numeric_limits<double>::quiet_NaN();
    }
  });

  report.medians = median_by_delta(report.rows);
  if (report.medians.size() >= 3) report.rate = estimate_rate(report.medians);
  if (out_dir) {
    std::ostringstream csv;
    csv << provenance_line(config, std::nullopt, std::nullopt) << '\n';
    write_sweep_csv(csv, report.rows);
    write_file_atomic(*out_dir / "sweep.csv", csv.str());
    write_file_atomic(*out_dir / "sweep.svg", sweep_svg(report.medians, report.rate));
    std::ostringstream summary;
    summary << provenance_line(config, std::nullopt, std::nullopt) << '\n' << std::setprecision(6);
    for (const auto& [d, e] : report.medians) summary << "delta " << d << " median_e_q " << e << '\n';
    if (report.rate) summary << "rate " << report.rate->slope << " +- " << report.rate->half_width << '\n';
    write_file_atomic(*out_dir / "rate.txt", summary.str());
  }
  return report;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "delta,h,tau,alpha,seed,e_q,J,iters,seconds\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.delta << ',' << r.h << ',' << r.tau << ',' << r.alpha << ',' << r.seed << ',' << r.e_q << ',' << r.J << ','
        << r.iters << ',' << std::setprecision(6) << r.seconds << std::setprecision(17) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "delta,h,tau,alpha,seed,e_q,J,iters,seconds") throw ValidationError("unexpected sweep CSV header");
      header = true;
      continue;
    }
    std::istringstream s(line);
    std::vector<std::string> f;
    for (std::string cell; std::getline(s, cell, ',');) f.push_back(cell);
    if (f.size() != 9) throw ValidationError("sweep CSV row needs 9 fields");
    SweepRow r;
    r.delta = std::stod(f[0]);
    r.h = std::stod(f[1]);
    r.tau = std::stod(f[2]);
    r.alpha = std::stod(f[3]);
    r.seed = std::stoull(f[4]);
    r.e_q = std::stod(f[5]);
    r.J = std::stod(f[6]);
    r.iters = std::stoi(f[7]);
    r.seconds = std::stod(f[8]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace kvrobin
