#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kvrobin/data.hpp"
#include "kvrobin/inversion.hpp"

namespace kvrobin {

inline constexpr const char* kVersion = "kvrobin 0.1.0";

/// Flat `key = value` file with `#` comments. Values may be lists separated by
/// whitespace; numbers accept a single `a/b` fraction.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.contains(key); }
  const std::string& text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  /// Keys never read by any accessor.
  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> used_;
};

double parse_number(const std::string& text);

/// value = scale * (delta / delta0)^exponent
struct PowerLaw {
  double scale = 1.0;
  double exponent = 0.0;
  double at(double delta, double delta0) const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Model model = Model::Elliptic;
  SquareEdge gamma_i = SquareEdge::Right;
  ObservationArc observation = ObservationArc::full();
  std::string observation_text = "full";
  RobinCoefficient q_dag = RobinCoefficient::constant(2.0, 1.0);
  RobinCoefficient q0 = RobinCoefficient::constant(2.0, 1.0);
  bool known_partition = true;
  std::string flux = "one_minus_x1_sq";
  std::string u0_source = "quarter_cos_cos";
  double T = 10.0;
  std::vector<double> deltas;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double delta0 = 1e-2;
  PowerLaw h{0.25, 2.0 / 3.0};
  PowerLaw tau{0.2, 4.0 / 3.0};
  PowerLaw alpha{1.6e-4, -4.0 / 3.0};
  double mesh_r = 1.0;
  int data_depth = 2;
  AdmissibleSetB partition_set;
  OptimizerConfig optimizer;
  std::string source_text;  // canonical text used for the provenance hash

  /// Throws ValidationError naming the offending key.
  static ExperimentConfig from(const KeyValueConfig& kv);
  static ExperimentConfig load(const std::filesystem::path& path);
  std::uint64_t hash() const;
  std::string schedule_text() const;
};

ScalarField named_field(const std::string& name);

/// Per-delta discretisation from the schedules.
struct Discretisation {
  double delta = 0.0;
  double h = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  std::optional<TimeGrid> grid;
};
Discretisation discretise(const ExperimentConfig& config, double delta);

/// Everything one (delta) needs that does not depend on the noise seed.
struct Problem {
  Discretisation disc;
  DomainSpec domain;
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const FemSpace> space;
  ScalarField g;
  BoundaryTrace exact_fine;
  Vector u0;  // parabolic only
};
Problem prepare_problem(const ExperimentConfig& config, double delta);

struct SweepRow {
  double delta = 0.0;
  double h = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double e_q = 0.0;
  double J = 0.0;
  int iters = 0;
  double seconds = 0.0;
  std::string error;  // empty on success
};

struct RunOutput {
  InversionResult result;
  SweepRow row;
  ObservedData data;
};

/// Generate, add noise, transfer, invert, score. Writes history, profile,
/// coefficient and plots into out_dir when given.
RunOutput run_single(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed,
                     const std::optional<std::filesystem::path>& out_dir = std::nullopt);
RunOutput run_single(const ExperimentConfig& config, double delta, std::uint64_t seed,
                     const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% band
  std::size_t points = 0;
};

/// OLS slope of log e against log delta with a 95% t-band.
RateFit estimate_rate(const std::vector<std::pair<double, double>>& pairs);

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<std::pair<double, double>> medians;  // (delta, median e_q)
  std::optional<RateFit> rate;
};

SweepReport run_sweep(const ExperimentConfig& config, int threads = 1,
                      const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Median e_q per delta over successful rows, deltas descending.
std::vector<std::pair<double, double>> median_by_delta(const std::vector<SweepRow>& rows);

std::string provenance_line(const ExperimentConfig& config, std::optional<std::uint64_t> seed,
                            std::optional<double> delta);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);
void write_reconstruction_csv(std::ostream& out, const RobinCoefficient& q_star, const RobinCoefficient& q_dag,
                              int samples = 400);

/// Writes `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace kvrobin
