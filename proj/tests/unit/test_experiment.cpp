#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "doctest.h"
#include "kvrobin/error.hpp"
#include "kvrobin/experiment.hpp"
#include "kvrobin/svg.hpp"

using namespace kvrobin;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

KeyValueConfig kv(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in);
}

const std::string kBase =
    "model = elliptic\n"
    "partition = known\n"
    "q_dag.breakpoints = 1.2\n"
    "q_dag.values = 1 2\n"
    "q0.breakpoints = 1.2\n"
    "q0.values = 1 1\n"
    "delta = 1e-2\n"
    "h0 = 1/4\n"
    "alpha0 = 1.6e-4\n";

std::string error_of(const std::string& text) {
  try {
    ExperimentConfig::from(kv(text));
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("number parsing") {
  CHECK(parse_number("1/4") == 0.25);
  CHECK(parse_number("1.6e-4") == 1.6e-4);
  CHECK(parse_number("-2.5") == -2.5);
  CHECK_THROWS_AS(parse_number("1/0"), ValidationError);
  CHECK_THROWS_AS(parse_number("abc"), ValidationError);
  CHECK_THROWS_AS(parse_number("2x"), ValidationError);
}

TEST_CASE("config parsing and validation") {
  const auto c = ExperimentConfig::from(kv(kBase));
  CHECK(c.model == Model::Elliptic);
  CHECK(c.known_partition);
  CHECK(c.q_dag == RobinCoefficient(2.0, {1.2}, {1.0, 2.0}));
  CHECK(c.h.scale == 0.25);
  CHECK(c.seeds.size() == 5);

  CHECK(error_of(kBase + "colour = red\n").find("colour") != std::string::npos);
  std::string missing = kBase;
  missing.erase(missing.find("h0 = 1/4\n"), 9);
  CHECK(error_of(missing).find("h0") != std::string::npos);
  CHECK(error_of(kBase + "h0 = 1/8\n").find("twice") != std::string::npos);
  CHECK(error_of("model = elastic\n" + kBase.substr(kBase.find('\n') + 1)).find("model") != std::string::npos);
  std::string unsorted = kBase;
  unsorted.replace(unsorted.find("delta = 1e-2"), 12, "delta = 1e-3 1e-2");
  CHECK(error_of(unsorted).find("delta") != std::string::npos);
  CHECK(error_of(kBase + "data.depth = 1\n").find("data.depth") != std::string::npos);
  CHECK(error_of(kBase + "observation = 1 9\n").find("observation") != std::string::npos);
  CHECK(error_of(kBase + "observation = right\n").find("observation") != std::string::npos);
  CHECK_THROWS_AS(kv("no equals sign\n"), ValidationError);
  CHECK(kv("# comment\n\nkey = value # trailing\n").text("key") == "value");
}

TEST_CASE("config hash tracks content") {
  const auto a = ExperimentConfig::from(kv(kBase));
  const auto b = ExperimentConfig::from(kv("# different comment\n" + kBase));
  const auto c = ExperimentConfig::from(kv(kBase + "seeds = 1 2\n"));
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("shipped configs load") {
  const std::filesystem::path dir = KVROBIN_SOURCE_DIR "/configs";
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(ExperimentConfig::load(entry.path()));
    ++n;
  }
  CHECK(n == 10);
}

TEST_CASE("named fields") {
  CHECK(named_field("quarter_cos_cos")(Point{0.0, 0.0}) == doctest::Approx(0.25));
  CHECK(named_field("one_minus_x1_sq")(Point{0.5, 3.0}) == doctest::Approx(0.75));
  CHECK(named_field("zero")(Point{0.3, 0.1}) == 0.0);
  CHECK_THROWS_AS(named_field("sin"), ValidationError);
}

TEST_CASE("schedules follow the power laws") {
  const auto c = ExperimentConfig::from(kv(kBase));
  const auto d0 = discretise(c, 1e-2);
  CHECK(d0.h == doctest::Approx(0.25));
  CHECK(d0.alpha == doctest::Approx(1.6e-4));
  const auto d1 = discretise(c, 1e-3);
  CHECK(d1.h == doctest::Approx(0.25 * std::pow(0.1, 2.0 / 3.0)));
  CHECK(d1.alpha == doctest::Approx(1.6e-4 * std::pow(0.1, -4.0 / 3.0)));
  CHECK(!d1.grid);
}

TEST_CASE("rate estimation") {
  const auto exact = estimate_rate({{1e-2, 1e-2}, {1e-3, 1e-3}, {1e-4, 1e-4}});
  CHECK(std::abs(exact.slope - 1.0) <= 1e-12);
  CHECK(exact.half_width <= 1e-12);
  const auto flat = estimate_rate({{1e-2, 0.3}, {1e-3, 0.3}, {1e-4, 0.3}});
  CHECK(std::abs(flat.slope) <= 1e-12);
  const auto table = estimate_rate({{1e-2, 8.70e-3}, {5e-3, 4.28e-3}, {2e-3, 1.51e-3}, {1e-3, 8.34e-4}, {5e-4, 4.00e-4}});
  CHECK(table.slope == doctest::Approx(1.03).epsilon(0.03 / 1.03));
  CHECK(table.half_width > 0.0);
  CHECK(table.half_width < 0.2);
  CHECK(std::isinf(estimate_rate({{1e-2, 1e-2}, {1e-3, 2e-3}}).half_width));
  CHECK_THROWS_AS(estimate_rate({{1e-2, 1e-2}}), ValidationError);
  CHECK_THROWS_AS(estimate_rate({{1e-2, 1e-2}, {1e-2, 2e-2}}), ValidationError);
  CHECK_THROWS_AS(estimate_rate({{1e-2, 0.0}, {1e-3, 1e-3}}), ValidationError);
}

TEST_CASE("medians by delta") {
  std::vector<SweepRow> rows;
  for (double d : {1e-3, 1e-2}) {
    for (double e : {5.0, 1.0, 3.0}) {
      SweepRow r;
      r.delta = d;
      r.e_q = e * d;
      rows.push_back(r);
    }
  }
  SweepRow failed;
  failed.delta = 1e-2;
  failed.e_q = 100.0;
  failed.error = "solver";
  rows.push_back(failed);
  const auto m = median_by_delta(rows);
  REQUIRE(m.size() == 2);
  CHECK(m[0].first == 1e-2);
  CHECK(m[0].second == doctest::Approx(3e-2));
  CHECK(m[1].second == doctest::Approx(3e-3));
}

TEST_CASE("sweep CSV round trip") {
  std::vector<SweepRow> rows(2);
  rows[0] = {1e-2, 0.25, 0.0, 1.6e-4, 3, 0.0123, 4.5e-5, 41, 0.75, {}};
  rows[1] = {5e-3, 0.1575, 0.05, 4e-4, 4, 0.0061, 1.5e-5, 77, 1.25, {}};
  std::ostringstream out;
  write_sweep_csv(out, rows);
  std::istringstream in("# provenance\n" + out.str());
  const auto back = read_sweep_csv(in);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].delta == rows[i].delta);
    CHECK(back[i].h == rows[i].h);
    CHECK(back[i].tau == rows[i].tau);
    CHECK(back[i].alpha == rows[i].alpha);
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].e_q == rows[i].e_q);
    CHECK(back[i].J == rows[i].J);
    CHECK(back[i].iters == rows[i].iters);
  }
  std::istringstream bad("delta,e_q\n");
  CHECK_THROWS_AS(read_sweep_csv(bad), ValidationError);
}

TEST_CASE("svg output") {
  const auto empty = history_svg({}, false);
  CHECK(empty.find("<svg") != std::string::npos);
  CHECK(empty.find("class=\"axes\"") != std::string::npos);
  CHECK(empty.find("points=\"\"") != std::string::npos);

  const auto recon = reconstruction_svg(RobinCoefficient(2.0, {1.0}, {1.0, 2.0}), RobinCoefficient(2.0, {1.2}, {1.0, 2.0}));
  CHECK(count(recon, "<polyline") == 2);

  std::vector<std::pair<double, double>> medians{{1e-2, 1e-2}, {5e-3, 4.8e-3}, {1e-3, 1.1e-3}};
  const auto fit = estimate_rate(medians);
  std::ostringstream expected;
  expected << "rate " << std::setprecision(3) << fit.slope;
  const auto sweep = sweep_svg(medians, fit);
  CHECK(sweep.find(expected.str()) != std::string::npos);
  CHECK(sweep.find("class=\"annotation\"") != std::string::npos);
  CHECK(sweep_svg(medians, std::nullopt).find("annotation") == std::string::npos);

  ChartSpec spec;
  spec.title = "a < b & c";
  CHECK(line_chart_svg(spec, {}).find("a &lt; b &amp; c") != std::string::npos);
}

TEST_CASE("single runs are deterministic and write their artefacts") {
  auto c = ExperimentConfig::from(kv(kBase + "optimizer.max_iterations = 15\n"));
  const auto problem = prepare_problem(c, 1e-2);
  const auto a = run_single(c, problem, 4);
  const auto b = run_single(c, problem, 4);
  CHECK(a.result.q_star == b.result.q_star);
  CHECK(a.row.e_q == b.row.e_q);
  CHECK(a.row.iters == a.result.iterations);
  const auto other = run_single(c, problem, 5);
  CHECK(other.data.coarse.values != a.data.coarse.values);

  const auto dir = std::filesystem::temp_directory_path() / "kvrobin_unit_run";
  std::filesystem::remove_all(dir);
  run_single(c, problem, 4, dir);
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  CHECK(files >= 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("noise-free run recovers the coefficient") {
  std::string text = kBase;
  text.replace(text.find("h0 = 1/4"), 8, "h0 = 1/16");
  auto c = ExperimentConfig::from(kv(text));
  auto problem = prepare_problem(c, 1e-2);
  problem.disc.delta = 0.0;
  problem.disc.alpha = 1e-6;
  const auto out = run_single(c, problem, 1);
  MESSAGE("noise-free e_q = " << out.row.e_q);
  CHECK(out.row.e_q <= 1e-3);
}
