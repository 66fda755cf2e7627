#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "kvrobin/data.hpp"
#include "kvrobin/error.hpp"

using namespace kvrobin;
using namespace kvrobin::testing;

namespace {

const RobinCoefficient kQ(2.0, {1.2}, {1.0, 2.0});

BoundaryTrace fine_data(double h, int depth = 2) {
  const auto space = square_space(h, ObservationArc{1.0, 5.0});
  return generate_exact_data(space->mesh(), kQ, flux, DataModel{}, depth);
}

BoundaryTrace linear_trace(const FemSpace& space, double a, double b) {
  Vector u(space.dof_count());
  for (int i = 0; i < space.dof_count(); ++i) u[i] = 0.0;
  auto t = trace_on_segment(space, u, BoundaryLabel::GammaAPrime);
  for (std::size_t i = 0; i < t.s.size(); ++i) t.values[i] = a + b * t.s[i];
  return t;
}

}  // namespace

TEST_CASE("zero noise copies the data") {
  const auto f = fine_data(0.5);
  const auto z = add_noise(f, NoiseSpec{0.0, 7});
  CHECK(z.values == f.values);
  CHECK(z.s == f.s);
}

TEST_CASE("noise has the requested scale and depends on the seed") {
  const auto f = fine_data(0.125, 3);
  REQUIRE(f.values.size() > 200);
  const double delta = 0.01, scale = delta * f.max_abs();
  const auto z = add_noise(f, NoiseSpec{delta, 1});
  std::vector<double> xi(f.values.size());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = (z.values[i] - f.values[i]) / scale;
  const double mean = std::accumulate(xi.begin(), xi.end(), 0.0) / xi.size();
  double var = 0.0;
  for (double x : xi) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / (xi.size() - 1));
  CHECK(sd >= 0.9);
  CHECK(sd <= 1.1);
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(xi.size())));

  const auto again = add_noise(f, NoiseSpec{delta, 1});
  CHECK(again.values == z.values);
  const auto other = add_noise(f, NoiseSpec{delta, 2});
  CHECK(other.values != z.values);

  const auto doubled = add_noise(f, NoiseSpec{2 * delta, 1});
  for (std::size_t i = 0; i < xi.size(); ++i) {
    CHECK(doubled.values[i] - f.values[i] == doctest::Approx(2.0 * (z.values[i] - f.values[i])).epsilon(1e-12));
  }
}

TEST_CASE("gaussian stream moments") {
  GaussianStream g(123);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    m1 += x;
    m2 += x * x;
  }
  CHECK(std::abs(m1 / n) < 0.01);
  CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("data mesh must be at least two refinements finer") {
  const auto space = square_space(0.5, ObservationArc{1.0, 5.0});
  CHECK_THROWS_AS(generate_exact_data(space->mesh(), kQ, flux, DataModel{}, 1), ValidationError);
  CHECK_THROWS_AS(generate_exact_data(space->mesh(), kQ, flux, DataModel{}, 0), ValidationError);
  CHECK_NOTHROW(generate_exact_data(space->mesh(), kQ, flux, DataModel{}, 2));
  CHECK_THROWS_AS(NoiseSpec({-1.0, 0}).validate(), ValidationError);
}

TEST_CASE("exact data converges under refinement") {
  std::vector<double> err;
  const auto ref = fine_data(1.0 / 32, 2);
  for (double h : {0.25, 0.125, 0.0625}) {
    const auto f = fine_data(h, 2);
    err.push_back(trace_l2_distance(f, ref));
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(err[k] < 0.5 * err[k - 1]);
}

TEST_CASE("transfer to coarse reproduces coarse functions") {
  const auto coarse = square_space(0.25, ObservationArc{1.0, 5.0});
  const auto fine = refined_space(0.25, 2, ObservationArc{1.0, 5.0});
  const auto z = transfer_to_coarse(linear_trace(*fine, 0.3, -0.7), *coarse);
  for (std::size_t i = 0; i < z.s.size(); ++i) CHECK(z.values[i] == doctest::Approx(0.3 - 0.7 * z.s[i]).epsilon(1e-12));
  CHECK(z.dofs.size() == z.s.size());
}

TEST_CASE("transfer is an L2 contraction and the best approximation") {
  const auto coarse = square_space(0.25, ObservationArc{1.0, 5.0});
  const auto f = fine_data(0.25, 2);
  const auto z = add_noise(f, NoiseSpec{0.05, 11});
  const auto pz = transfer_to_coarse(z, *coarse);
  auto zero = z;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  auto zero_c = pz;
  std::fill(zero_c.values.begin(), zero_c.values.end(), 0.0);
  CHECK(trace_l2_distance(pz, zero_c) <= trace_l2_distance(z, zero) * (1 + 1e-12));
  const double best = trace_l2_distance(pz, z);
  for (std::size_t i = 0; i < pz.values.size(); ++i) {
    auto other = pz;
    other.values[i] += 1e-3;
    CHECK(trace_l2_distance(other, z) >= best);
  }
  const auto pf = transfer_to_coarse(f, *coarse);
  auto diff = pz;
  for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= pf.values[i];
  auto noise = z;
  for (std::size_t i = 0; i < noise.values.size(); ++i) noise.values[i] -= f.values[i];
  CHECK(trace_l2_distance(diff, zero_c) <= trace_l2_distance(noise, zero) * (1 + 1e-12));
}

TEST_CASE("transfer rejects grids that do not nest") {
  const auto coarse = square_space(0.25, ObservationArc{1.0, 5.0});
  auto t = linear_trace(*refined_space(0.25, 2, ObservationArc{1.0, 5.0}), 1.0, 0.0);
  for (std::size_t i = 1; i + 1 < t.s.size(); ++i) t.s[i] += 0.01;
  CHECK_THROWS_AS(transfer_to_coarse(t, *coarse), ValidationError);
}

TEST_CASE("parabolic data is deterministic and differs from elliptic") {
  const auto space = square_space(0.5, ObservationArc{1.0, 5.0});
  DataModel dm;
  dm.kind = Model::Parabolic;
  dm.grid = TimeGrid{2.0, 4};
  dm.u0_source = [](const Point& p) { return 0.25 * std::cos(M_PI * p.x) * std::cos(M_PI * p.y); };
  const auto a = generate_exact_data(space->mesh(), kQ, flux, dm, 2);
  const auto b = generate_exact_data(space->mesh(), kQ, flux, dm, 2);
  CHECK(a.values == b.values);
  const auto e = generate_exact_data(space->mesh(), kQ, flux, DataModel{}, 2);
  CHECK(trace_l2_distance(a, e) > 1e-6);
}

TEST_CASE("obsdata round trip") {
  const auto coarse = square_space(0.5, ObservationArc{1.0, 5.0});
  ObservedData d;
  d.model = "parabolic";
  d.depth = 3;
  d.seed = 99;
  d.delta = 5e-3;
  d.fine = fine_data(0.5, 2);
  d.coarse = transfer_to_coarse(add_noise(d.fine, NoiseSpec{d.delta, d.seed}), *coarse);
  std::stringstream io;
  write_obsdata(io, d);
  const auto back = read_obsdata(io);
  CHECK(back.model == d.model);
  CHECK(back.depth == d.depth);
  CHECK(back.seed == d.seed);
  CHECK(back.delta == d.delta);
  CHECK(back.fine.values == d.fine.values);
  CHECK(back.fine.s == d.fine.s);
  CHECK(back.coarse.values == d.coarse.values);
  CHECK(back.coarse.s == d.coarse.s);

  std::istringstream bad("trimesh v1\n");
  CHECK_THROWS_AS(read_obsdata(bad), ValidationError);
  std::string text = io.str();
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_obsdata(truncated), ValidationError);
}

TEST_CASE("projected noise grows linearly in delta") {
  const auto coarse = square_space(0.25, ObservationArc{1.0, 5.0});
  const auto f = fine_data(0.25, 2);
  const auto pf = transfer_to_coarse(f, *coarse);
  std::vector<double> logd, logn;
  for (double delta : {1e-3, 1e-2, 1e-1}) {
    const auto pz = transfer_to_coarse(add_noise(f, NoiseSpec{delta, 5}), *coarse);
    logd.push_back(std::log(delta));
    logn.push_back(std::log(trace_l2_distance(pz, pf)));
  }
  const double slope = (logn[2] - logn[0]) / (logd[2] - logd[0]);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
  CHECK((logn[1] - logn[0]) / (logd[1] - logd[0]) == doctest::Approx(slope).epsilon(0.1));
}
