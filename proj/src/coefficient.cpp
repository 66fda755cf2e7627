#include "kvrobin/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "kvrobin/error.hpp"

namespace kvrobin {

RobinCoefficient::RobinCoefficient(double length, std::vector<double> breakpoints, std::vector<double> values,
                                   CoefficientBounds bounds)
    : length_(length), breakpoints_(std::move(breakpoints)), values_(std::move(values)), bounds_(bounds) {
  if (!(length_ > 0.0)) throw ValidationError("coefficient segment length must be positive");
  if (values_.size() != breakpoints_.size() + 1) {
    throw ValidationError("coefficient needs exactly one more value than breakpoints");
  }
  if (!(bounds_.lower > 0.0 && bounds_.upper >= bounds_.lower)) {
    throw ValidationError("coefficient bounds must satisfy 0 < lower <= upper");
  }
  double prev = 0.0;
  for (double b : breakpoints_) {
    if (!(b > prev && b < length_)) {
      throw ValidationError("breakpoints must be strictly increasing and interior to (0, length)");
    }
    prev = b;
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("coefficient values must be finite");
  }
}

RobinCoefficient RobinCoefficient::constant(double length, double value, CoefficientBounds bounds) {
  return RobinCoefficient(length, {}, {value}, bounds);
}

double RobinCoefficient::evaluate(double s) const {
  if (!(s >= 0.0 && s <= length_)) throw ValidationError("arclength outside [0, |Γ_i|]");
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), s);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

bool RobinCoefficient::in_box() const {
  return std::all_of(values_.begin(), values_.end(),
                     [&](double v) { return v >= bounds_.lower && v <= bounds_.upper; });
}

RobinCoefficient RobinCoefficient::with_values(std::vector<double> values) const {
  return RobinCoefficient(length_, breakpoints_, std::move(values), bounds_);
}

RobinCoefficient RobinCoefficient::with_breakpoints(std::vector<double> breakpoints) const {
  return RobinCoefficient(length_, std::move(breakpoints), values_, bounds_);
}

bool AdmissibleSetA::contains(const RobinCoefficient& q) const {
  if (q.breakpoints().size() != breakpoints.size()) return false;
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (std::abs(q.breakpoints()[i] - breakpoints[i]) > 1e-14 * q.length()) return false;
  }
  return std::all_of(q.values().begin(), q.values().end(),
                     [&](double v) { return v >= bounds.lower && v <= bounds.upper; });
}

bool AdmissibleSetB::contains(const RobinCoefficient& q) const {
  if (q.piece_count() > max_pieces) return false;
  for (std::size_t j = 0; j < q.piece_count(); ++j) {
    if (!(q.piece_measure(j) > min_piece_measure)) return false;
  }
  return std::all_of(q.values().begin(), q.values().end(),
                     [&](double v) { return v >= bounds.lower && v <= bounds.upper; });
}

RobinCoefficient project_box(const RobinCoefficient& q, const CoefficientBounds& bounds) {
  std::vector<double> v = q.values();
  for (double& x : v) x = std::clamp(x, bounds.lower, bounds.upper);
  return q.with_values(std::move(v));
}

namespace {

// Shift b_j -> c_j = b_j - j*gap so the gap constraints become monotonicity of
// c inside [0, length - (K+1)*gap].
std::vector<double> shifted(std::span<const double> b, double gap) {
  std::vector<double> c(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) c[j] = b[j] - static_cast<double>(j + 1) * gap;
  return c;
}

}  // namespace

double partition_repair_radius(std::span<const double> b, double length, double gap) {
  const auto c = shifted(b, gap);
  const double lo = 0.0;
  const double hi = length - static_cast<double>(b.size() + 1) * gap;
  double d = 0.0;
  double running_max = -std::numeric_limits<double>::infinity();
  for (double cj : c) {
    running_max = std::max(running_max, cj);
    d = std::max({d, 0.5 * (running_max - cj), lo - cj, cj - hi});
  }
  return d;
}

RobinCoefficient project_partition_constraints(const RobinCoefficient& q, const AdmissibleSetB& set) {
  const std::size_t pieces = q.piece_count();
  if (pieces > set.max_pieces) {
    throw ValidationError("coefficient has more pieces than the admissible set allows");
  }
  const double length = q.length();
  const double c0 = set.min_piece_measure;
  if (static_cast<double>(pieces) * c0 >= length) {
    throw ValidationError("partition constraints infeasible: N * c0 >= |Γ_i|");
  }
  std::vector<double> values = q.values();
  for (double& v : values) v = std::clamp(v, set.bounds.lower, set.bounds.upper);

  bool compliant = true;
  for (std::size_t j = 0; j < pieces; ++j) compliant = compliant && q.piece_measure(j) > c0;
  if (compliant) return RobinCoefficient(length, q.breakpoints(), std::move(values), set.bounds);

  const double gap = c0 + std::min(kPartitionMargin, 0.5 * (length / static_cast<double>(pieces) - c0));
  const auto& b = q.breakpoints();
  const double d = partition_repair_radius(b, length, gap);
  auto c = shifted(b, gap);
  const double lo = 0.0;
  const double hi = length - static_cast<double>(b.size() + 1) * gap;
  const std::size_t k = c.size();
  std::vector<double> low(k), high(k);
  double run = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    run = std::max(run, c[j] - d);
    low[j] = std::max(lo, run);
  }
  run = std::numeric_limits<double>::infinity();
  for (std::size_t j = k; j-- > 0;) {
    run = std::min(run, c[j] + d);
    high[j] = std::min(hi, run);
  }
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    double cj = std::clamp(c[j], low[j], std::max(low[j], high[j]));
    if (j > 0) cj = std::max(cj, out[j - 1] - static_cast<double>(j) * gap);
    out[j] = cj + static_cast<double>(j + 1) * gap;
  }
  return RobinCoefficient(length, std::move(out), std::move(values), set.bounds);
}

double l2_distance_squared(const RobinCoefficient& a, const RobinCoefficient& b) {
  if (std::abs(a.length() - b.length()) > 1e-12 * a.length()) {
    throw ValidationError("coefficients live on segments of different length");
  }
  std::vector<double> cuts{0.0, a.length()};
  cuts.insert(cuts.end(), a.breakpoints().begin(), a.breakpoints().end());
  cuts.insert(cuts.end(), b.breakpoints().begin(), b.breakpoints().end());
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double w = cuts[i + 1] - cuts[i];
    if (w <= 0.0) continue;
    const double s = 0.5 * (cuts[i] + cuts[i + 1]);
    const double diff = a.evaluate(s) - b.evaluate(s);
    total += diff * diff * w;
  }
  return total;
}

double relative_error_eq(const RobinCoefficient& q_star, const RobinCoefficient& q_dag) {
  const auto zero = RobinCoefficient(q_dag.length(), {}, {0.0}, q_dag.bounds());
  return std::sqrt(l2_distance_squared(q_star, q_dag) / l2_distance_squared(q_dag, zero));
}

void write_coefficient(std::ostream& out, const RobinCoefficient& q) {
  out << "robin v1\n" << std::setprecision(17);
  out << "length " << q.length() << '\n';
  out << "bounds " << q.bounds().lower << ' ' << q.bounds().upper << '\n';
  out << "breakpoints " << q.breakpoints().size();
  for (double b : q.breakpoints()) out << ' ' << b;
  out << "\nvalues " << q.values().size();
  for (double v : q.values()) out << ' ' << v;
  out << '\n';
}

RobinCoefficient read_coefficient(std::istream& in) {
  std::string word;
  std::getline(in, word);
  if (word != "robin v1") throw ValidationError("coefficient file must start with 'robin v1'");
  auto expect = [&](const char* key) {
    if (!(in >> word) || word != key) throw ValidationError(std::string("coefficient file: expected '") + key + "'");
  };
  double length = 0.0;
  CoefficientBounds bounds;
  std::size_t n = 0;
  expect("length");
  in >> length;
  expect("bounds");
  in >> bounds.lower >> bounds.upper;
  expect("breakpoints");
  in >> n;
  std::vector<double> b(n);
  for (double& x : b) in >> x;
  expect("values");
  in >> n;
  std::vector<double> v(n);
  for (double& x : v) in >> x;
  if (!in) throw ValidationError("coefficient file is truncated");
  return RobinCoefficient(length, std::move(b), std::move(v), bounds);
}

}  // namespace kvrobin
