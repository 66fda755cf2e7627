#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace kvrobin {

/// Box constraint c_lo <= q_j <= c_hi on every piece value.
struct CoefficientBounds {
  double lower = 0.1;
  double upper = 10.0;

  friend bool operator==(const CoefficientBounds&, const CoefficientBounds&) = default;
};

/// Piecewise-constant Robin coefficient on Γ_i, parameterised by arclength
/// s in [0, length]. Piece j covers [b_{j-1}, b_j) with b_0 = 0 and the last
/// piece closed at `length`.
class RobinCoefficient {
 public:
  RobinCoefficient(double length, std::vector<double> breakpoints, std::vector<double> values,
                   CoefficientBounds bounds = {});

  static RobinCoefficient constant(double length, double value, CoefficientBounds bounds = {});

  double length() const { return length_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  const CoefficientBounds& bounds() const { return bounds_; }
  std::size_t piece_count() const { return values_.size(); }
  double piece_start(std::size_t j) const { return j == 0 ? 0.0 : breakpoints_[j - 1]; }
  double piece_end(std::size_t j) const { return j + 1 == values_.size() ? length_ : breakpoints_[j]; }
  double piece_measure(std::size_t j) const { return piece_end(j) - piece_start(j); }

  double evaluate(double s) const;
  bool in_box() const;

  RobinCoefficient with_values(std::vector<double> values) const;
  RobinCoefficient with_breakpoints(std::vector<double> breakpoints) const;

  friend bool operator==(const RobinCoefficient&, const RobinCoefficient&) = default;

 private:
  double length_;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  CoefficientBounds bounds_;
};

/// Known-partition admissible set: breakpoints fixed, values boxed.
struct AdmissibleSetA {
  std::vector<double> breakpoints;
  CoefficientBounds bounds;

  bool contains(const RobinCoefficient& q) const;
};

/// Unknown-partition admissible set: at most `max_pieces` pieces, each of
/// measure strictly greater than `min_piece_measure`, values boxed.
struct AdmissibleSetB {
  std::size_t max_pieces = 4;
  double min_piece_measure = 0.05;
  CoefficientBounds bounds;

  bool contains(const RobinCoefficient& q) const;
};

/// Clamp every value into `bounds`; breakpoints untouched.
RobinCoefficient project_box(const RobinCoefficient& q, const CoefficientBounds& bounds);

/// Margin added to c0 when breakpoints have to be moved.
inline constexpr double kPartitionMargin = 1e-9;

/// Move breakpoints by the smallest possible max-norm displacement so every
/// piece is longer than c0 (by kPartitionMargin) with ordering preserved, and
/// clamp values into the set's box. Compliant breakpoints are left untouched.
RobinCoefficient project_partition_constraints(const RobinCoefficient& q, const AdmissibleSetB& set);

/// Minimal max-norm displacement achievable by project_partition_constraints
/// for breakpoints `b` on [0, length] with minimum gap `gap`.
double partition_repair_radius(std::span<const double> b, double length, double gap);

/// ||q_star - q_dag||_{L2(Γ_i)} / ||q_dag||_{L2(Γ_i)}, integrated exactly.
double relative_error_eq(const RobinCoefficient& q_star, const RobinCoefficient& q_dag);

/// Exact ||a - b||^2 in L2(0, length).
double l2_distance_squared(const RobinCoefficient& a, const RobinCoefficient& b);

void write_coefficient(std::ostream& out, const RobinCoefficient& q);
RobinCoefficient read_coefficient(std::istream& in);

}  // namespace kvrobin
