#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

#include "kvrobin/objective.hpp"

namespace kvrobin {

/// How the synthetic measurement is produced.
struct DataModel {
  Model kind = Model::Elliptic;
  TimeGrid grid;           // inversion time grid (parabolic only)
  ScalarField u0_source;   // f in -Δu_0 = f (parabolic only)
};

struct NoiseSpec {
  double delta = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Standard normal samples from std::mt19937_64 (53-bit uniforms, Box-Muller).
/// Unlike std::normal_distribution the sequence is fixed on every platform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed);
  double next();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
  double next_uniform();
};

/// Γ_a′ trace of the forward solution for q_dag on refine_uniform^depth of
/// `inversion_mesh`, with tau / 2^depth in the parabolic case.
BoundaryTrace generate_exact_data(const TriMesh& inversion_mesh, const RobinCoefficient& q_dag, const ScalarField& g,
                                  const DataModel& model, int refinement_depth);

/// z = f + delta ||f||_inf xi at every node.
BoundaryTrace add_noise(const BoundaryTrace& f, const NoiseSpec& spec);

/// L2(Γ_a′) projection of a fine piecewise-linear trace onto the coarse space.
/// Throws when the coarse boundary nodes are not among the fine ones.
BoundaryTrace transfer_to_coarse(const BoundaryTrace& z_delta, const FemSpace& space);

/// L2 distance between two piecewise-linear traces on the same arc.
double trace_l2_distance(const BoundaryTrace& a, const BoundaryTrace& b);

struct ObservedData {
  std::string model = "elliptic";
  int depth = 2;
  std::uint64_t seed = 0;
  double delta = 0.0;
  BoundaryTrace fine;    // exact f
  BoundaryTrace coarse;  // z_h^delta
};

void write_obsdata(std::ostream& out, const ObservedData& data);
ObservedData read_obsdata(std::istream& in);

}  // namespace kvrobin
