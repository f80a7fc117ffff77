// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale problem setup: velocity model, mesh sized from the frequency,
// partition, DOF map, global matrices and a line of shallow point sources.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ddlab/assembly.hpp"

namespace ddlab {

struct ProblemSpec {
  std::string model = "mini_subduction";  // homogeneous | two_layer | mini_subduction
  double velocity = 1500.0;               // homogeneous model only
  double lx = 10200.0;
  double ly = 2800.0;
  double frequency = 1.0;
  int order = 1;
  double ppw = 4.0;
  int nx = 0;  // cell counts; derived from the resolution when 0
  int ny = 0;
  std::string partition = "strips";  // strips | grid
  int subdomains = 1;                // strips count, or blocks along x for grid
  int subdomains_y = 1;              // grid only
  int sources = 1;
  double source_depth = -1.0;  // default: 2% of ly
};

VelocityModel make_model(const ProblemSpec& spec);

/// Evenly spaced along a horizontal line, inset 5% from the sides; a single
/// source sits at mid-width.
std::vector<Point> source_line(const ProblemSpec& spec);

/// Everything a solver needs. Not copyable; the DOF map refers to the mesh.
class Problem {
 public:
  explicit Problem(const ProblemSpec& spec);
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  const ProblemSpec& spec() const { return spec_; }
  const VelocityModel& model() const { return model_; }
  const Mesh& mesh() const { return mesh_; }
  const WavenumberField& k() const { return k_; }
  const DofMap& dofs() const { return dofs_; }
  const Partition& partition() const { return partition_; }
  const OverlapPartition& overlap() const { return overlap_; }
  const CsrMatrix& a() const { return assembled_.a; }
  const CsrMatrix& mass() const { return assembled_.mass; }
  const MultiVector& sources() const { return assembled_.sources; }
  const std::vector<Point>& source_positions() const { return positions_; }

 private:
  ProblemSpec spec_;
  VelocityModel model_;
  Mesh mesh_;
  WavenumberField k_;
  DofMap dofs_;
  Partition partition_;
  OverlapPartition overlap_;
  std::vector<Point> positions_;
  AssembledProblem assembled_;
};

/// Predicted DOF count without building anything.
Index predicted_dofs(const ProblemSpec& spec);

}  // namespace ddlab
