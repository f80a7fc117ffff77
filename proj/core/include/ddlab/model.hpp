// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddlab/mesh.hpp"

namespace ddlab {

/// P-wave velocity c(x) in m/s. Depth is the y coordinate.
class VelocityModel {
 public:
  enum class Kind { homogeneous, layered, gridded };

  static VelocityModel homogeneous(double c);
  /// `depth_breaks` ascending; layer k spans [breaks[k-1], breaks[k]).
  /// velocities.size() == depth_breaks.size() + 1.
  static VelocityModel layered(std::vector<double> depth_breaks, std::vector<double> velocities);
  /// Samples row-major: samples[iy * nx + ix] sits at (ix * spacing, iy * spacing).
  static VelocityModel gridded(int nx, int ny, double spacing, std::vector<double> samples);

  /// Synthetic subduction analog: water column over a sediment wedge, crust
  /// with a depth gradient and a dipping fast slab (1500 to 8500 m/s).
  static VelocityModel mini_subduction(double lx, double ly, double spacing);

  /// Reads the plain-text gridded format: "nx ny spacing" then nx*ny velocities.
  static VelocityModel read_gridded(std::istream& in);
  void write_gridded(std::ostream& out) const;

  Kind kind() const { return kind_; }
  double min_velocity() const;
  double max_velocity() const;

  /// 1/c at p; gridded models interpolate slowness bilinearly and clamp
  /// points outside the sampled extent.
  double sample_slowness(const Point& p) const;

  int grid_nx() const { return nx_; }
  int grid_ny() const { return ny_; }
  double grid_spacing() const { return spacing_; }
  const std::vector<double>& values() const { return values_; }

 private:
  Kind kind_ = Kind::homogeneous;
  std::vector<double> values_;
  std::vector<double> breaks_;
  int nx_ = 0;
  int ny_ = 0;
  double spacing_ = 0.0;
};

/// Nodal wavenumber k = 2 pi f / c at mesh vertices; linear inside triangles.
class WavenumberField {
 public:
  WavenumberField(double frequency, std::vector<double> slowness);

  double frequency() const { return frequency_; }
  double omega() const;
  const std::vector<double>& slowness() const { return slowness_; }
  double at_vertex(Vertex v) const;
  /// Linear interpolation with barycentric weights of the vertices of t.
  double at(const Mesh& mesh, Element t, const std::array<double, 3>& barycentric) const;

 private:
  double frequency_;
  std::vector<double> slowness_;
};

WavenumberField build_wavenumber(const VelocityModel& model, const Mesh& mesh, double frequency);

/// Cell size giving `ppw` points per shortest wavelength for elements of the
/// given polynomial order.
double resolution_for(const VelocityModel& model, double frequency, double ppw, int order);

}  // namespace ddlab
