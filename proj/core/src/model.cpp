// SPDX-License-Identifier: Apache-2.0

#include "ddlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace ddlab {

namespace {

void require_positive(const std::vector<double>& v, const char* what) {
  for (const double c : v)
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument(std::string(what) + ": velocities must be positive");
}

}  // namespace

VelocityModel VelocityModel::homogeneous(double c) {
  VelocityModel m;
  m.kind_ = Kind::homogeneous;
  m.values_ = {c};
  require_positive(m.values_, "homogeneous");
  return m;
}

VelocityModel VelocityModel::layered(std::vector<double> depth_breaks, std::vector<double> velocities) {
  if (velocities.size() != depth_breaks.size() + 1)
    throw std::invalid_argument("layered: need one more velocity than depth breaks");
  if (!std::is_sorted(depth_breaks.begin(), depth_breaks.end()))
    throw std::invalid_argument("layered: depth breaks must be ascending");
  VelocityModel m;
  m.kind_ = Kind::layered;
  m.breaks_ = std::move(depth_breaks);
  m.values_ = std::move(velocities);
  require_positive(m.values_, "layered");
  return m;
}

VelocityModel VelocityModel::gridded(int nx, int ny, double spacing, std::vector<double> samples) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("gridded: need at least one sample per direction");
  if (!(spacing > 0.0)) throw std::invalid_argument("gridded: spacing must be positive");
  if (samples.size() != static_cast<std::size_t>(nx) * ny)
    throw std::invalid_argument("gridded: sample count does not match nx*ny");
  VelocityModel m;
  m.kind_ = Kind::gridded;
  m.nx_ = nx;
  m.ny_ = ny;
  m.spacing_ = spacing;
  m.values_ = std::move(samples);
  require_positive(m.values_, "gridded");
  return m;
}

VelocityModel VelocityModel::mini_subduction(double lx, double ly, double spacing) {
  const int nx = static_cast<int>(std::ceil(lx / spacing)) + 1;
  const int ny = static_cast<int>(std::ceil(ly / spacing)) + 1;
  std::vector<double> v(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double x = std::min(ix * spacing, lx) / lx;  // 0..1 landward
      const double depth = std::min(iy * spacing, ly);
      // Sea floor shallows landward; sediments thin out; slab dips landward.
      const double seafloor = ly * (0.18 - 0.12 * x);
      const double sediment_base = seafloor + ly * (0.10 * (1.0 - x) + 0.03);
      const double slab_top = ly * (0.45 + 0.45 * x);
      double c;
      if (depth < seafloor) {
        c = 1500.0;
      } else if (depth < sediment_base) {
        c = 2000.0 + 1500.0 * (depth - seafloor) / (sediment_base - seafloor);
      } else if (depth < slab_top) {
        c = 4500.0 + 2500.0 * (depth - sediment_base) / std::max(slab_top - sediment_base, 1.0);
      } else {
        c = 8500.0;
      }
      v[static_cast<std::size_t>(iy) * nx + ix] = c;
    }
  }
  return gridded(nx, ny, spacing, std::move(v));
}

VelocityModel VelocityModel::read_gridded(std::istream& in) {
  int nx = 0, ny = 0;
  double spacing = 0.0;
  if (!(in >> nx >> ny >> spacing)) throw std::invalid_argument("read_gridded: malformed header");
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(std::max(0, nx)) * std::max(0, ny));
  double c;
  while (in >> c) samples.push_back(c);
  return gridded(nx, ny, spacing, std::move(samples));
}

void VelocityModel::write_gridded(std::ostream& out) const {
  if (kind_ != Kind::gridded) throw std::logic_error("write_gridded: model is not gridded");
  const auto old = out.precision(17);
  out << nx_ << ' ' << ny_ << ' ' << spacing_ << '\n';
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) out << (ix ? " " : "") << values_[static_cast<std::size_t>(iy) * nx_ + ix];
    out << '\n';
  }
  out.precision(old);
}

double VelocityModel::min_velocity() const { return *std::min_element(values_.begin(), values_.end()); }
double VelocityModel::max_velocity() const { return *std::max_element(values_.begin(), values_.end()); }

double VelocityModel::sample_slowness(const Point& p) const {
  switch (kind_) {
    case Kind::homogeneous:
      return 1.0 / values_.front();
    case Kind::layered: {
      const auto layer = std::upper_bound(breaks_.begin(), breaks_.end(), p.y) - breaks_.begin();
      return 1.0 / values_[static_cast<std::size_t>(layer)];
    }
    case Kind::gridded: {
      const double gx = std::clamp(p.x / spacing_, 0.0, static_cast<double>(nx_ - 1));
      const double gy = std::clamp(p.y / spacing_, 0.0, static_cast<double>(ny_ - 1));
      const int ix = std::min(static_cast<int>(gx), std::max(nx_ - 2, 0));
      const int iy = std::min(static_cast<int>(gy), std::max(ny_ - 2, 0));
      const double tx = nx_ > 1 ? gx - ix : 0.0;
      const double ty = ny_ > 1 ? gy - iy : 0.0;
      const auto s = [&](int i, int j) {
        i = std::min(i, nx_ - 1);
        j = std::min(j, ny_ - 1);
        return 1.0 / values_[static_cast<std::size_t>(j) * nx_ + i];
      };
      return (1 - tx) * (1 - ty) * s(ix, iy) + tx * (1 - ty) * s(ix + 1, iy) + (1 - tx) * ty * s(ix, iy + 1) +
             tx * ty * s(ix + 1, iy + 1);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

WavenumberField::WavenumberField(double frequency, std::vector<double> slowness)
    : frequency_(frequency), slowness_(std::move(slowness)) {
  if (!(frequency > 0.0)) throw std::invalid_argument("WavenumberField: frequency must be positive");
}

double WavenumberField::omega() const { return 2.0 * std::numbers::pi * frequency_; }

double WavenumberField::at_vertex(Vertex v) const { return omega() * slowness_[v]; }

double WavenumberField::at(const Mesh& mesh, Element t, const std::array<double, 3>& barycentric) const {
  const auto& tri = mesh.triangles()[t];
  return omega() * (barycentric[0] * slowness_[tri[0]] + barycentric[1] * slowness_[tri[1]] +
                    barycentric[2] * slowness_[tri[2]]);
}

WavenumberField build_wavenumber(const VelocityModel& model, const Mesh& mesh, double frequency) {
  std::vector<double> s(static_cast<std::size_t>(mesh.num_vertices()));
  for (Vertex v = 0; v < mesh.num_vertices(); ++v) s[v] = model.sample_slowness(mesh.vertices()[v]);
  return WavenumberField(frequency, std::move(s));
}

double resolution_for(const VelocityModel& model, double frequency, double ppw, int order) {
  if (!(frequency > 0.0)) throw std::invalid_argument("resolution_for: frequency must be positive");
  if (!(ppw >= 2.0)) throw std::invalid_argument("resolution_for: need at least 2 points per wavelength");
  if (order < 1 || order > 3) throw std::invalid_argument("resolution_for: order must be 1, 2 or 3");
  return model.min_velocity() / (frequency * ppw) * order;
}

}  // namespace ddlab
