// SPDX-License-Identifier: Apache-2.0

#include "ddlab/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace ddlab {

namespace {

std::pair<int, int> cell_counts(const ProblemSpec& spec, const VelocityModel& model) {
  if (spec.nx > 0 && spec.ny > 0) return {spec.nx, spec.ny};
  const double h = resolution_for(model, spec.frequency, spec.ppw, spec.order);
  return {std::max(1, static_cast<int>(std::ceil(spec.lx / h))), std::max(1, static_cast<int>(std::ceil(spec.ly / h)))};
}

Mesh make_mesh(const ProblemSpec& spec, const VelocityModel& model) {
  const auto [nx, ny] = cell_counts(spec, model);
  return generate_rect_mesh(nx, ny, spec.lx, spec.ly);
}

Partition make_partition(const ProblemSpec& spec, const Mesh& mesh) {
  if (spec.partition == "strips") return partition_strips(mesh, spec.subdomains, Axis::x);
  if (spec.partition == "grid") return partition_grid(mesh, spec.subdomains, spec.subdomains_y);
  throw std::invalid_argument("unknown partition kind '" + spec.partition + "'");
}

}  // namespace

VelocityModel make_model(const ProblemSpec& spec) {
  if (spec.model == "homogeneous") return VelocityModel::homogeneous(spec.velocity);
  if (spec.model == "two_layer") return VelocityModel::layered({0.4 * spec.ly}, {2000.0, 4000.0});
  if (spec.model == "mini_subduction") return VelocityModel::mini_subduction(spec.lx, spec.ly, spec.ly / 56.0);
  throw std::invalid_argument("unknown model '" + spec.model + "'");
}

std::vector<Point> source_line(const ProblemSpec& spec) {
  if (spec.sources < 1) throw std::invalid_argument("source_line: need at least one source");
  const double depth = spec.source_depth >= 0.0 ? spec.source_depth : 0.02 * spec.ly;
  if (depth > spec.ly) throw std::invalid_argument("source_line: source depth below the domain");
  std::vector<Point> out;
  if (spec.sources == 1) return {{0.5 * spec.lx, depth}};
  const double x0 = 0.05 * spec.lx, x1 = 0.95 * spec.lx;
  for (int s = 0; s < spec.sources; ++s) out.push_back({x0 + (x1 - x0) * s / (spec.sources - 1), depth});
  return out;
}

Problem::Problem(const ProblemSpec& spec)
    : spec_(spec),
      model_(make_model(spec)),
      mesh_(make_mesh(spec, model_)),
      k_(build_wavenumber(model_, mesh_, spec.frequency)),
      dofs_(build_dofmap(mesh_, spec.order)),
      partition_(make_partition(spec, mesh_)),
      overlap_(grow_overlap(mesh_, partition_)),
      positions_(source_line(spec)),
      assembled_(assemble_global(mesh_, dofs_, k_)) {
  assembled_.sources = assemble_point_sources(mesh_, dofs_, positions_);
}

Index predicted_dofs(const ProblemSpec& spec) {
  const auto [nx, ny] = cell_counts(spec, make_model(spec));
  const Index p = spec.order;
  return (p * nx + 1) * (p * ny + 1);
}

}  // namespace ddlab
