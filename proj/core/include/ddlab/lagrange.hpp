// SPDX-License-Identifier: Apache-2.0
//
// Lagrange bases of order 1..3 on triangles (equispaced barycentric
// lattice) and Gauss rules on segments and triangles.

#pragma once

#include <array>
#include <vector>

namespace ddlab {

struct QuadraturePoint {
  std::array<double, 3> barycentric;  // for segment rules only [0] and [1] are used
  double weight;                       // reference measure: triangle area 1/2, segment length 1
};

/// Gauss-Legendre nodes on [0,1], exact for degree 2n-1.
std::vector<QuadraturePoint> segment_rule(int degree);
/// Collapsed Gauss rule on the reference triangle, exact for the given degree.
std::vector<QuadraturePoint> triangle_rule(int degree);

/// Local node layout: vertices 0,1,2; (p-1) nodes on edges 0->1, 1->2, 2->0
/// in that direction; interior nodes last.
class LagrangeTriangle {
 public:
  explicit LagrangeTriangle(int order);

  int order() const { return order_; }
  int num_nodes() const { return static_cast<int>(lattice_.size()); }
  /// Barycentric multi-index (sums to order) of each local node.
  const std::vector<std::array<int, 3>>& lattice() const { return lattice_; }

  /// Basis values at barycentric coordinates.
  void eval(const std::array<double, 3>& lambda, double* values) const;
  /// Derivatives of every basis function with respect to lambda_0..2.
  void eval_dlambda(const std::array<double, 3>& lambda, std::array<double, 3>* grads) const;

 private:
  int order_;
  std::vector<std::array<int, 3>> lattice_;
};

/// 1D Lagrange basis on equispaced nodes t_k = k/p, k = 0..p.
void segment_basis(int order, double t, double* values, double* derivatives);

}  // namespace ddlab
