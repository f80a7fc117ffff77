// SPDX-License-Identifier: Apache-2.0

#include "ddlab/lagrange.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ddlab {

namespace {

// Gauss-Legendre on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// lambda-polynomial L_a(lambda) = prod_{s<a} (p lambda - s)/(s+1) and its derivative.
void lattice_factor(int p, int a, double lambda, double& value, double& derivative) {
  value = 1.0;
  derivative = 0.0;
  for (int s = 0; s < a; ++s) {
    const double f = (p * lambda - s) / (s + 1.0);
    const double df = p / (s + 1.0);
    derivative = derivative * f + value * df;
    value *= f;
  }
}

}  // namespace

std::vector<QuadraturePoint> segment_rule(int degree) {
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  std::vector<QuadraturePoint> rule;
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * (x[i] + 1.0);
    rule.push_back({{1.0 - t, t, 0.0}, 0.5 * w[i]});
  }
  return rule;
}

std::vector<QuadraturePoint> triangle_rule(int degree) {
  // Duffy collapse of the unit square: the Jacobian (1-u) adds one degree in u.
  const int n = std::max(1, (degree + 3) / 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  std::vector<QuadraturePoint> rule;
  rule.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (x[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (x[j] + 1.0);
      const double xi = u;
      const double eta = (1.0 - u) * v;
      rule.push_back({{1.0 - xi - eta, xi, eta}, 0.25 * w[i] * w[j] * (1.0 - u)});
    }
  }
  return rule;
}

LagrangeTriangle::LagrangeTriangle(int order) : order_(order) {
  if (order < 1 || order > 3) throw std::invalid_argument("LagrangeTriangle: order must be 1, 2 or 3");
  const int p = order;
  lattice_.push_back({p, 0, 0});
  lattice_.push_back({0, p, 0});
  lattice_.push_back({0, 0, p});
  for (int k = 1; k < p; ++k) lattice_.push_back({p - k, k, 0});
  for (int k = 1; k < p; ++k) lattice_.push_back({0, p - k, k});
  for (int k = 1; k < p; ++k) lattice_.push_back({k, 0, p - k});
  for (int a = 1; a < p; ++a)
    for (int b = 1; a + b < p; ++b) lattice_.push_back({p - a - b, a, b});
}

void LagrangeTriangle::eval(const std::array<double, 3>& lambda, double* values) const {
  for (std::size_t n = 0; n < lattice_.size(); ++n) {
    double v = 1.0;
    for (int m = 0; m < 3; ++m) {
      double f, df;
      lattice_factor(order_, lattice_[n][m], lambda[m], f, df);
      v *= f;
    }
    values[n] = v;
  }
}

void LagrangeTriangle::eval_dlambda(const std::array<double, 3>& lambda, std::array<double, 3>* grads) const {
  for (std::size_t n = 0; n < lattice_.size(); ++n) {
    std::array<double, 3> f{}, df{};
    for (int m = 0; m < 3; ++m) lattice_factor(order_, lattice_[n][m], lambda[m], f[m], df[m]);
    grads[n] = {df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]};
  }
}

void segment_basis(int order, double t, double* values, double* derivatives) {
  for (int k = 0; k <= order; ++k) {
    const double tk = static_cast<double>(k) / order;
    double v = 1.0;
    double d = 0.0;
    for (int m = 0; m <= order; ++m) {
      if (m == k) continue;
      const double tm = static_cast<double>(m) / order;
      const double f = (t - tm) / (tk - tm);
      d = d * f + v / (tk - tm);
      v *= f;
    }
    values[k] = v;
    if (derivatives != nullptr) derivatives[k] = d;
  }
}

}  // namespace ddlab
