#pragma once

#include <array>
#include <vector>

namespace emac {

/// Quadrature on the reference triangle {(x, y) : x, y >= 0, x + y <= 1}.
/// Points are barycentric (1 - x - y, x, y); weights sum to 1/2.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Cheapest available rule with positive weights that integrates every
/// polynomial of total degree <= min_degree exactly. Supports 1..10;
/// anything else throws UnsupportedError.
QuadratureRule quadrature_rule(int min_degree);

/// Gauss points and weights on [-1, 1] for the weight (1 - x)^alpha (1 + x)^beta.
struct GaussRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule1D gauss_jacobi(int n, double alpha, double beta);

}  // namespace emac
