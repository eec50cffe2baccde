#pragma once

#include <array>

#include "emac/geometry.hpp"

namespace emac {

/// Quadratic Lagrange basis on the reference triangle.
///
/// Local node order: vertices 0, 1, 2, then the midpoints of edges
/// (0,1), (1,2), (2,0). Gradients are with respect to the reference
/// coordinates (x, y) = (lambda_1, lambda_2).
struct P2Values {
  std::array<double, 6> values{};
  std::array<Vec2, 6> gradients{};
};

/// Throws std::invalid_argument unless the coordinates are nonnegative and
/// sum to one within 1e-12.
P2Values p2_basis_eval(const std::array<double, 3>& barycentric);

/// Linear basis: values are the barycentric coordinates themselves.
inline std::array<Vec2, 3> p1_reference_gradients() { return {Vec2{-1.0, -1.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}}; }

}  // namespace emac
