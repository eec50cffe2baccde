#include "emac/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace emac {

P2Values p2_basis_eval(const std::array<double, 3>& l) {
  constexpr double tol = 1e-12;
  if (l[0] < -tol || l[1] < -tol || l[2] < -tol || std::abs(l[0] + l[1] + l[2] - 1.0) > tol) {
    throw std::invalid_argument("p2_basis_eval: invalid barycentric coordinates");
  }
  const auto dl = p1_reference_gradients();
  P2Values out;
  for (int i = 0; i < 3; ++i) {
    out.values[i] = l[i] * (2.0 * l[i] - 1.0);
    out.gradients[i] = (4.0 * l[i] - 1.0) * dl[i];
  }
  for (int k = 0; k < 3; ++k) {
    const int a = k, b = (k + 1) % 3;
    out.values[3 + k] = 4.0 * l[a] * l[b];
    out.gradients[3 + k] = 4.0 * (l[b] * dl[a] + l[a] * dl[b]);
  }
  return out;
}

}  // namespace emac
