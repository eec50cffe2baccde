#include "emac/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "emac/errors.hpp"

namespace emac {

namespace {

void add_orbit3(QuadratureRule& rule, double a, double b, double w) {
  // Permutations of (a, b, b).
  rule.points.push_back({a, b, b});
  rule.points.push_back({b, a, b});
  rule.points.push_back({b, b, a});
  for (int k = 0; k < 3; ++k) rule.weights.push_back(w);
}

// Seven-point degree-5 rule (Radon); weights scaled to area 1/2.
QuadratureRule radon7() {
  QuadratureRule rule;
  const double s15 = std::sqrt(15.0);
  rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  rule.weights.push_back(0.5 * 9.0 / 40.0);
  const double b1 = (6.0 - s15) / 21.0;
  add_orbit3(rule, 1.0 - 2.0 * b1, b1, 0.5 * (155.0 - s15) / 1200.0);
  const double b2 = (6.0 + s15) / 21.0;
  add_orbit3(rule, 1.0 - 2.0 * b2, b2, 0.5 * (155.0 + s15) / 1200.0);
  rule.exactness_degree = 5;
  return rule;
}

// Collapsed (Duffy) product of Gauss-Legendre and Gauss-Jacobi(1, 0).
QuadratureRule collapsed_gauss(int degree) {
  const int n = (degree + 2) / 2;
  const GaussRule1D gl = gauss_jacobi(n, 0.0, 0.0);
  const GaussRule1D gj = gauss_jacobi(n, 1.0, 0.0);
  QuadratureRule rule;
  for (int j = 0; j < n; ++j) {
    const double t = 0.5 * (1.0 + gj.nodes[j]);
    for (int i = 0; i < n; ++i) {
      const double s = 0.5 * (1.0 + gl.nodes[i]);
      const double x = s * (1.0 - t);
      const double y = t;
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(0.125 * gl.weights[i] * gj.weights[j]);
    }
  }
  rule.exactness_degree = 2 * n - 1;
  return rule;
}

}  // namespace

GaussRule1D gauss_jacobi(int n, double alpha, double beta) {
  // Golub-Welsch on the Jacobi matrix of the three-term recurrence.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    jac(k, k) = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double t = 2.0 * m + ab;
      const double off = std::sqrt(4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (t * t * (t + 1.0) * (t - 1.0)));
      jac(k, k + 1) = off;
      jac(k + 1, k) = off;
    }
  }
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) / std::tgamma(ab + 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  GaussRule1D rule;
  for (int k = 0; k < n; ++k) {
    rule.nodes.push_back(eig.eigenvalues()(k));
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights.push_back(mu0 * v0 * v0);
  }
  return rule;
}

QuadratureRule quadrature_rule(int min_degree) {
  if (min_degree < 1 || min_degree > 10) {
    throw UnsupportedError("quadrature_rule: degree " + std::to_string(min_degree) + " not in 1..10");
  }
  if (min_degree == 1) {
    QuadratureRule rule;
    rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    rule.weights.push_back(0.5);
    rule.exactness_degree = 1;
    return rule;
  }
  if (min_degree == 2) {
    QuadratureRule rule;
    add_orbit3(rule, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0);
    rule.exactness_degree = 2;
    return rule;
  }
  if (min_degree <= 5) return radon7();
  return collapsed_gauss(min_degree);
}

}  // namespace emac
