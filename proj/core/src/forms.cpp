#include "emac/forms.hpp"

#include <array>
#include <stdexcept>

namespace emac {

namespace {

struct PointValue {
  Vec2 value;
  Mat2 grad;  // grad(a, b) = d u_a / d x_b
};

PointValue eval_point(std::span<const double> coeffs, const std::array<int, 6>& nodes, int off,
                      const std::array<double, 6>& phi, const Vec2* g) {
  PointValue pv;
  for (int i = 0; i < 6; ++i) {
    const double cx = coeffs[nodes[i]];
    const double cy = coeffs[off + nodes[i]];
    pv.value.x += phi[i] * cx;
    pv.value.y += phi[i] * cy;
    pv.grad.xx += cx * g[i].x;
    pv.grad.xy += cx * g[i].y;
    pv.grad.yx += cy * g[i].x;
    pv.grad.yy += cy * g[i].y;
  }
  return pv;
}

// Basis function phi_i e_comp: value and gradient.
PointValue basis_point(int comp, double phi, const Vec2& g) {
  PointValue pv;
  if (comp == 0) {
    pv.value.x = phi;
    pv.grad.xx = g.x;
    pv.grad.xy = g.y;
  } else {
    pv.value.y = phi;
    pv.grad.yx = g.x;
    pv.grad.yy = g.y;
  }
  return pv;
}

Vec2 cross_z(double omega, const Vec2& u) { return {-omega * u.y, omega * u.x}; }
double curl(const Mat2& g) { return g.yx - g.xy; }

Vec2 nl_point(Formulation form, const PointValue& u) {
  const Vec2 conv = u.grad * u.value;
  const double div = u.grad.trace();
  switch (form) {
    case Formulation::Emac: return (u.grad + u.grad.transposed()) * u.value + div * u.value;
    case Formulation::Conv: return conv;
    case Formulation::Skew: return conv + 0.5 * div * u.value;
    case Formulation::Cons: return conv + div * u.value;
    case Formulation::Rot: return cross_z(curl(u.grad), u.value);
  }
  throw std::invalid_argument("nl_residual: unknown formulation");
}

// Directional derivative of nl_point at u in direction w.
Vec2 dnl_point(Formulation form, const PointValue& u, const PointValue& w) {
  const double du = u.grad.trace();
  const double dw = w.grad.trace();
  const Vec2 conv = w.grad * u.value + u.grad * w.value;
  switch (form) {
    case Formulation::Emac:
      return (w.grad + w.grad.transposed()) * u.value + (u.grad + u.grad.transposed()) * w.value + dw * u.value +
             du * w.value;
    case Formulation::Conv: return conv;
    case Formulation::Skew: return conv + 0.5 * (dw * u.value + du * w.value);
    case Formulation::Cons: return conv + dw * u.value + du * w.value;
    case Formulation::Rot: return cross_z(curl(w.grad), u.value) + cross_z(curl(u.grad), w.value);
  }
  throw std::invalid_argument("nl_jacobian: unknown formulation");
}

void require_velocity(const FEFunction& u, const char* who) {
  if (u.kind() != FieldKind::Velocity) throw std::invalid_argument(std::string(who) + ": expected a velocity field");
}

void require_same_space(const FEFunction& a, const FEFunction& b, const char* who) {
  if (&a.space() != &b.space()) throw std::invalid_argument(std::string(who) + ": functions live on different spaces");
}

void require_known(Formulation form, const char* who) {
  if (to_string(form) == "unknown") throw std::invalid_argument(std::string(who) + ": unknown formulation");
}

// Integrates a pointwise scalar built from three velocity fields.
template <class Integrand>
double integrate3(const FEFunction& u, const FEFunction& v, const FEFunction& w, const char* who, Integrand&& f) {
  require_velocity(u, who);
  require_velocity(v, who);
  require_velocity(w, who);
  require_same_space(u, v, who);
  require_same_space(u, w, who);
  const TaylorHoodSpace& space = u.space();
  const CellQuadrature& cq = space.system_quadrature();
  const int off = space.num_vel_nodes();
  double sum = 0.0;
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const auto& nodes = space.cell_nodes(c);
    for (std::size_t q = 0; q < cq.num_points(); ++q) {
      const Vec2* g = cq.gradients(c, q);
      const PointValue pu = eval_point(u.coefficients(), nodes, off, cq.p2_values[q], g);
      const PointValue pv = eval_point(v.coefficients(), nodes, off, cq.p2_values[q], g);
      const PointValue pw = eval_point(w.coefficients(), nodes, off, cq.p2_values[q], g);
      sum += cq.weight(c, q) * f(pu, pv, pw);
    }
  }
  return sum;
}

// Assembles M_ij = sum_q w_q * kernel(state_at_q, test_i, trial_j).
template <class Kernel>
SparseMatrix assemble_with_state(const FEFunction& state, Kernel&& kernel) {
  const TaylorHoodSpace& space = state.space();
  SparseMatrix mat = SparseMatrix::zeros_like(space.velocity_pattern());
  auto vals = mat.values();
  const CellQuadrature& cq = space.system_quadrature();
  const int off = space.num_vel_nodes();
  std::array<double, 144> local{};
  std::array<PointValue, 12> basis{};
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    local.fill(0.0);
    const auto& nodes = space.cell_nodes(c);
    for (std::size_t q = 0; q < cq.num_points(); ++q) {
      const Vec2* g = cq.gradients(c, q);
      const double wq = cq.weight(c, q);
      const PointValue s = eval_point(state.coefficients(), nodes, off, cq.p2_values[q], g);
      for (int k = 0; k < 12; ++k) basis[k] = basis_point(k / 6, cq.p2_values[q][k % 6], g[k % 6]);
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) local[i * 12 + j] += wq * kernel(s, basis[i], basis[j]);
    }
    const auto pos = space.cell_velocity_positions(c);
    for (int k = 0; k < 144; ++k) vals[pos[k]] += local[k];
  }
  return mat;
}

}  // namespace

std::string_view to_string(Formulation form) {
  switch (form) {
    case Formulation::Emac: return "emac";
    case Formulation::Conv: return "conv";
    case Formulation::Skew: return "skew";
    case Formulation::Cons: return "cons";
    case Formulation::Rot: return "rot";
  }
  return "unknown";
}

std::optional<Formulation> parse_formulation(std::string_view name) {
  for (Formulation f : {Formulation::Emac, Formulation::Conv, Formulation::Skew, Formulation::Cons, Formulation::Rot}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

double trilinear_b(const FEFunction& u, const FEFunction& v, const FEFunction& w) {
  return integrate3(u, v, w, "trilinear_b",
                    [](const PointValue& pu, const PointValue& pv, const PointValue& pw) {
                      return dot(pv.grad * pu.value, pw.value);
                    });
}

double div_product(const FEFunction& u, const FEFunction& v, const FEFunction& w) {
  return integrate3(u, v, w, "div_product", [](const PointValue& pu, const PointValue& pv, const PointValue& pw) {
    return pu.grad.trace() * dot(pv.value, pw.value);
  });
}

double deformation_product(const FEFunction& u, const FEFunction& v, const FEFunction& w) {
  return integrate3(u, v, w, "deformation_product",
                    [](const PointValue& pu, const PointValue& pv, const PointValue& pw) {
                      return 0.5 * dot((pu.grad + pu.grad.transposed()) * pv.value, pw.value);
                    });
}

std::vector<double> nl_residual(Formulation form, const FEFunction& u) {
  require_velocity(u, "nl_residual");
  require_known(form, "nl_residual");
  const TaylorHoodSpace& space = u.space();
  std::vector<double> out(space.num_vel_dofs(), 0.0);
  const CellQuadrature& cq = space.system_quadrature();
  const int off = space.num_vel_nodes();
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const auto& nodes = space.cell_nodes(c);
    std::array<double, 12> local{};
    for (std::size_t q = 0; q < cq.num_points(); ++q) {
      const Vec2* g = cq.gradients(c, q);
      const auto& phi = cq.p2_values[q];
      const Vec2 n = cq.weight(c, q) * nl_point(form, eval_point(u.coefficients(), nodes, off, phi, g));
      for (int i = 0; i < 6; ++i) {
        local[i] += phi[i] * n.x;
        local[6 + i] += phi[i] * n.y;
      }
    }
    for (int i = 0; i < 6; ++i) {
      out[nodes[i]] += local[i];
      out[off + nodes[i]] += local[6 + i];
    }
  }
  return out;
}

SparseMatrix nl_jacobian(Formulation form, const FEFunction& u_lin) {
  require_velocity(u_lin, "nl_jacobian");
  require_known(form, "nl_jacobian");
  return assemble_with_state(u_lin, [form](const PointValue& s, const PointValue& test, const PointValue& trial) {
    return dot(dnl_point(form, s, trial), test.value);
  });
}

SparseMatrix skew_linearized_matrix(const FEFunction& u_star) {
  require_velocity(u_star, "skew_linearized_matrix");
  return assemble_with_state(u_star, [](const PointValue& s, const PointValue& test, const PointValue& trial) {
    // b(phi_i, w, u*) - b(w, phi_i, u*)
    return dot(trial.grad * test.value, s.value) - dot(test.grad * trial.value, s.value);
  });
}

std::vector<double> emac_newton_rhs_correction(const FEFunction& u_star) {
  return nl_residual(Formulation::Emac, u_star);
}

SparseMatrix convection_matrix(const FEFunction& u) {
  require_velocity(u, "convection_matrix");
  return assemble_with_state(u, [](const PointValue& s, const PointValue& test, const PointValue& trial) {
    return dot(trial.grad * s.value, test.value);
  });
}

SparseMatrix grad_transpose_matrix(const FEFunction& v) {
  require_velocity(v, "grad_transpose_matrix");
  return assemble_with_state(v, [](const PointValue& s, const PointValue& test, const PointValue& trial) {
    return dot(s.grad.transposed() * trial.value, test.value);
  });
}

}  // namespace emac
