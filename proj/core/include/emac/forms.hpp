#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emac/space.hpp"
#include "emac/sparse.hpp"

namespace emac {

/// Discrete form of the convective term.
///   Emac: 2 D(u) u + (div u) u
///   Conv: (u . grad) u
///   Skew: (u . grad) u + 1/2 (div u) u
///   Cons: (u . grad) u + (div u) u
///   Rot:  (curl u) x u
enum class Formulation { Emac, Conv, Skew, Cons, Rot };

std::string_view to_string(Formulation form);
/// Accepts the lowercase names emac, conv, skew, cons, rot.
std::optional<Formulation> parse_formulation(std::string_view name);

/// b(u, v, w) = ((u . grad) v, w).
double trilinear_b(const FEFunction& u, const FEFunction& v, const FEFunction& w);
/// ((div u) v, w)
double div_product(const FEFunction& u, const FEFunction& v, const FEFunction& w);
/// (D(u) v, w), D the symmetric gradient.
double deformation_product(const FEFunction& u, const FEFunction& v, const FEFunction& w);

/// Entries (NL(u), phi_i) for every velocity basis function.
std::vector<double> nl_residual(Formulation form, const FEFunction& u);

/// Gateaux derivative of nl_residual at u_lin, assembled exactly.
SparseMatrix nl_jacobian(Formulation form, const FEFunction& u_lin);

/// (L w)_i = b(phi_i, w, u*) - b(w, phi_i, u*); antisymmetric.
SparseMatrix skew_linearized_matrix(const FEFunction& u_star);

/// Entries (2 D(u*) u* + (div u*) u*, phi_i): the known part of the
/// Newton-linearized EMAC term, moved to the right-hand side.
std::vector<double> emac_newton_rhs_correction(const FEFunction& u_star);

/// C(u)_ij = b(u, phi_j, phi_i), so b(u, v, w) = w^T C(u) v.
SparseMatrix convection_matrix(const FEFunction& u);
/// T(v)_ij = ((grad v)^T phi_j, phi_i), so ((grad v)^T w, u) = u^T T(v) w.
SparseMatrix grad_transpose_matrix(const FEFunction& v);

}  // namespace emac
