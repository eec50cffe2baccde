#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "emac/geometry.hpp"
#include "emac/mesh.hpp"
#include "emac/quadrature.hpp"
#include "emac/sparse.hpp"

namespace emac {

/// P2 basis tabulated on a quadrature rule, with physical gradients per cell.
struct CellQuadrature {
  QuadratureRule rule;
  std::vector<std::array<double, 6>> p2_values;  // [q][i]
  std::vector<std::array<double, 3>> p1_values;  // [q][i]
  std::vector<Vec2> p2_gradients;                // [(c * nq + q) * 6 + i]
  std::vector<double> jxw;                       // [c * nq + q]

  std::size_t num_points() const { return rule.size(); }
  const Vec2* gradients(int cell, std::size_t q) const { return &p2_gradients[(cell * num_points() + q) * 6]; }
  double weight(int cell, std::size_t q) const { return jxw[cell * num_points() + q]; }
};

/// Taylor-Hood (P2 velocity, P1 pressure) space on a triangulation.
///
/// Scalar P2 nodes are the mesh vertices (0..nv-1) followed by the edge
/// midpoints (nv + e). Velocity DOFs are component-blocked: node k carries
/// DOF k for the x-component and num_vel_nodes() + k for the y-component.
/// Pressure DOFs coincide with vertices.
class TaylorHoodSpace {
 public:
  static constexpr int system_quadrature_degree = 5;

  explicit TaylorHoodSpace(std::shared_ptr<const TriMesh> mesh);

  const TriMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }

  int num_vel_nodes() const { return n_nodes_; }
  int num_vel_dofs() const { return 2 * n_nodes_; }
  int num_pr_dofs() const { return mesh_->num_vertices(); }

  int vel_dof(int component, int node) const { return component * n_nodes_ + node; }
  /// Scalar P2 nodes of cell c in local basis order.
  const std::array<int, 6>& cell_nodes(int c) const { return cell_nodes_[c]; }
  /// 12 velocity DOFs of cell c: six x-components then six y-components.
  std::array<int, 12> cell_vel_dofs(int c) const;
  const std::array<int, 3>& cell_pr_dofs(int c) const { return mesh_->cell(c); }

  Vec2 node_coordinates(int node) const;
  bool is_boundary_node(int node) const;

  /// Degree-5 tabulation used for every system integral.
  const CellQuadrature& system_quadrature() const { return system_quad_; }
  /// Tabulation for an arbitrary rule (no caching).
  CellQuadrature tabulate(const QuadratureRule& rule) const;

  /// Maps a reference point of cell c to physical coordinates.
  Vec2 map_to_physical(int c, const std::array<double, 3>& barycentric) const;

  /// Velocity-velocity sparsity pattern (full 12x12 coupling per cell).
  const SparseMatrix& velocity_pattern() const { return vel_pattern_; }
  /// Storage positions of the cell's 12x12 block inside velocity_pattern(), row-major.
  std::span<const int> cell_velocity_positions(int c) const { return {&vel_positions_[c * 144], 144}; }
  /// Pressure-velocity sparsity pattern (3x12 coupling per cell).
  const SparseMatrix& divergence_pattern() const { return div_pattern_; }
  std::span<const int> cell_divergence_positions(int c) const { return {&div_positions_[c * 36], 36}; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  int n_nodes_ = 0;
  std::vector<std::array<int, 6>> cell_nodes_;
  CellQuadrature system_quad_;
  SparseMatrix vel_pattern_;
  std::vector<int> vel_positions_;
  SparseMatrix div_pattern_;
  std::vector<int> div_positions_;
};

using SpacePtr = std::shared_ptr<const TaylorHoodSpace>;

SpacePtr make_space(std::shared_ptr<const TriMesh> mesh);

enum class FieldKind { Velocity, Pressure };

/// Coefficient vector of a velocity or pressure field on a Taylor-Hood space.
class FEFunction {
 public:
  FEFunction(SpacePtr space, FieldKind kind);
  FEFunction(SpacePtr space, FieldKind kind, std::vector<double> coefficients);

  const TaylorHoodSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  FieldKind kind() const { return kind_; }

  std::span<const double> coefficients() const { return coeffs_; }
  std::span<double> coefficients() { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  /// Velocity value at a reference point of cell c.
  Vec2 velocity_at(int c, const std::array<double, 3>& barycentric) const;
  /// Pressure value at a reference point of cell c.
  double pressure_at(int c, const std::array<double, 3>& barycentric) const;

 private:
  SpacePtr space_;
  FieldKind kind_;
  std::vector<double> coeffs_;
};

using VelocityFunction = std::function<Vec2(const Vec2&)>;
using ScalarFunction = std::function<double(const Vec2&)>;

/// Nodal P2 interpolant of a velocity field.
FEFunction interpolate_velocity(const SpacePtr& space, const VelocityFunction& f);
/// Nodal P1 interpolant of a pressure field.
FEFunction interpolate_pressure(const SpacePtr& space, const ScalarFunction& f);

/// Sorted velocity DOFs (both components) of every node on the boundary.
std::vector<int> boundary_dofs(const TriMesh& mesh, const TaylorHoodSpace& space);

/// Velocity DOFs of every node belonging to a cell that touches the
/// boundary (the one-cell boundary strip), sorted.
std::vector<int> boundary_strip_dofs(const TaylorHoodSpace& space);

// Bilinear forms, all integrated with the degree-5 rule.

/// (u, v)
SparseMatrix assemble_mass(const TaylorHoodSpace& space);
/// (grad u, grad v), without viscosity.
SparseMatrix assemble_stiffness(const TaylorHoodSpace& space);
/// Rows: pressure DOFs, columns: velocity DOFs; entries (div phi_j, psi_i).
SparseMatrix assemble_div(const TaylorHoodSpace& space);
/// (div u, div v)
SparseMatrix assemble_graddiv(const TaylorHoodSpace& space);
/// Integrals of the pressure basis functions.
std::vector<double> assemble_pressure_mean(const TaylorHoodSpace& space);
/// (f, phi_i) with a degree-8 rule.
std::vector<double> assemble_load(const TaylorHoodSpace& space, const VelocityFunction& f);

}  // namespace emac
