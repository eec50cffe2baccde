#include "emac/space.hpp"

#include <algorithm>
#include <stdexcept>

#include "emac/basis.hpp"

namespace emac {

namespace {

struct AffineMap {
  Vec2 origin;
  Mat2 jacobian;      // columns p1 - p0, p2 - p0
  Mat2 inv_transpose;
  double det = 0.0;
};

AffineMap affine_map(const TriMesh& mesh, int c) {
  const auto& cell = mesh.cell(c);
  const Vec2 p0 = mesh.vertex(cell[0]);
  const Vec2 e1 = mesh.vertex(cell[1]) - p0;
  const Vec2 e2 = mesh.vertex(cell[2]) - p0;
  AffineMap m;
  m.origin = p0;
  m.jacobian = {e1.x, e2.x, e1.y, e2.y};
  m.det = e1.x * e2.y - e2.x * e1.y;
  const double inv = 1.0 / m.det;
  // (J^{-1})^T
  m.inv_transpose = {e2.y * inv, -e1.y * inv, -e2.x * inv, e1.x * inv};
  return m;
}

}  // namespace

TaylorHoodSpace::TaylorHoodSpace(std::shared_ptr<const TriMesh> mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw std::invalid_argument("TaylorHoodSpace: null mesh");
  const int nv = mesh_->num_vertices();
  n_nodes_ = nv + mesh_->num_edges();
  const int nc = mesh_->num_cells();
  cell_nodes_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const auto& v = mesh_->cell(c);
    const auto& e = mesh_->cell_edges(c);
    cell_nodes_[c] = {v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]};
  }
  system_quad_ = tabulate(quadrature_rule(system_quadrature_degree));

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(nc) * 144);
  for (int c = 0; c < nc; ++c) {
    const auto dofs = cell_vel_dofs(c);
    for (int i : dofs)
      for (int j : dofs) trip.push_back({i, j, 0.0});
  }
  vel_pattern_ = SparseMatrix::from_triplets(num_vel_dofs(), num_vel_dofs(), trip);
  vel_positions_.resize(static_cast<std::size_t>(nc) * 144);
  for (int c = 0; c < nc; ++c) {
    const auto dofs = cell_vel_dofs(c);
    for (int a = 0; a < 12; ++a)
      for (int b = 0; b < 12; ++b) vel_positions_[c * 144 + a * 12 + b] = vel_pattern_.find(dofs[a], dofs[b]);
  }

  trip.clear();
  for (int c = 0; c < nc; ++c) {
    const auto dofs = cell_vel_dofs(c);
    for (int i : cell_pr_dofs(c))
      for (int j : dofs) trip.push_back({i, j, 0.0});
  }
  div_pattern_ = SparseMatrix::from_triplets(num_pr_dofs(), num_vel_dofs(), trip);
  div_positions_.resize(static_cast<std::size_t>(nc) * 36);
  for (int c = 0; c < nc; ++c) {
    const auto dofs = cell_vel_dofs(c);
    const auto& pr = cell_pr_dofs(c);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 12; ++b) div_positions_[c * 36 + a * 12 + b] = div_pattern_.find(pr[a], dofs[b]);
  }
}

std::array<int, 12> TaylorHoodSpace::cell_vel_dofs(int c) const {
  std::array<int, 12> out{};
  const auto& nodes = cell_nodes_[c];
  for (int i = 0; i < 6; ++i) {
    out[i] = nodes[i];
    out[6 + i] = n_nodes_ + nodes[i];
  }
  return out;
}

Vec2 TaylorHoodSpace::node_coordinates(int node) const {
  const int nv = mesh_->num_vertices();
  return node < nv ? mesh_->vertex(node) : mesh_->edge_midpoint(node - nv);
}

bool TaylorHoodSpace::is_boundary_node(int node) const {
  const int nv = mesh_->num_vertices();
  return node < nv ? mesh_->is_boundary_vertex(node) : mesh_->is_boundary_edge(node - nv);
}

CellQuadrature TaylorHoodSpace::tabulate(const QuadratureRule& rule) const {
  CellQuadrature cq;
  cq.rule = rule;
  const std::size_t nq = rule.size();
  std::vector<std::array<Vec2, 6>> ref_grads(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const P2Values p2 = p2_basis_eval(rule.points[q]);
    cq.p2_values.push_back(p2.values);
    cq.p1_values.push_back(rule.points[q]);
    ref_grads[q] = p2.gradients;
  }
  const int nc = mesh_->num_cells();
  cq.p2_gradients.resize(static_cast<std::size_t>(nc) * nq * 6);
  cq.jxw.resize(static_cast<std::size_t>(nc) * nq);
  for (int c = 0; c < nc; ++c) {
    const AffineMap m = affine_map(*mesh_, c);
    if (!(m.det > 0.0)) throw std::invalid_argument("TaylorHoodSpace: cell with nonpositive area");
    for (std::size_t q = 0; q < nq; ++q) {
      cq.jxw[c * nq + q] = rule.weights[q] * m.det;
      for (int i = 0; i < 6; ++i) cq.p2_gradients[(c * nq + q) * 6 + i] = m.inv_transpose * ref_grads[q][i];
    }
  }
  return cq;
}

Vec2 TaylorHoodSpace::map_to_physical(int c, const std::array<double, 3>& l) const {
  const auto& cell = mesh_->cell(c);
  return l[0] * mesh_->vertex(cell[0]) + l[1] * mesh_->vertex(cell[1]) + l[2] * mesh_->vertex(cell[2]);
}

SpacePtr make_space(std::shared_ptr<const TriMesh> mesh) { return std::make_shared<const TaylorHoodSpace>(std::move(mesh)); }

FEFunction::FEFunction(SpacePtr space, FieldKind kind) : space_(std::move(space)), kind_(kind) {
  if (!space_) throw std::invalid_argument("FEFunction: null space");
  coeffs_.assign(kind_ == FieldKind::Velocity ? space_->num_vel_dofs() : space_->num_pr_dofs(), 0.0);
}

FEFunction::FEFunction(SpacePtr space, FieldKind kind, std::vector<double> coefficients)
    : space_(std::move(space)), kind_(kind), coeffs_(std::move(coefficients)) {
  if (!space_) throw std::invalid_argument("FEFunction: null space");
  const std::size_t expected = kind_ == FieldKind::Velocity ? space_->num_vel_dofs() : space_->num_pr_dofs();
  if (coeffs_.size() != expected) throw std::invalid_argument("FEFunction: coefficient length does not match space");
}

Vec2 FEFunction::velocity_at(int c, const std::array<double, 3>& l) const {
  if (kind_ != FieldKind::Velocity) throw std::invalid_argument("FEFunction::velocity_at: not a velocity field");
  const P2Values p2 = p2_basis_eval(l);
  const auto& nodes = space_->cell_nodes(c);
  const int off = space_->num_vel_nodes();
  Vec2 u;
  for (int i = 0; i < 6; ++i) {
    u.x += p2.values[i] * coeffs_[nodes[i]];
    u.y += p2.values[i] * coeffs_[off + nodes[i]];
  }
  return u;
}

double FEFunction::pressure_at(int c, const std::array<double, 3>& l) const {
  if (kind_ != FieldKind::Pressure) throw std::invalid_argument("FEFunction::pressure_at: not a pressure field");
  const auto& v = space_->cell_pr_dofs(c);
  return l[0] * coeffs_[v[0]] + l[1] * coeffs_[v[1]] + l[2] * coeffs_[v[2]];
}

FEFunction interpolate_velocity(const SpacePtr& space, const VelocityFunction& f) {
  FEFunction u(space, FieldKind::Velocity);
  auto c = u.coefficients();
  const int n = space->num_vel_nodes();
  for (int k = 0; k < n; ++k) {
    const Vec2 val = f(space->node_coordinates(k));
    c[k] = val.x;
    c[n + k] = val.y;
  }
  return u;
}

FEFunction interpolate_pressure(const SpacePtr& space, const ScalarFunction& f) {
  FEFunction p(space, FieldKind::Pressure);
  auto c = p.coefficients();
  for (int v = 0; v < space->num_pr_dofs(); ++v) c[v] = f(space->mesh().vertex(v));
  return p;
}

std::vector<int> boundary_dofs(const TriMesh& mesh, const TaylorHoodSpace& space) {
  if (&mesh != &space.mesh()) throw std::invalid_argument("boundary_dofs: space was not built on this mesh");
  std::vector<int> out;
  const int n = space.num_vel_nodes();
  for (int comp = 0; comp < 2; ++comp)
    for (int k = 0; k < n; ++k)
      if (space.is_boundary_node(k)) out.push_back(space.vel_dof(comp, k));
  return out;
}

std::vector<int> boundary_strip_dofs(const TaylorHoodSpace& space) {
  const TriMesh& mesh = space.mesh();
  std::vector<char> flag(space.num_vel_nodes(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& nodes = space.cell_nodes(c);
    const bool touches = std::any_of(nodes.begin(), nodes.end(), [&](int k) { return space.is_boundary_node(k); });
    if (touches)
      for (int k : nodes) flag[k] = 1;
  }
  std::vector<int> out;
  for (int comp = 0; comp < 2; ++comp)
    for (int k = 0; k < space.num_vel_nodes(); ++k)
      if (flag[k]) out.push_back(space.vel_dof(comp, k));
  return out;
}

namespace {

template <class LocalKernel>
SparseMatrix assemble_velocity_matrix(const TaylorHoodSpace& space, LocalKernel&& kernel) {
  SparseMatrix mat = SparseMatrix::zeros_like(space.velocity_pattern());
  auto vals = mat.values();
  const CellQuadrature& cq = space.system_quadrature();
  std::array<double, 144> local{};
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    local.fill(0.0);
    for (std::size_t q = 0; q < cq.num_points(); ++q) kernel(cq.p2_values[q], cq.gradients(c, q), cq.weight(c, q), local);
    const auto pos = space.cell_velocity_positions(c);
    for (int k = 0; k < 144; ++k) vals[pos[k]] += local[k];
  }
  return mat;
}

}  // namespace

SparseMatrix assemble_mass(const TaylorHoodSpace& space) {
  return assemble_velocity_matrix(space, [](const std::array<double, 6>& phi, const Vec2*, double w,
                                            std::array<double, 144>& local) {
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const double m = w * phi[i] * phi[j];
        local[i * 12 + j] += m;
        local[(6 + i) * 12 + 6 + j] += m;
      }
  });
}

SparseMatrix assemble_stiffness(const TaylorHoodSpace& space) {
  return assemble_velocity_matrix(space, [](const std::array<double, 6>&, const Vec2* g, double w,
                                            std::array<double, 144>& local) {
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const double k = w * dot(g[i], g[j]);
        local[i * 12 + j] += k;
        local[(6 + i) * 12 + 6 + j] += k;
      }
  });
}

SparseMatrix assemble_graddiv(const TaylorHoodSpace& space) {
  return assemble_velocity_matrix(space, [](const std::array<double, 6>&, const Vec2* g, double w,
                                            std::array<double, 144>& local) {
    // div(phi_j e_b) = d_b phi_j
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 6; ++i)
        for (int b = 0; b < 2; ++b)
          for (int j = 0; j < 6; ++j) {
            const double di = a == 0 ? g[i].x : g[i].y;
            const double dj = b == 0 ? g[j].x : g[j].y;
            local[(6 * a + i) * 12 + 6 * b + j] += w * di * dj;
          }
  });
}

SparseMatrix assemble_div(const TaylorHoodSpace& space) {
  SparseMatrix mat = SparseMatrix::zeros_like(space.divergence_pattern());
  auto vals = mat.values();
  const CellQuadrature& cq = space.system_quadrature();
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    std::array<double, 36> local{};
    for (std::size_t q = 0; q < cq.num_points(); ++q) {
      const Vec2* g = cq.gradients(c, q);
      const double w = cq.weight(c, q);
      for (int i = 0; i < 3; ++i) {
        const double psi = cq.p1_values[q][i];
        for (int j = 0; j < 6; ++j) {
          local[i * 12 + j] += w * psi * g[j].x;
          local[i * 12 + 6 + j] += w * psi * g[j].y;
        }
      }
    }
    const auto pos = space.cell_divergence_positions(c);
    for (int k = 0; k < 36; ++k) vals[pos[k]] += local[k];
  }
  return mat;
}

std::vector<double> assemble_pressure_mean(const TaylorHoodSpace& space) {
  std::vector<double> out(space.num_pr_dofs(), 0.0);
  const TriMesh& mesh = space.mesh();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double third = mesh.cell_area(c) / 3.0;
    for (int v : mesh.cell(c)) out[v] += third;
  }
  return out;
}

std::vector<double> assemble_load(const TaylorHoodSpace& space, const VelocityFunction& f) {
  std::vector<double> out(space.num_vel_dofs(), 0.0);
  const QuadratureRule rule = quadrature_rule(8);
  std::vector<P2Values> tab;
  for (const auto& p : rule.points) tab.push_back(p2_basis_eval(p));
  const int off = space.num_vel_nodes();
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const double det = 2.0 * space.mesh().cell_area(c);
    const auto& nodes = space.cell_nodes(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 fv = f(space.map_to_physical(c, rule.points[q]));
      const double w = rule.weights[q] * det;
      for (int i = 0; i < 6; ++i) {
        out[nodes[i]] += w * tab[q].values[i] * fv.x;
        out[off + nodes[i]] += w * tab[q].values[i] * fv.y;
      }
    }
  }
  return out;
}

}  // namespace emac
