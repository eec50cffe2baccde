#include "emac/mesh.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace emac {

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<Cell> cells, Rect bbox)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), bbox_(bbox) {
  const int nv = num_vertices();
  std::map<Edge, int> lookup;
  cell_edges_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      int a = cells_[c][k];
      int b = cells_[c][(k + 1) % 3];
      if (a < 0 || b < 0 || a >= nv || b >= nv) {
        throw std::invalid_argument("TriMesh: cell " + std::to_string(c) + " references a missing vertex");
      }
      Edge key{std::min(a, b), std::max(a, b)};
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back(key);
        edge_cells_.push_back(0);
      }
      cell_edges_[c][k] = it->second;
      ++edge_cells_[it->second];
    }
  }

  boundary_vertex_.assign(nv, 0);
  boundary_edge_.assign(edges_.size(), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_cells_[e] > 2) {
      throw std::invalid_argument("TriMesh: non-manifold edge " + std::to_string(e));
    }
    if (edge_cells_[e] == 1) {
      boundary_edge_[e] = 1;
      boundary_vertex_[edges_[e][0]] = 1;
      boundary_vertex_[edges_[e][1]] = 1;
    }
  }
}

Vec2 TriMesh::edge_midpoint(int e) const {
  const auto& [a, b] = edges_[e];
  return 0.5 * (vertices_[a] + vertices_[b]);
}

double TriMesh::cell_area(int c) const {
  const Vec2& p0 = vertices_[cells_[c][0]];
  const Vec2& p1 = vertices_[cells_[c][1]];
  const Vec2& p2 = vertices_[cells_[c][2]];
  return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

TriMesh build_uniform_tri_mesh(int nx, int ny, const Rect& rect) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("build_uniform_tri_mesh: nx and ny must be positive");
  }
  if (!(rect.xmax > rect.xmin) || !(rect.ymax > rect.ymin)) {
    throw std::invalid_argument("build_uniform_tri_mesh: degenerate rectangle");
  }
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    // Pin the last row/column exactly on the rectangle edges.
    const double y = (j == ny) ? rect.ymax : rect.ymin + rect.height() * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? rect.xmax : rect.xmin + rect.width() * i / nx;
      vertices.push_back({x, y});
    }
  }
  std::vector<TriMesh::Cell> cells;
  cells.reserve(2 * static_cast<std::size_t>(nx) * ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
      cells.push_back({ll, lr, ur});
      cells.push_back({ll, ur, ul});
    }
  }
  return TriMesh(std::move(vertices), std::move(cells), rect);
}

void write_vtk(const TriMesh& mesh, std::ostream& out) {
  out << "# vtk DataFile Version 3.0\n"
      << "emac triangulation\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  out.precision(17);
  for (const Vec2& p : mesh.vertices()) out << p.x << ' ' << p.y << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells()) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int c = 0; c < mesh.num_cells(); ++c) out << "5\n";
}

}  // namespace emac
