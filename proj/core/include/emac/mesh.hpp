#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "emac/geometry.hpp"

namespace emac {

/// Conforming triangulation of a rectangle.
///
/// Cells are counterclockwise. Edges are stored with the smaller vertex index
/// first, and `cell_edges(c)` lists the edges (v0,v1), (v1,v2), (v2,v0) of
/// cell c in that order. Immutable after construction.
class TriMesh {
 public:
  using Cell = std::array<int, 3>;
  using Edge = std::array<int, 2>;

  TriMesh(std::vector<Vec2> vertices, std::vector<Cell> cells, Rect bbox);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const Cell& cell(int c) const { return cells_[c]; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::array<int, 3>& cell_edges(int c) const { return cell_edges_[c]; }

  std::span<const Vec2> vertices() const { return vertices_; }
  std::span<const Cell> cells() const { return cells_; }
  std::span<const Edge> edges() const { return edges_; }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  bool is_boundary_edge(int e) const { return boundary_edge_[e] != 0; }
  /// Number of cells sharing edge e (1 on the boundary, 2 inside).
  int edge_cell_count(int e) const { return edge_cells_[e]; }

  Vec2 edge_midpoint(int e) const;
  /// Signed area of cell c; positive for counterclockwise cells.
  double cell_area(int c) const;

  const Rect& bbox() const { return bbox_; }

 private:
  std::vector<Vec2> vertices_;
  std::vector<Cell> cells_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<std::uint8_t> boundary_vertex_;
  std::vector<std::uint8_t> boundary_edge_;
  std::vector<int> edge_cells_;
  Rect bbox_;
};

/// Uniform nx-by-ny grid of squares, each split along its lower-left to
/// upper-right diagonal. Vertices are numbered row-major from (xmin, ymin).
TriMesh build_uniform_tri_mesh(int nx, int ny, const Rect& rect);

/// Legacy ASCII VTK unstructured grid of the linear triangulation.
void write_vtk(const TriMesh& mesh, std::ostream& out);

}  // namespace emac
