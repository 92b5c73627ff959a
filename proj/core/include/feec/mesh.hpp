// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_MESH_HPP
#define FEEC_MESH_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "feec/common.hpp"

namespace feec
{

enum class CellKind
{
  Triangle,
  Quadrilateral,
  Hexagon
};

std::string to_string(CellKind kind);
CellKind cell_kind_from_string(const std::string &name);

// Integer wrap counts (sx, sy): a periodic image is offset by (sx * Lx, sy * Ly).
using Wrap = std::array<int, 2>;

struct MeshEdge
{
  int v0 = -1;
  int v1 = -1;
  // Image of v1 as seen from the canonical position of v0.
  Wrap shift{0, 0};
};

// A cell is a counterclockwise loop of edges. signs[k] = +1 when edge k is traversed
// from its v0 to its v1, -1 otherwise. verts[k] is the vertex at which edge k starts in
// the traversal, so verts[k + 1] is where it ends.
struct MeshCell
{
  std::vector<int> edges;
  std::vector<int> signs;
  std::vector<int> verts;
};

// Doubly-periodic planar cell complex. Geometry and topology are immutable after
// construction; periodic images are tracked with integer wrap offsets on the edges so
// that one global index exists per vertex/edge/cell equivalence class.
class Mesh
{
public:
  Mesh(CellKind kind, double Lx, double Ly, std::vector<Vec2> vertices,
       std::vector<MeshEdge> edges, std::vector<MeshCell> cells);

  CellKind kind() const { return kind_; }
  double Lx() const { return Lx_; }
  double Ly() const { return Ly_; }
  Vec2 period(const Wrap &w) const { return {w[0] * Lx_, w[1] * Ly_}; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  const Vec2 &vertex(int v) const { return vertices_[v]; }
  const std::vector<Vec2> &vertices() const { return vertices_; }
  const MeshEdge &edge(int e) const { return edges_[e]; }
  const std::vector<MeshEdge> &edges() const { return edges_; }
  const MeshCell &cell(int c) const { return cells_[c]; }
  const std::vector<MeshCell> &cells() const { return cells_; }

  // v1 - v0 including the periodic shift.
  Vec2 edge_vector(int e) const;
  double edge_length(int e) const { return edge_vector(e).norm(); }

  // Unwrapped polygon of cell c, starting at the canonical position of verts[0].
  const std::vector<Vec2> &cell_points(int c) const { return cell_points_[c]; }
  double cell_area(int c) const { return cell_areas_[c]; }
  // Area centroid in the frame of cell_points(c).
  const Vec2 &cell_centroid(int c) const { return cell_centroids_[c]; }

  // The (cell, local edge index) slots that reference edge e. Always two on valid meshes.
  const std::array<std::pair<int, int>, 2> &edge_cells(int e) const { return edge_cells_[e]; }
  // Cell on the left of the edge orientation (traverses it with sign +1).
  int left_cell(int e) const;
  int right_cell(int e) const;

  // For dual meshes: the primal vertex that cell c surrounds, in the frame of
  // cell_points(c). Empty for primal meshes.
  const std::optional<std::vector<Vec2>> &sites() const { return sites_; }
  void set_sites(std::vector<Vec2> sites);

  double total_area() const;

  // Throws MeshError describing the first violated invariant.
  void validate() const;

private:
  CellKind kind_;
  double Lx_;
  double Ly_;
  std::vector<Vec2> vertices_;
  std::vector<MeshEdge> edges_;
  std::vector<MeshCell> cells_;
  std::vector<std::vector<Vec2>> cell_points_;
  std::vector<double> cell_areas_;
  std::vector<Vec2> cell_centroids_;
  std::vector<std::array<std::pair<int, int>, 2>> edge_cells_;
  std::optional<std::vector<Vec2>> sites_;
};

struct IncidenceMatrices
{
  // Signed E x V edge-vertex incidence: -1 at v0, +1 at v1.
  IntSparseMatrix d01;
  // Signed C x E cell-edge incidence: the loop sign of each edge in the cell.
  IntSparseMatrix d12;
};

Mesh build_periodic_mesh(CellKind kind, int nx, int ny, double Lx, double Ly);

// Barycentric dual: one dual vertex per primal cell (at its centroid), one dual edge per
// primal edge (same index, crossing it from its left cell to its right cell), one dual
// cell per primal vertex (same index). Dual cells carry the primal vertex as their site.
Mesh build_dual_mesh(const Mesh &m);

IncidenceMatrices assemble_incidence(const Mesh &m);

// Plain-text exchange format:
//   MESH kind V E C Lx Ly
//   v x y            (V lines)
//   e v0 v1 sx sy    (E lines; sx sy are the periodic wrap counts of v1)
//   c e0 s0 e1 s1 ...(C lines)
void write_mesh(std::ostream &os, const Mesh &m);
Mesh read_mesh(std::istream &is);

}  // namespace feec

#endif  // FEEC_MESH_HPP
