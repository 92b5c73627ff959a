// SPDX-License-Identifier: Apache-2.0

#include "feec/mesh.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace feec
{

std::string to_string(CellKind kind)
{
  switch (kind) {
  case CellKind::Triangle:
    return "triangle";
  case CellKind::Quadrilateral:
    return "quadrilateral";
  case CellKind::Hexagon:
    return "hexagon";
  }
  throw Error("unknown cell kind");
}

CellKind cell_kind_from_string(const std::string &name)
{
  if (name == "triangle" || name == "tri")
    return CellKind::Triangle;
  if (name == "quadrilateral" || name == "quad")
    return CellKind::Quadrilateral;
  if (name == "hexagon" || name == "hex")
    return CellKind::Hexagon;
  throw Error("unknown cell kind '" + name + "'");
}

Mesh::Mesh(CellKind kind, double Lx, double Ly, std::vector<Vec2> vertices,
           std::vector<MeshEdge> edges, std::vector<MeshCell> cells)
  : kind_(kind), Lx_(Lx), Ly_(Ly), vertices_(std::move(vertices)), edges_(std::move(edges)),
    cells_(std::move(cells))
{
  if (!(Lx_ > 0.0) || !(Ly_ > 0.0))
    throw MeshError("periodic box lengths must be positive");
  const int V = num_vertices();
  for (int e = 0; e < num_edges(); ++e) {
    const auto &ed = edges_[e];
    if (ed.v0 < 0 || ed.v0 >= V || ed.v1 < 0 || ed.v1 >= V)
      throw MeshError("edge " + std::to_string(e) + " references a missing vertex");
  }

  edge_cells_.assign(edges_.size(), {std::pair{-1, -1}, std::pair{-1, -1}});
  cell_points_.resize(cells_.size());
  cell_areas_.resize(cells_.size());
  cell_centroids_.resize(cells_.size());

  for (int c = 0; c < num_cells(); ++c) {
    auto &cell = cells_[c];
    const std::size_t n = cell.edges.size();
    if (n < 3 || cell.signs.size() != n)
      throw MeshError("cell " + std::to_string(c) + " has a malformed edge loop");
    cell.verts.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const int e = cell.edges[k];
      if (e < 0 || e >= num_edges())
        throw MeshError("cell " + std::to_string(c) + " references a missing edge");
      if (cell.signs[k] != 1 && cell.signs[k] != -1)
        throw MeshError("cell " + std::to_string(c) + " has an invalid orientation sign");
      cell.verts[k] = cell.signs[k] > 0 ? edges_[e].v0 : edges_[e].v1;

      auto &slots = edge_cells_[e];
      if (slots[0].first < 0)
        slots[0] = {c, static_cast<int>(k)};
      else if (slots[1].first < 0)
        slots[1] = {c, static_cast<int>(k)};
      else
        throw MeshError("edge " + std::to_string(e) + " is shared by more than two cells");
    }

    auto &pts = cell_points_[c];
    pts.resize(n);
    pts[0] = vertices_[cell.verts[0]];
    for (std::size_t k = 0; k + 1 < n; ++k)
      pts[k + 1] = pts[k] + cell.signs[k] * edge_vector(cell.edges[k]);

    double a2 = 0.0;
    Vec2 cx = Vec2::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 &p = pts[k];
      const Vec2 &q = pts[(k + 1) % n];
      const double w = cross(p, q);
      a2 += w;
      cx += w * (p + q);
    }
    cell_areas_[c] = 0.5 * a2;
    cell_centroids_[c] = a2 != 0.0 ? Vec2(cx / (3.0 * a2)) : pts[0];
  }
  validate();
}

Vec2 Mesh::edge_vector(int e) const
{
  const auto &ed = edges_[e];
  return vertices_[ed.v1] + period(ed.shift) - vertices_[ed.v0];
}

int Mesh::left_cell(int e) const
{
  for (const auto &[c, k] : edge_cells_[e])
    if (cells_[c].signs[k] > 0)
      return c;
  throw MeshError("edge " + std::to_string(e) + " has no left cell");
}

int Mesh::right_cell(int e) const
{
  for (const auto &[c, k] : edge_cells_[e])
    if (cells_[c].signs[k] < 0)
      return c;
  throw MeshError("edge " + std::to_string(e) + " has no right cell");
}

void Mesh::set_sites(std::vector<Vec2> sites)
{
  if (static_cast<int>(sites.size()) != num_cells())
    throw MeshError("site count does not match cell count");
  sites_ = std::move(sites);
}

double Mesh::total_area() const
{
  double a = 0.0;
  for (double x : cell_areas_)
    a += x;
  return a;
}

void Mesh::validate() const
{
  const int V = num_vertices(), E = num_edges(), C = num_cells();
  if (V - E + C != 0)
    throw MeshError("Euler characteristic V - E + C = " + std::to_string(V - E + C) +
                    ", expected 0 for a torus");
  for (int e = 0; e < E; ++e) {
    const auto &s = edge_cells_[e];
    if (s[0].first < 0 || s[1].first < 0)
      throw MeshError("edge " + std::to_string(e) + " is not shared by two cells");
    const int s0 = cells_[s[0].first].signs[s[0].second];
    const int s1 = cells_[s[1].first].signs[s[1].second];
    if (s0 + s1 != 0)
      throw MeshError("edge " + std::to_string(e) + " has equal orientation in both cells");
    if (!(edge_length(e) > 0.0))
      throw MeshError("edge " + std::to_string(e) + " has zero length");
  }
  const double scale = std::max(Lx_, Ly_);
  for (int c = 0; c < C; ++c) {
    const auto &cell = cells_[c];
    Vec2 sum = Vec2::Zero();
    for (std::size_t k = 0; k < cell.edges.size(); ++k)
      sum += cell.signs[k] * edge_vector(cell.edges[k]);
    if (sum.norm() > 1e-10 * scale)
      throw MeshError("edge loop of cell " + std::to_string(c) + " does not close");
    for (std::size_t k = 0; k < cell.edges.size(); ++k) {
      const std::size_t n = cell.edges.size();
      if (cell.verts[(k + 1) % n] != (cell.signs[k] > 0 ? edges_[cell.edges[k]].v1
                                                         : edges_[cell.edges[k]].v0))
        throw MeshError("edge loop of cell " + std::to_string(c) + " is not connected");
    }
    if (!(cell_areas_[c] > 0.0))
      throw MeshError("cell " + std::to_string(c) + " is not counterclockwise");
  }
}

namespace
{

double wrap_coord(double x, double L)
{
  double r = x - L * std::floor(x / L);
  if (r >= L)
    r = 0.0;
  return r;
}

// Assembles a mesh from polygons whose corners are given as (vertex id, unwrapped
// position). Edges are created on first use and oriented from the lower vertex id to the
// higher one; wrap counts are recovered from the unwrapped positions.
class PolygonAssembler
{
public:
  PolygonAssembler(double Lx, double Ly, std::vector<Vec2> canonical)
    : Lx_(Lx), Ly_(Ly), verts_(std::move(canonical))
  {
  }

  void add_polygon(const std::vector<std::pair<int, Vec2>> &corners)
  {
    MeshCell cell;
    const std::size_t n = corners.size();
    for (std::size_t k = 0; k < n; ++k) {
      const auto &[a, pa] = corners[k];
      const auto &[b, pb] = corners[(k + 1) % n];
      const Wrap wa = wrap_of(a, pa), wb = wrap_of(b, pb);
      Wrap rel{wb[0] - wa[0], wb[1] - wa[1]};
      int sign = 1;
      int lo = a, hi = b;
      if (a > b || (a == b && (rel[0] < 0 || (rel[0] == 0 && rel[1] < 0)))) {
        std::swap(lo, hi);
        rel = {-rel[0], -rel[1]};
        sign = -1;
      }
      const auto key = std::make_tuple(lo, hi, rel[0], rel[1]);
      auto it = index_.find(key);
      int e;
      if (it == index_.end()) {
        e = static_cast<int>(edges_.size());
        edges_.push_back({lo, hi, rel});
        index_.emplace(key, e);
      } else {
        e = it->second;
      }
      cell.edges.push_back(e);
      cell.signs.push_back(sign);
    }
    cells_.push_back(std::move(cell));
  }

  Mesh finish(CellKind kind) &&
  {
    return Mesh(kind, Lx_, Ly_, std::move(verts_), std::move(edges_), std::move(cells_));
  }

private:
  Wrap wrap_of(int v, const Vec2 &p) const
  {
    const Vec2 d = p - verts_[v];
    return {static_cast<int>(std::lround(d.x() / Lx_)),
            static_cast<int>(std::lround(d.y() / Ly_))};
  }

  double Lx_, Ly_;
  std::vector<Vec2> verts_;
  std::vector<MeshEdge> edges_;
  std::vector<MeshCell> cells_;
  std::map<std::tuple<int, int, int, int>, int> index_;
};

Mesh build_triangulation(int nx, int ny, double Lx, double Ly, bool offset_rows)
{
  const double dx = Lx / nx, dy = Ly / ny;
  auto pos = [&](int i, int j) {
    const double shift = offset_rows ? 0.5 * (j % 2) * dx : 0.0;
    return Vec2(i * dx + shift, j * dy);
  };
  std::vector<Vec2> verts;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      verts.push_back(pos(i, j));

  PolygonAssembler pa(Lx, Ly, verts);
  auto node = [&](int i, int j) {
    // Row parity of the image row decides the offset, so evaluate positions with the
    // canonical row and translate by whole periods.
    const int ic = ((i % nx) + nx) % nx, jc = ((j % ny) + ny) % ny;
    const Vec2 p = pos(ic, jc) + Vec2((i - ic) * dx, (j - jc) * dy);
    return std::pair<int, Vec2>{jc * nx + ic, p};
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!offset_rows || j % 2 == 1) {
        pa.add_polygon({node(i, j), node(i + 1, j), node(i + 1, j + 1)});
        pa.add_polygon({node(i, j), node(i + 1, j + 1), node(i, j + 1)});
      } else {
        pa.add_polygon({node(i, j), node(i + 1, j), node(i, j + 1)});
        pa.add_polygon({node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)});
      }
    }
  }
  return std::move(pa).finish(CellKind::Triangle);
}

Mesh build_quads(int nx, int ny, double Lx, double Ly)
{
  const double dx = Lx / nx, dy = Ly / ny;
  std::vector<Vec2> verts;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      verts.emplace_back(i * dx, j * dy);
  PolygonAssembler pa(Lx, Ly, verts);
  auto node = [&](int i, int j) {
    return std::pair<int, Vec2>{(j % ny) * nx + (i % nx), Vec2(i * dx, j * dy)};
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      pa.add_polygon({node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)});
  return std::move(pa).finish(CellKind::Quadrilateral);
}

// Orientation of r relative to the directed line p -> q.
double orient(const Vec2 &p, const Vec2 &q, const Vec2 &r) { return cross(q - p, r - p); }

}  // namespace

Mesh build_periodic_mesh(CellKind kind, int nx, int ny, double Lx, double Ly)
{
  if (nx < 2 || ny < 2)
    throw MeshError("periodic meshes need nx >= 2 and ny >= 2");
  if (!(Lx > 0.0) || !(Ly > 0.0))
    throw MeshError("periodic box lengths must be positive");
  switch (kind) {
  case CellKind::Quadrilateral:
    return build_quads(nx, ny, Lx, Ly);
  case CellKind::Triangle:
    return build_triangulation(nx, ny, Lx, Ly, false);
  case CellKind::Hexagon: {
    if (ny % 2 != 0)
      throw MeshError("hexagonal tiling needs an even number of rows (ny)");
    // Hexagon centres sit on the vertices of an offset triangulation; the hexagons are
    // its dual cells, re-assembled with lexicographic edge orientation.
    const Mesh tri = build_triangulation(nx, ny, Lx, Ly, true);
    const Mesh dual = build_dual_mesh(tri);
    PolygonAssembler pa(Lx, Ly, dual.vertices());
    for (int c = 0; c < dual.num_cells(); ++c) {
      const auto &cell = dual.cell(c);
      const auto &pts = dual.cell_points(c);
      std::vector<std::pair<int, Vec2>> corners;
      for (std::size_t k = 0; k < pts.size(); ++k)
        corners.emplace_back(cell.verts[k], pts[k]);
      pa.add_polygon(corners);
    }
    return std::move(pa).finish(CellKind::Hexagon);
  }
  }
  throw MeshError("unknown cell kind");
}

Mesh build_dual_mesh(const Mesh &m)
{
  const double Lx = m.Lx(), Ly = m.Ly();
  const int C = m.num_cells(), E = m.num_edges(), V = m.num_vertices();

  // Dual vertices: canonical centroids, plus the offset from each cell frame.
  std::vector<Vec2> dverts(C), frame_offset(C);
  for (int c = 0; c < C; ++c) {
    const Vec2 &g = m.cell_centroid(c);
    dverts[c] = Vec2(wrap_coord(g.x(), Lx), wrap_coord(g.y(), Ly));
    frame_offset[c] = g - dverts[c];
  }

  auto edge_midpoint = [&](int c, int k) {
    const auto &pts = m.cell_points(c);
    const Vec2 &p = pts[k];
    const Vec2 &q = pts[(k + 1) % pts.size()];
    return Vec2(0.5 * (p + q));
  };
  auto slot_in = [&](int e, int c) {
    for (const auto &[cc, k] : m.edge_cells(e))
      if (cc == c && m.cell(cc).signs[k] == (c == m.left_cell(e) ? 1 : -1))
        return k;
    throw MeshError("inconsistent edge/cell adjacency at edge " + std::to_string(e));
  };

  std::vector<MeshEdge> dedges(E);
  for (int e = 0; e < E; ++e) {
    const int cl = m.left_cell(e), cr = m.right_cell(e);
    const int kl = slot_in(e, cl), kr = slot_in(e, cr);
    // Translation taking the right cell frame into the left cell frame.
    const Vec2 T = edge_midpoint(cl, kl) - edge_midpoint(cr, kr);
    const Vec2 gl = m.cell_centroid(cl);
    const Vec2 gr = m.cell_centroid(cr) + T;

    // The dual edge must cross its primal edge, otherwise the dual cells overlap.
    const auto &pl = m.cell_points(cl);
    const Vec2 a = pl[kl], b = pl[(kl + 1) % pl.size()];
    const double o1 = orient(a, b, gl), o2 = orient(a, b, gr);
    const double o3 = orient(gl, gr, a), o4 = orient(gl, gr, b);
    if (!(o1 > 0.0 && o2 < 0.0 && o3 * o4 < 0.0))
      throw MeshError("centroid dual self-intersects: dual edge " + std::to_string(e) +
                      " misses its primal edge (cells " + std::to_string(cl) + ", " +
                      std::to_string(cr) + ")");

    const Vec2 seen = gr - frame_offset[cl];
    const Vec2 d = seen - dverts[cr];
    dedges[e] = {cl, cr,
                 Wrap{static_cast<int>(std::lround(d.x() / Lx)),
                      static_cast<int>(std::lround(d.y() / Ly))}};
  }

  // Corners: for each primal vertex, one (cell, local index) occurrence.
  std::vector<std::pair<int, int>> first_corner(V, {-1, -1});
  std::vector<int> corner_count(V, 0);
  for (int c = 0; c < C; ++c) {
    const auto &cell = m.cell(c);
    for (std::size_t k = 0; k < cell.verts.size(); ++k) {
      const int v = cell.verts[k];
      if (first_corner[v].first < 0)
        first_corner[v] = {c, static_cast<int>(k)};
      ++corner_count[v];
    }
  }

  std::vector<MeshCell> dcells(V);
  std::vector<Vec2> sites(V);
  for (int v = 0; v < V; ++v) {
    if (first_corner[v].first < 0)
      throw MeshError("vertex " + std::to_string(v) + " belongs to no cell");
    auto [c, k] = first_corner[v];
    sites[v] = m.cell_points(c)[k] - frame_offset[c];
    MeshCell &dc = dcells[v];
    for (int step = 0; step < corner_count[v]; ++step) {
      const auto &cell = m.cell(c);
      const int n = static_cast<int>(cell.edges.size());
      const int kin = (k + n - 1) % n;
      const int e = cell.edges[kin];
      dc.edges.push_back(e);
      dc.signs.push_back(cell.signs[kin] > 0 ? 1 : -1);
      // Step across the incoming edge: in the neighbour it starts at v.
      const auto &slots = m.edge_cells(e);
      const auto &other = (slots[0].first == c && slots[0].second == kin) ? slots[1] : slots[0];
      c = other.first;
      k = other.second;
    }
    if (std::make_pair(c, k) != first_corner[v])
      throw MeshError("vertex " + std::to_string(v) + " has a non-manifold neighbourhood");
  }

  CellKind kind = CellKind::Quadrilateral;
  if (m.kind() == CellKind::Triangle)
    kind = CellKind::Hexagon;
  else if (m.kind() == CellKind::Hexagon)
    kind = CellKind::Triangle;

  Mesh dual(kind, Lx, Ly, std::move(dverts), std::move(dedges), std::move(dcells));
  // Sites were expressed relative to the canonical centroid of the first corner cell,
  // which is where the dual cell loop starts.
  dual.set_sites(std::move(sites));
  return dual;
}

IncidenceMatrices assemble_incidence(const Mesh &m)
{
  using IT = Eigen::Triplet<int>;
  std::vector<IT> t01, t12;
  t01.reserve(2 * m.num_edges());
  for (int e = 0; e < m.num_edges(); ++e) {
    t01.emplace_back(e, m.edge(e).v0, -1);
    t01.emplace_back(e, m.edge(e).v1, 1);
  }
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto &cell = m.cell(c);
    for (std::size_t k = 0; k < cell.edges.size(); ++k)
      t12.emplace_back(c, cell.edges[k], cell.signs[k]);
  }
  IncidenceMatrices inc;
  inc.d01.resize(m.num_edges(), m.num_vertices());
  inc.d01.setFromTriplets(t01.begin(), t01.end());
  inc.d12.resize(m.num_cells(), m.num_edges());
  inc.d12.setFromTriplets(t12.begin(), t12.end());
  return inc;
}

void write_mesh(std::ostream &os, const Mesh &m)
{
  const auto old_prec = os.precision(std::numeric_limits<double>::max_digits10);
  os << "MESH " << to_string(m.kind()) << ' ' << m.num_vertices() << ' ' << m.num_edges()
     << ' ' << m.num_cells() << ' ' << m.Lx() << ' ' << m.Ly() << '\n';
  for (const auto &p : m.vertices())
    os << "v " << p.x() << ' ' << p.y() << '\n';
  for (const auto &e : m.edges())
    os << "e " << e.v0 << ' ' << e.v1 << ' ' << e.shift[0] << ' ' << e.shift[1] << '\n';
  for (const auto &c : m.cells()) {
    os << 'c';
    for (std::size_t k = 0; k < c.edges.size(); ++k)
      os << ' ' << c.edges[k] << ' ' << c.signs[k];
    os << '\n';
  }
  os.precision(old_prec);
}

Mesh read_mesh(std::istream &is)
{
  std::string line;
  auto next_line = [&](const char *what) {
    while (std::getline(is, line))
      if (!line.empty() && line[0] != '#')
        return;
    throw MeshError(std::string("unexpected end of mesh file while reading ") + what);
  };

  next_line("header");
  std::istringstream hs(line);
  std::string tag, kind;
  int V = 0, E = 0, C = 0;
  double Lx = 0, Ly = 0;
  if (!(hs >> tag >> kind >> V >> E >> C >> Lx >> Ly) || tag != "MESH")
    throw MeshError("malformed mesh header: " + line);

  std::vector<Vec2> verts(V);
  for (int i = 0; i < V; ++i) {
    next_line("vertices");
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> tag >> x >> y) || tag != "v")
      throw MeshError("malformed vertex line: " + line);
    verts[i] = {x, y};
  }
  std::vector<MeshEdge> edges(E);
  for (int i = 0; i < E; ++i) {
    next_line("edges");
    std::istringstream ls(line);
    MeshEdge ed;
    if (!(ls >> tag >> ed.v0 >> ed.v1) || tag != "e")
      throw MeshError("malformed edge line: " + line);
    if (ed.v0 < 0 || ed.v0 >= V || ed.v1 < 0 || ed.v1 >= V)
      throw MeshError("edge line references a missing vertex: " + line);
    if (!(ls >> ed.shift[0] >> ed.shift[1])) {
      // No wrap counts given: take the minimum periodic image.
      const Vec2 d = verts[ed.v1] - verts[ed.v0];
      ed.shift = {static_cast<int>(-std::lround(d.x() / Lx)),
                  static_cast<int>(-std::lround(d.y() / Ly))};
    }
    edges[i] = ed;
  }
  std::vector<MeshCell> cells(C);
  for (int i = 0; i < C; ++i) {
    next_line("cells");
    std::istringstream ls(line);
    if (!(ls >> tag) || tag != "c")
      throw MeshError("malformed cell line: " + line);
    int e, s;
    while (ls >> e >> s) {
      cells[i].edges.push_back(e);
      cells[i].signs.push_back(s);
    }
  }
  return Mesh(cell_kind_from_string(kind), Lx, Ly, std::move(verts), std::move(edges),
              std::move(cells));
}

}  // namespace feec
