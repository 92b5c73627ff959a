// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "doctest.h"
#include "feec/mesh.hpp"

using namespace feec;

namespace
{

// Integer product of the two incidence matrices, computed densely.
bool incidence_product_vanishes(const IncidenceMatrices &inc)
{
  Eigen::MatrixXi a = Eigen::MatrixXi(inc.d12) * Eigen::MatrixXi(inc.d01);
  return a.cwiseAbs().maxCoeff() == 0;
}

}  // namespace

TEST_CASE("structured mesh counts")
{
  SUBCASE("quadrilateral")
  {
    Mesh m = build_periodic_mesh(CellKind::Quadrilateral, 4, 4, 1.0, 1.0);
    CHECK(m.num_vertices() == 16);
    CHECK(m.num_edges() == 32);
    CHECK(m.num_cells() == 16);
  }
  SUBCASE("triangle")
  {
    Mesh m = build_periodic_mesh(CellKind::Triangle, 4, 4, 1.0, 1.0);
    CHECK(m.num_vertices() == 16);
    CHECK(m.num_edges() == 48);
    CHECK(m.num_cells() == 32);
  }
  SUBCASE("hexagon")
  {
    // Every hexagon corner is shared by three hexagons and every side by two.
    Mesh m = build_periodic_mesh(CellKind::Hexagon, 4, 4, 1.0, 1.0);
    const int C = m.num_cells();
    CHECK(C == 16);
    CHECK(m.num_vertices() == 6 * C / 3);
    CHECK(m.num_edges() == 6 * C / 2);
    for (int c = 0; c < C; ++c)
      CHECK(m.cell(c).edges.size() == 6);
  }
}

TEST_CASE("mesh invariants across a sweep")
{
  for (CellKind kind : {CellKind::Triangle, CellKind::Quadrilateral, CellKind::Hexagon}) {
    for (int nx : {2, 3, 5, 8}) {
      for (int ny : {2, 4, 6}) {
        CAPTURE(to_string(kind));
        CAPTURE(nx);
        CAPTURE(ny);
        const double Lx = 2.5, Ly = 1.75;
        Mesh m = build_periodic_mesh(kind, nx, ny, Lx, Ly);
        CHECK(m.num_vertices() - m.num_edges() + m.num_cells() == 0);
        CHECK(m.total_area() == doctest::Approx(Lx * Ly).epsilon(1e-12));
        for (int e = 0; e < m.num_edges(); ++e)
          CHECK(m.edge(e).v0 <= m.edge(e).v1);
        IncidenceMatrices inc = assemble_incidence(m);
        CHECK(incidence_product_vanishes(inc));
        for (int e = 0; e < m.num_edges(); ++e) {
          int plus = 0, minus = 0;
          for (IntSparseMatrix::InnerIterator it(inc.d12, e); it; ++it)
            (it.value() > 0 ? plus : minus) += std::abs(it.value());
          CHECK(plus == 1);
          CHECK(minus == 1);
        }

        Mesh d = build_dual_mesh(m);
        CHECK(d.num_edges() == m.num_edges());
        CHECK(d.num_vertices() == m.num_cells());
        CHECK(d.num_cells() == m.num_vertices());
        CHECK(d.total_area() == doctest::Approx(Lx * Ly).epsilon(1e-12));
        REQUIRE(d.sites().has_value());
        CHECK(incidence_product_vanishes(assemble_incidence(d)));

        Mesh dd = build_dual_mesh(d);
        CHECK(dd.num_vertices() == m.num_vertices());
        CHECK(dd.num_edges() == m.num_edges());
        CHECK(dd.num_cells() == m.num_cells());
      }
    }
  }
}

TEST_CASE("incidence row structure")
{
  Mesh q = build_periodic_mesh(CellKind::Quadrilateral, 2, 2, 1.0, 1.0);
  IncidenceMatrices iq = assemble_incidence(q);
  Eigen::MatrixXi dense(iq.d12);
  for (int c = 0; c < q.num_cells(); ++c)
    CHECK(dense.row(c).cwiseAbs().sum() == 4);

  Mesh t = build_periodic_mesh(CellKind::Triangle, 3, 3, 1.0, 1.0);
  Eigen::MatrixXi dt(assemble_incidence(t).d12);
  for (int c = 0; c < t.num_cells(); ++c)
    CHECK(dt.row(c).cwiseAbs().sum() == 3);

  Eigen::MatrixXi d01(iq.d01);
  for (int e = 0; e < q.num_edges(); ++e) {
    CHECK(d01.row(e).sum() == 0);
    CHECK(d01.row(e).cwiseAbs().sum() == 2);
  }
}

TEST_CASE("dual of a quadrilateral mesh is the half-cell shifted grid")
{
  Mesh m = build_periodic_mesh(CellKind::Quadrilateral, 4, 4, 1.0, 1.0);
  Mesh d = build_dual_mesh(m);
  CHECK(d.kind() == CellKind::Quadrilateral);
  for (int c = 0; c < d.num_cells(); ++c) {
    CHECK(d.cell_area(c) == doctest::Approx(1.0 / 16));
    CHECK(d.cell(c).edges.size() == 4);
    // The site is the primal vertex, which is the centre of the shifted cell.
    const Vec2 off = d.sites()->at(c) - d.cell_centroid(c);
    CHECK(off.norm() < 1e-14);
  }
  for (int v = 0; v < d.num_vertices(); ++v) {
    const double fx = d.vertex(v).x() * 4 - 0.5, fy = d.vertex(v).y() * 4 - 0.5;
    CHECK(std::abs(fx - std::round(fx)) < 1e-12);
    CHECK(std::abs(fy - std::round(fy)) < 1e-12);
  }
}

TEST_CASE("dual edges cross their primal edge from left to right")
{
  for (CellKind kind : {CellKind::Triangle, CellKind::Quadrilateral, CellKind::Hexagon}) {
    Mesh m = build_periodic_mesh(kind, 4, 4, 1.0, 1.0);
    Mesh d = build_dual_mesh(m);
    for (int e = 0; e < m.num_edges(); ++e) {
      // Right normal of the primal edge points along the dual edge.
      const Vec2 t = m.edge_vector(e);
      const Vec2 n(t.y(), -t.x());
      CHECK(n.dot(d.edge_vector(e)) > 0.0);
      CHECK(d.edge(e).v0 == m.left_cell(e));
      CHECK(d.edge(e).v1 == m.right_cell(e));
    }
  }
}

TEST_CASE("hexagonal dual is a triangulation")
{
  Mesh h = build_periodic_mesh(CellKind::Hexagon, 4, 4, 1.0, 1.0);
  Mesh d = build_dual_mesh(h);
  CHECK(d.kind() == CellKind::Triangle);
  CHECK(d.num_vertices() == 16);
  CHECK(d.num_edges() == 48);
  CHECK(d.num_cells() == 32);
}

TEST_CASE("mesh text round trip is exact")
{
  for (CellKind kind : {CellKind::Triangle, CellKind::Quadrilateral, CellKind::Hexagon}) {
    Mesh m = build_periodic_mesh(kind, 4, 6, 1.3, 0.7);
    std::stringstream ss;
    write_mesh(ss, m);
    Mesh r = read_mesh(ss);
    std::stringstream again;
    write_mesh(again, r);
    std::stringstream first;
    write_mesh(first, m);
    CHECK(first.str() == again.str());
    CHECK(r.kind() == m.kind());
    for (int v = 0; v < m.num_vertices(); ++v)
      CHECK(r.vertex(v) == m.vertex(v));
  }
}

TEST_CASE("import without wrap counts uses the minimum image")
{
  Mesh m = build_periodic_mesh(CellKind::Quadrilateral, 4, 4, 1.0, 1.0);
  std::stringstream ss;
  ss << "MESH quadrilateral 16 32 16 1 1\n";
  for (const auto &p : m.vertices())
    ss << "v " << p.x() << ' ' << p.y() << '\n';
  for (const auto &e : m.edges())
    ss << "e " << e.v0 << ' ' << e.v1 << '\n';
  for (const auto &c : m.cells()) {
    ss << 'c';
    for (std::size_t k = 0; k < c.edges.size(); ++k)
      ss << ' ' << c.edges[k] << ' ' << c.signs[k];
    ss << '\n';
  }
  Mesh r = read_mesh(ss);
  for (int e = 0; e < m.num_edges(); ++e)
    CHECK((r.edge_vector(e) - m.edge_vector(e)).norm() < 1e-14);
}

TEST_CASE("mesh construction errors")
{
  CHECK_THROWS_AS(build_periodic_mesh(CellKind::Quadrilateral, 1, 4, 1.0, 1.0), MeshError);
  CHECK_THROWS_AS(build_periodic_mesh(CellKind::Triangle, 4, 4, -1.0, 1.0), MeshError);
  CHECK_THROWS_AS(build_periodic_mesh(CellKind::Hexagon, 4, 3, 1.0, 1.0), MeshError);
  std::stringstream bad("MESH quadrilateral 1 0 0 1 1\n");
  CHECK_THROWS_AS(read_mesh(bad), MeshError);
  CHECK_THROWS_AS(cell_kind_from_string("pentagon"), Error);
}
