// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_SPACE_HPP
#define FEEC_SPACE_HPP

#include <functional>
#include <iosfwd>
#include <memory>

#include "feec/element.hpp"
#include "feec/mesh.hpp"

namespace feec
{

enum class Family
{
  // Continuous P1 / div-conforming RT0 / P0 (flux 1-forms). Quads use Q1 and Piola RT0,
  // general polygons use the fan-subdivided construction.
  P1_RT0_P0,
  // Same coefficients with the edge space read as tangential (circulation) vectors:
  // the vector proxy of an edge function is k x w.
  P1_N0_P0
};

std::string to_string(Family f);

// Coefficients tagged with the form degree they belong to.
struct FormCoeffs
{
  int degree = 0;
  Vector values;
};

// The lowest-order de Rham complex on one mesh.
//
// DOFs: V0 vertex values, V1 edge fluxes (for N0: circulations) in the direction of the
// edge's right normal, V2 cell values. D01 and B12 are the signed incidence matrices; the
// strong divergence in V2 coefficients is M2^{-1} B12.
class SpaceComplex
{
public:
  SpaceComplex(Mesh mesh, Family family);

  const Mesh &mesh() const { return mesh_; }
  Family family() const { return family_; }
  int n0() const { return mesh_.num_vertices(); }
  int n1() const { return mesh_.num_edges(); }
  int n2() const { return mesh_.num_cells(); }
  int dim(int k) const;

  const LocalElement &element(int c) const { return elements_[c]; }

  const SparseMatrix &M0() const { return M0_; }
  const SparseMatrix &M1() const { return M1_; }
  const SparseMatrix &M2() const { return M2_; }
  const SparseMatrix &mass(int k) const;
  // Exact derivative coefficients of d on V0 (edge differences).
  const SparseMatrix &D01() const { return D01_; }
  // Topological pairing B12(c, e) = integral over c of div w_e (the signed incidence).
  const SparseMatrix &B12() const { return B12_; }
  // Strong derivative on V1 in V2 coefficients: M2^{-1} B12.
  const SparseMatrix &D12() const { return D12_; }
  const Vector &areas() const { return areas_; }

  Vector solve_mass(int k, const Vector &rhs) const;

  // Local evaluation helpers. Coefficient gathers include the edge signs.
  Eigen::VectorXd local0(int c, const Vector &g) const;
  Eigen::VectorXd local1(int c, const Vector &g) const;
  // Vector proxy of a V1 basis combination: w for RT0, k x w for N0.
  Vec2 vector_proxy(const Vec2 &w) const { return family_ == Family::P1_N0_P0 ? perp(w) : w; }

  // L2 projection of an analytic field (evaluated at unwrapped cell-frame points, so the
  // field must be periodic). k = 0, 2 take scalar fields; k = 1 takes vector fields.
  Vector project_scalar(int k, const std::function<double(const Vec2 &)> &f) const;
  Vector project_vector(const std::function<Vec2(const Vec2 &)> &f) const;
  // Load vectors of the same projections.
  Vector load_scalar(int k, const std::function<double(const Vec2 &)> &f) const;
  Vector load_vector(const std::function<Vec2(const Vec2 &)> &f) const;

  // L2 norm of (discrete V2 field - analytic field).
  double l2_error2(const Vector &d, const std::function<double(const Vec2 &)> &f) const;
  double l2_error0(const Vector &g, const std::function<double(const Vec2 &)> &f) const;

private:
  Mesh mesh_;
  Family family_;
  std::vector<LocalElement> elements_;
  SparseMatrix M0_, M1_, M2_, D01_, B12_, D12_;
  Vector areas_;
  Eigen::SimplicialLDLT<SparseMatrix> M0_solver_, M1_solver_;
};

std::shared_ptr<const SpaceComplex> build_space_complex(const Mesh &m, Family family);

FormCoeffs project_L2(const SpaceComplex &space, int k,
                      const std::function<double(const Vec2 &)> &field);
FormCoeffs project_L2_vector(const SpaceComplex &space,
                             const std::function<Vec2(const Vec2 &)> &field);

// Debug dump: one `row col value` line per stored entry.
void write_coo(std::ostream &os, const SparseMatrix &A);

}  // namespace feec

#endif  // FEEC_SPACE_HPP
