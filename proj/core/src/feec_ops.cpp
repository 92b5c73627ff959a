// SPDX-License-Identifier: Apache-2.0

#include "feec/feec_ops.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "feec/solvers.hpp"

namespace feec
{

FormCoeffs apply_d(const SpaceComplex &space, int k, const FormCoeffs &w)
{
  if (w.degree != k || (k != 0 && k != 1))
    throw Error("apply_d: expected a V" + std::to_string(k) + " form with k in {0, 1}");
  if (w.values.size() != space.dim(k))
    throw Error("apply_d: coefficient length does not match the space");
  if (k == 0)
    return {1, space.D01() * w.values};
  return {2, space.D12() * w.values};
}

FormCoeffs apply_delta_h(const SpaceComplex &space, int k, const FormCoeffs &w)
{
  if (w.degree != k || (k != 1 && k != 2))
    throw Error("apply_delta_h: expected a V" + std::to_string(k) + " form with k in {1, 2}");
  if (w.values.size() != space.dim(k))
    throw Error("apply_delta_h: coefficient length does not match the space");
  if (k == 1)
    return {0, space.solve_mass(0, space.D01().transpose() * (space.M1() * w.values))};
  return {1, space.solve_mass(1, space.B12().transpose() * w.values)};
}

namespace
{

Vector remove_mean(const Vector &x, const SparseMatrix &M)
{
  const Vector ones = Vector::Ones(x.size());
  const Vector Mo = M * ones;
  return x - ones * (Mo.dot(x) / Mo.sum());
}

}  // namespace

HelmholtzParts helmholtz_decompose(const SpaceComplex &space, const FormCoeffs &w)
{
  if (w.degree != 1 || w.values.size() != space.n1())
    throw Error("helmholtz_decompose: expected V1 coefficients");
  HelmholtzParts out;
  const SparseMatrix &D01 = space.D01();
  const SparseMatrix &B12 = space.B12();
  const Vector M1w = space.M1() * w.values;

  // Gradient part: the V0 Laplacian with one node pinned, then the zero-mean gauge.
  const SparseMatrix L = D01.transpose() * space.M1() * D01;
  const int n0 = space.n0();
  const SparseMatrix Lr = L.bottomRightCorner(n0 - 1, n0 - 1);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Lr);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("Helmholtz: V0 Laplacian factorization failed", 0, 0.0);
  const Vector rhs0 = D01.transpose() * M1w;
  Vector psi = Vector::Zero(n0);
  psi.tail(n0 - 1) = ldlt.solve(rhs0.tail(n0 - 1));
  out.psi = remove_mean(psi, space.M0());
  out.gradient = D01 * out.psi;

  // Rotational part: B12 M1^{-1} B12^T phi = B12 w, singular on constants.
  // Exact data has zero sum; drop the rounding residue so CG stays in the range.
  Vector rhs2 = B12 * w.values;
  rhs2.array() -= rhs2.mean();
  MatrixFreeOp A(space.n2(), [&](const Vector &x) {
    return Vector(B12 * space.solve_mass(1, B12.transpose() * x));
  });
  const int max_it = 20 * space.n2() + 100;
  const Vector phi = solve_cg(A, rhs2, 1e-13, max_it);
  out.phi = remove_mean(phi, space.M2());
  out.rotational = space.solve_mass(1, B12.transpose() * out.phi);
  out.harmonic = w.values - out.gradient - out.rotational;
  return out;
}

std::vector<Vec2> clip_convex(const std::vector<Vec2> &subject, const std::vector<Vec2> &clip)
{
  std::vector<Vec2> out = subject;
  const std::size_t nc = clip.size();
  for (std::size_t i = 0; i < nc && !out.empty(); ++i) {
    const Vec2 a = clip[i], b = clip[(i + 1) % nc];
    const Vec2 t = b - a;
    const double scale = t.norm();
    std::vector<Vec2> in = std::move(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 &p = in[k];
      const Vec2 &q = in[(k + 1) % n];
      const double sp = cross(t, p - a) / scale, sq = cross(t, q - a) / scale;
      const bool pin = sp >= 0.0, qin = sq >= 0.0;
      if (pin)
        out.push_back(p);
      if (pin != qin) {
        const double s = sp / (sp - sq);
        out.push_back(p + s * (q - p));
      }
    }
  }
  return out;
}

std::vector<OverlapPoint> overlap_quadrature(const SpaceComplex &primal, const SpaceComplex &dual)
{
  const Mesh &m = primal.mesh();
  const Mesh &d = dual.mesh();
  if (!d.sites() || d.num_cells() != m.num_vertices() || d.num_edges() != m.num_edges() ||
      d.num_vertices() != m.num_cells())
    throw Error("overlap quadrature needs a dual space built on the dual of the primal mesh");
  const auto &sites = *d.sites();

  std::vector<OverlapPoint> pts;
  for (int c = 0; c < m.num_cells(); ++c) {
    const LocalElement &ep = primal.element(c);
    const auto &cell = m.cell(c);
    const double amin = 1e-13 * ep.area();
    for (std::size_t k = 0; k < cell.verts.size(); ++k) {
      const int j = cell.verts[k];
      const LocalElement &ed = dual.element(j);
      const Vec2 T = m.cell_points(c)[k] - sites[j];
      for (int pp = 0; pp < ep.num_pieces(); ++pp) {
        for (int pd = 0; pd < ed.num_pieces(); ++pd) {
          std::vector<Vec2> subj = ed.piece_polygon(pd);
          for (auto &x : subj)
            x += T;
          const std::vector<Vec2> poly = clip_convex(subj, ep.piece_polygon(pp));
          if (poly.size() < 3)
            continue;
          for (std::size_t t = 1; t + 1 < poly.size(); ++t) {
            if (0.5 * cross(poly[t] - poly[0], poly[t + 1] - poly[0]) <= amin)
              continue;
            for (const auto &q : triangle_rule(poly[0], poly[t], poly[t + 1]))
              pts.push_back({c, j, pp, pd, q.x, Vec2(q.x - T), q.w});
          }
        }
      }
    }
  }
  return pts;
}

HodgeStar::HodgeStar(int k, std::shared_ptr<const SpaceComplex> primal,
                     std::shared_ptr<const SpaceComplex> dual, SparseMatrix W,
                     const HodgeOptions &opt)
  : k_(k), primal_(std::move(primal)), dual_(std::move(dual)), W_(std::move(W))
{
  if (W_.rows() != W_.cols())
    throw Error("Hodge star: primal and dual form spaces have different dimensions (" +
                std::to_string(W_.rows()) + " vs " + std::to_string(W_.cols()) + ")");
  const int n = static_cast<int>(W_.rows());
  if (opt.check_invertibility && n <= opt.max_dense_check) {
    const Eigen::MatrixXd M(primal_->mass(2 - k_));
    const Eigen::MatrixXd H = M.ldlt().solve(Eigen::MatrixXd(W_));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinV);
    const auto &s = svd.singularValues();
    const double ratio = s[n - 1] / s[0];
    sigma_ratio_ = ratio;
    if (!(ratio > opt.min_sigma_ratio)) {
      Eigen::Index at;
      svd.matrixV().col(n - 1).cwiseAbs().maxCoeff(&at);
      std::ostringstream os;
      os << "Hodge star k=" << k_ << " is singular: sigma_min/sigma_max = " << ratio
         << ", near-null dual vector peaks at dof " << at;
      throw Error(os.str());
    }
  }
  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu_->compute(W_);
  if (lu_->info() != Eigen::Success)
    throw Error("Hodge star k=" + std::to_string(k_) + ": pairing matrix is singular");
}

Vector HodgeStar::apply(const Vector &w) const
{
  if (w.size() != W_.cols())
    throw Error("Hodge star: argument has the wrong length");
  return primal_->solve_mass(2 - k_, W_ * w);
}

Vector HodgeStar::apply_inverse(const Vector &p) const
{
  if (p.size() != W_.rows())
    throw Error("Hodge star inverse: argument has the wrong length");
  Vector x = lu_->solve(primal_->mass(2 - k_) * p);
  if (lu_->info() != Eigen::Success)
    throw SolverError("Hodge star inverse solve failed", 1, 0.0);
  return x;
}

HodgeStar build_hodge_star(std::shared_ptr<const SpaceComplex> primal,
                           std::shared_ptr<const SpaceComplex> dual, int k,
                           const HodgeOptions &opt)
{
  if (k < 0 || k > 2)
    throw Error("Hodge star degree must be 0, 1 or 2");
  if (primal->dim(2 - k) != dual->dim(k))
    throw Error("Hodge star: dim V" + std::to_string(2 - k) + " (primal) = " +
                std::to_string(primal->dim(2 - k)) + " differs from dim V" + std::to_string(k) +
                " (dual) = " + std::to_string(dual->dim(k)));
  const Mesh &m = primal->mesh();
  const Mesh &d = dual->mesh();
  const auto pts = overlap_quadrature(*primal, *dual);

  std::vector<Triplet> trip;
  BasisValues bp, bd;
  for (const auto &p : pts) {
    const auto &pc = m.cell(p.primal_cell);
    const auto &dc = d.cell(p.dual_cell);
    switch (k) {
    case 0:
      dual->element(p.dual_cell).evaluate(p.dual_piece, p.xd, bd);
      for (std::size_t i = 0; i < dc.verts.size(); ++i)
        trip.emplace_back(p.primal_cell, dc.verts[i], p.w * bd.phi[i]);
      break;
    case 1:
      primal->element(p.primal_cell).evaluate(p.primal_piece, p.xp, bp);
      dual->element(p.dual_cell).evaluate(p.dual_piece, p.xd, bd);
      for (std::size_t a = 0; a < pc.edges.size(); ++a) {
        const Vec2 wa = primal->vector_proxy(bp.w.col(a));
        for (std::size_t b = 0; b < dc.edges.size(); ++b) {
          const Vec2 vb = dual->vector_proxy(bd.w.col(b));
          trip.emplace_back(pc.edges[a], dc.edges[b], p.w * pc.signs[a] * dc.signs[b] * wa.dot(vb));
        }
      }
      break;
    case 2:
      primal->element(p.primal_cell).evaluate(p.primal_piece, p.xp, bp);
      for (std::size_t i = 0; i < pc.verts.size(); ++i)
        trip.emplace_back(pc.verts[i], p.dual_cell, p.w * bp.phi[i]);
      break;
    }
  }
  SparseMatrix W(primal->dim(2 - k), dual->dim(k));
  W.setFromTriplets(trip.begin(), trip.end());
  W.prune(0.0);
  return HodgeStar(k, std::move(primal), std::move(dual), std::move(W), opt);
}

}  // namespace feec
