// SPDX-License-Identifier: Apache-2.0

#include "feec/advect_dg.hpp"

#include <array>
#include <cmath>

namespace feec
{

namespace
{

constexpr std::array<double, 3> kGaussX{0.1127016653792583, 0.5, 0.8872983346207417};
constexpr std::array<double, 3> kGaussW{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
// Squared norms of 1, a, b, ab on the unit square.
constexpr std::array<double, 4> kNorm{1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 9.0};

std::array<double, 4> q1_basis(const Vec2 &r)
{
  const double a = 2.0 * r.x() - 1.0, b = 2.0 * r.y() - 1.0;
  return {1.0, a, b, a * b};
}

// Reference gradients of a, b, ab.
std::array<Vec2, 4> q1_grad(const Vec2 &r)
{
  const double a = 2.0 * r.x() - 1.0, b = 2.0 * r.y() - 1.0;
  return {Vec2::Zero(), Vec2(2.0, 0.0), Vec2(0.0, 2.0), Vec2(2.0 * b, 2.0 * a)};
}

Eigen::Matrix<double, 2, 12> rt1_basis(const Vec2 &r)
{
  const double s = r.x(), t = r.y();
  Eigen::Matrix<double, 2, 12> m = Eigen::Matrix<double, 2, 12>::Zero();
  const std::array<double, 6> xs{1.0, s, s * s, t, s * t, s * s * t};
  const std::array<double, 6> ys{1.0, t, t * t, s, s * t, t * t * s};
  for (int i = 0; i < 6; ++i) {
    m(0, i) = xs[i];
    m(1, 6 + i) = ys[i];
  }
  return m;
}

Eigen::Matrix<double, 1, 12> rt1_div_row(const Vec2 &r)
{
  const double s = r.x(), t = r.y();
  Eigen::Matrix<double, 1, 12> d = Eigen::Matrix<double, 1, 12>::Zero();
  d(1) = 1.0;
  d(2) = 2.0 * s;
  d(4) = t;
  d(5) = 2.0 * s * t;
  d(7) = 1.0;
  d(8) = 2.0 * t;
  d(10) = s;
  d(11) = 2.0 * t * s;
  return d;
}

// Outward reference normal of side k.
Vec2 side_normal(int k)
{
  static const std::array<Vec2, 4> n{Vec2(0, -1), Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0)};
  return n[k];
}

// Curl of the bubble s(1-s)t(1-t), as perp(grad).
Vec2 bubble_curl(const Vec2 &r)
{
  const double s = r.x(), t = r.y();
  const double bs = (1.0 - 2.0 * s) * t * (1.0 - t), bt = (1.0 - 2.0 * t) * s * (1.0 - s);
  return perp(Vec2(bs, bt));
}

// Fortin functionals on the reference RT[1] basis:
// 8 side moments, 3 interior moments against grad a, grad b, grad ab, 1 bubble moment.
Eigen::MatrixXd fortin_matrix()
{
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(12, 12);
  for (int k = 0; k < 4; ++k)
    for (int g = 0; g < 3; ++g) {
      const double tau = kGaussX[g];
      const Eigen::Matrix<double, 1, 12> fn = side_normal(k).transpose() * rt1_basis(DGSpace::side_point(k, tau));
      A.row(2 * k) += kGaussW[g] * fn;
      A.row(2 * k + 1) += kGaussW[g] * (2.0 * tau - 1.0) * fn;
    }
  for (int gi = 0; gi < 3; ++gi)
    for (int gj = 0; gj < 3; ++gj) {
      const Vec2 r(kGaussX[gi], kGaussX[gj]);
      const double w = kGaussW[gi] * kGaussW[gj];
      const auto B = rt1_basis(r);
      const auto G = q1_grad(r);
      for (int m = 1; m < 4; ++m)
        A.row(7 + m) += w * G[m].transpose() * B;
      A.row(11) += w * bubble_curl(r).transpose() * B;
    }
  return A;
}

}  // namespace

DGSpace::DGSpace(std::shared_ptr<const SpaceComplex> space, int degree)
    : space_(std::move(space)), degree_(degree)
{
  if (!space_)
    throw Error("DG space needs a space complex");
  if (degree_ != 0 && degree_ != 1)
    throw Error("DG depth degree must be 0 or 1");
  for (int c = 0; c < space_->n2(); ++c)
    if (!(space_->element(c).area() > 0.0))
      throw MeshError("zero-area element " + std::to_string(c));
  if (degree_ == 1) {
    for (int c = 0; c < space_->n2(); ++c)
      if (space_->element(c).shape() != ElementShape::Parallelogram)
        throw Error("degree-1 DG depth requires a parallelogram mesh");
    fortin_lu_.compute(fortin_matrix());
    if (!fortin_lu_.isInvertible())
      throw SolverError("reference Fortin system is singular", 0, 0.0);
  }
}

Vec2 DGSpace::side_point(int k, double tau)
{
  switch (k) {
  case 0:
    return {tau, 0.0};
  case 1:
    return {1.0, tau};
  case 2:
    return {1.0 - tau, 1.0};
  default:
    return {0.0, 1.0 - tau};
  }
}

Vector DGSpace::means(const DGField &D) const
{
  return D.row(0).transpose();
}

DGField DGSpace::from_means(const Vector &D) const
{
  if (D.size() != num_cells())
    throw Error("cell vector has the wrong size");
  DGField out = zeros();
  out.row(0) = D.transpose();
  return out;
}

Vec2 DGSpace::to_reference(int c, const Vec2 &x) const
{
  const ElementMap m = space_->element(c).element_map();
  return m.J.inverse() * (x - m.origin);
}

DGField DGSpace::project(const std::function<double(const Vec2 &)> &fn) const
{
  DGField out = zeros();
  for (int c = 0; c < num_cells(); ++c) {
    const auto &el = space_->element(c);
    for (const auto &q : el.quadrature()) {
      if (degree_ == 0) {
        out(0, c) += q.w * fn(q.x) / el.area();
        continue;
      }
      const auto phi = q1_basis(to_reference(c, q.x));
      for (int i = 0; i < 4; ++i)
        out(i, c) += q.w * fn(q.x) * phi[i] / (kNorm[i] * el.area());
    }
  }
  return out;
}

double DGSpace::value(const DGField &D, int c, const Vec2 &ref) const
{
  if (degree_ == 0)
    return D(0, c);
  const auto phi = q1_basis(ref);
  return D(0, c) * phi[0] + D(1, c) * phi[1] + D(2, c) * phi[2] + D(3, c) * phi[3];
}

double DGSpace::trace(const DGField &D, int c, int k, double tau) const
{
  return value(D, c, side_point(k, tau));
}

Vector DGSpace::cell_integrals(const DGField &D) const
{
  return (space_->areas().array() * means(D).array()).matrix();
}

Vec2 rt1_value(const Eigen::Ref<const Eigen::VectorXd> &c, const Vec2 &ref)
{
  return rt1_basis(ref) * c;
}

double rt1_divergence(const Eigen::Ref<const Eigen::VectorXd> &c, const Vec2 &ref)
{
  return rt1_div_row(ref) * c;
}

namespace
{

// The other side of local side k of cell c: (cell, side).
std::pair<int, int> neighbour(const Mesh &mesh, int c, int k)
{
  const int e = mesh.cell(c).edges[k];
  const auto &ec = mesh.edge_cells(e);
  if (ec[0].first == c && ec[0].second == k)
    return ec[1];
  return ec[0];
}

// Upwind trace on side k of cell c at tau (counterclockwise for c).
double upwind_trace(const DGSpace &dg, const DGField &D, int c, int k, double tau, double u_out)
{
  const auto [nb, kn] = neighbour(dg.space().mesh(), c, k);
  const double own = dg.trace(D, c, k, tau);
  const double other = dg.trace(D, nb, kn, 1.0 - tau);
  if (u_out > 0.0)
    return own;
  if (u_out < 0.0)
    return other;
  return 0.5 * (own + other);
}

// int grad phi_i . (D u) over cell c for i = 1..3 (entry 0 is zero).
std::array<double, 4> volume_moments(const DGSpace &dg, const DGField &D, const Vector &u, int c)
{
  const auto &sp = dg.space();
  const auto &el = sp.element(c);
  const Eigen::VectorXd ul = sp.local1(c, u);
  const Mat2 JinvT = el.element_map().J.inverse().transpose();
  std::array<double, 4> v{0.0, 0.0, 0.0, 0.0};
  for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
    const Vec2 r = dg.to_reference(c, el.quadrature()[q].x);
    const Vec2 Du = dg.value(D, c, r) * (el.tabulated()[q].w * ul);
    const auto G = q1_grad(r);
    for (int i = 1; i < 4; ++i)
      v[i] += el.quadrature()[q].w * (JinvT * G[i]).dot(Du);
  }
  return v;
}

}  // namespace

DGField dg_depth_rhs(const DGSpace &dg, const DGField &D, const Vector &u)
{
  const auto &sp = dg.space();
  if (D.rows() != dg.local_size() || D.cols() != dg.num_cells() || u.size() != sp.n1())
    throw Error("DG depth tendency: input sizes do not match the space");
  DGField out = dg.zeros();
  for (int c = 0; c < dg.num_cells(); ++c) {
    const Eigen::VectorXd ul = sp.local1(c, u);
    const double A = sp.element(c).area();
    if (dg.degree() == 0) {
      double s = 0.0;
      for (int k = 0; k < ul.size(); ++k)
        s += ul[k] * upwind_trace(dg, D, c, k, 0.5, ul[k]);
      out(0, c) = -s / A;
      continue;
    }
    const auto vol = volume_moments(dg, D, u, c);
    for (int i = 0; i < 4; ++i) {
      double s = vol[i];
      // The normal velocity is constant on each side, u.n ds = u_out dtau.
      for (int k = 0; k < 4; ++k)
        for (int g = 0; g < 3; ++g) {
          const double tau = kGaussX[g];
          const double phi = q1_basis(DGSpace::side_point(k, tau))[i];
          s -= kGaussW[g] * ul[k] * phi * upwind_trace(dg, D, c, k, tau, ul[k]);
        }
      out(i, c) = s / (kNorm[i] * A);
    }
  }
  return out;
}

DGField rt1_divergence_field(const DGSpace &dg, const RTLocal &F)
{
  DGField out = dg.zeros();
  for (int c = 0; c < dg.num_cells(); ++c) {
    const double detJ = dg.space().element(c).element_map().detJ();
    for (int gi = 0; gi < 3; ++gi)
      for (int gj = 0; gj < 3; ++gj) {
        const Vec2 r(kGaussX[gi], kGaussX[gj]);
        const double d = rt1_divergence(F.col(c), r) / detJ;
        const auto phi = q1_basis(r);
        for (int i = 0; i < 4; ++i)
          out(i, c) += kGaussW[gi] * kGaussW[gj] * d * phi[i] / kNorm[i];
      }
  }
  return out;
}

Eigen::MatrixXd rt1_side_moments(const DGSpace &dg, const RTLocal &F)
{
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(8, dg.num_cells());
  for (int c = 0; c < dg.num_cells(); ++c)
    for (int k = 0; k < 4; ++k)
      for (int g = 0; g < 3; ++g) {
        const double tau = kGaussX[g];
        const double fn = side_normal(k).dot(rt1_value(F.col(c), DGSpace::side_point(k, tau)));
        out(2 * k, c) += kGaussW[g] * fn;
        out(2 * k + 1, c) += kGaussW[g] * (2.0 * tau - 1.0) * fn;
      }
  return out;
}

RecoveredFlux recover_flux_fortin(const DGSpace &dg, const DGField &D, const Vector &u,
                                  const DGField &D_t)
{
  const auto &sp = dg.space();
  if (D_t.rows() != dg.local_size() || D_t.cols() != dg.num_cells())
    throw Error("flux recovery: tendency has the wrong shape");
  RecoveredFlux out;
  out.degree = dg.degree();
  if (dg.degree() == 0) {
    // RT0 is fixed by its edge moments alone: F_e = D^u u_e.
    out.F = Vector::Zero(sp.n1());
    const Mesh &mesh = sp.mesh();
    for (int e = 0; e < sp.n1(); ++e) {
      const int l = mesh.left_cell(e), r = mesh.right_cell(e);
      const double Du = u[e] > 0.0 ? D(0, l) : (u[e] < 0.0 ? D(0, r) : 0.5 * (D(0, l) + D(0, r)));
      out.F[e] = Du * u[e];
    }
    const Vector res = D_t.row(0).transpose() + sp.D12() * out.F;
    out.residual_norm = res.cwiseAbs().maxCoeff();
    return out;
  }

  out.local = RTLocal::Zero(12, dg.num_cells());
  for (int c = 0; c < dg.num_cells(); ++c) {
    const auto &el = sp.element(c);
    const Eigen::VectorXd ul = sp.local1(c, u);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(12);
    for (int k = 0; k < 4; ++k)
      for (int g = 0; g < 3; ++g) {
        const double tau = kGaussX[g];
        const double flux = kGaussW[g] * ul[k] * upwind_trace(dg, D, c, k, tau, ul[k]);
        rhs[2 * k] += flux;
        rhs[2 * k + 1] += (2.0 * tau - 1.0) * flux;
      }
    const auto vol = volume_moments(dg, D, u, c);
    for (int m = 1; m < 4; ++m)
      rhs[7 + m] = vol[m];
    // Bubble moment of the inverse-Piola image of D u.
    const ElementMap map = el.element_map();
    const Mat2 PinvJ = map.detJ() * map.J.inverse();
    for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
      const Vec2 r = dg.to_reference(c, el.quadrature()[q].x);
      const Vec2 G = PinvJ * (dg.value(D, c, r) * (el.tabulated()[q].w * ul));
      rhs[11] += el.quadrature()[q].w / map.detJ() * bubble_curl(r).dot(G);
    }
    out.local.col(c) = dg.fortin_lu().solve(rhs);
  }
  const DGField res = D_t + rt1_divergence_field(dg, out.local);
  out.residual_norm = res.cwiseAbs().maxCoeff();
  return out;
}

DGField slope_limit(const DGSpace &dg, const DGField &D)
{
  if (dg.degree() == 0)
    return D;
  const Mesh &mesh = dg.space().mesh();
  DGField out = D;
  static const std::array<Vec2, 4> corners{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  for (int c = 0; c < dg.num_cells(); ++c) {
    const double mean = D(0, c);
    double lo = mean, hi = mean;
    for (int k = 0; k < 4; ++k) {
      const double m = D(0, neighbour(mesh, c, k).first);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    double alpha = 1.0;
    for (const auto &r : corners) {
      const double dv = dg.value(D, c, r) - mean;
      if (dv > 0.0)
        alpha = std::min(alpha, (hi - mean) / dv);
      else if (dv < 0.0)
        alpha = std::min(alpha, (lo - mean) / dv);
    }
    if (alpha < 1.0)
      out.block(1, c, 3, 1) *= alpha;
  }
  return out;
}

LimiterFlux recover_limiter_flux(const DGSpace &dg, const DGField &D_before,
                                 const DGField &D_after)
{
  if (D_before.rows() != D_after.rows() || D_before.cols() != D_after.cols())
    throw Error("limiter flux: fields have different shapes");
  LimiterFlux out;
  if (dg.degree() == 0) {
    if ((D_after - D_before).cwiseAbs().maxCoeff() > 0.0)
      throw Error("limiter flux: a P0 limiter cannot change the field");
    out.local = RTLocal::Zero(12, dg.num_cells());
    return out;
  }
  const DGField diff = D_after - D_before;
  const double scale = std::max(D_before.row(0).cwiseAbs().maxCoeff(), 1e-300);
  if (diff.row(0).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error("limiter flux: cell means differ between the two fields");

  out.local = RTLocal::Zero(12, dg.num_cells());
  for (int c = 0; c < dg.num_cells(); ++c) {
    if (diff.col(c).tail(3).cwiseAbs().maxCoeff() == 0.0)
      continue;
    const double detJ = dg.space().element(c).element_map().detJ();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(12);
    // int F.grad phi = -int phi div F with zero side flux; div F_hat = detJ * diff.
    for (int m = 1; m < 4; ++m)
      rhs[7 + m] = -detJ * kNorm[m] * diff(m, c);
    out.local.col(c) = dg.fortin_lu().solve(rhs);
  }
  out.max_side_flux = rt1_side_moments(dg, out.local).cwiseAbs().maxCoeff();
  return out;
}

Vector pv_tendency_dg(const DGSpace &dg, const DGField &D, const DGField &D_t, const RTLocal &F,
                      const Vector &q)
{
  if (dg.degree() != 1)
    throw Error("pv_tendency_dg needs a degree-1 depth space");
  const auto &sp = dg.space();
  std::vector<Triplet> t;
  Vector rhs = Vector::Zero(sp.n0());
  for (int c = 0; c < dg.num_cells(); ++c) {
    const auto &el = sp.element(c);
    const auto &verts = sp.mesh().cell(c).verts;
    const ElementMap map = el.element_map();
    const Eigen::VectorXd ql = sp.local0(c, q);
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    for (std::size_t k = 0; k < el.quadrature().size(); ++k) {
      const auto &bv = el.tabulated()[k];
      const double w = el.quadrature()[k].w;
      const Vec2 r = dg.to_reference(c, el.quadrature()[k].x);
      const Vec2 Fx = map.J * rt1_value(F.col(c), r) / map.detJ();
      const double qx = bv.phi.dot(ql);
      const double Dx = dg.value(D, c, r), Dtx = dg.value(D_t, c, r);
      m.noalias() += w * Dx * bv.phi * bv.phi.transpose();
      for (int i = 0; i < 4; ++i)
        rhs[verts[i]] += w * (bv.grad.col(i).dot(qx * Fx) - bv.phi[i] * Dtx * qx);
    }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        t.emplace_back(verts[i], verts[j], m(i, j));
  }
  SparseMatrix M(sp.n0(), sp.n0());
  M.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(M);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    throw Error("depth-weighted mass matrix is not positive definite");
  return ldlt.solve(rhs);
}

DGField advect_ssprk3(const DGSpace &dg, const DGField &D, const Vector &u, double dt, bool limit)
{
  auto lim = [&](DGField x) { return limit ? slope_limit(dg, x) : x; };
  const DGField d1 = lim(D + dt * dg_depth_rhs(dg, D, u));
  const DGField d2 = lim(0.75 * D + 0.25 * (d1 + dt * dg_depth_rhs(dg, d1, u)));
  return lim(D / 3.0 + 2.0 / 3.0 * (d2 + dt * dg_depth_rhs(dg, d2, u)));
}

}  // namespace feec
