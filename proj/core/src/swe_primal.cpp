// SPDX-License-Identifier: Apache-2.0

#include "feec/swe_primal.hpp"

#include <cmath>

namespace feec
{

std::string to_string(PVScheme s)
{
  switch (s) {
  case PVScheme::EnergyEnstrophy:
    return "energy_enstrophy";
  case PVScheme::APVM:
    return "apvm";
  case PVScheme::SUPG:
    return "supg";
  }
  throw Error("unknown PV scheme");
}

PVScheme pv_scheme_from_string(const std::string &name)
{
  if (name == "energy_enstrophy" || name == "EnergyEnstrophy")
    return PVScheme::EnergyEnstrophy;
  if (name == "apvm" || name == "APVM")
    return PVScheme::APVM;
  if (name == "supg" || name == "SUPG")
    return PVScheme::SUPG;
  throw Error("unknown PV scheme '" + name + "'");
}

void check_params(const SpaceComplex &space, const ModelParams &p)
{
  if (!(p.g > 0.0))
    throw Error("gravity must be positive");
  if (p.f.size() != space.n0())
    throw Error("Coriolis field must have one value per vertex");
  if (p.b.size() != space.n2())
    throw Error("topography must have one value per cell");
}

void check_state(const SpaceComplex &space, const State &s)
{
  if (s.u.size() != space.n1() || s.D.size() != space.n2())
    throw Error("state does not match the space dimensions");
  for (int c = 0; c < space.n2(); ++c)
    if (!(s.D[c] > 0.0))
      throw Error("depth is not positive in cell " + std::to_string(c));
}

Vector diagnose_vorticity(const SpaceComplex &space, const Vector &u)
{
  return space.solve_mass(0, space.D01().transpose() * (space.M1() * u));
}

SparseMatrix weighted_mass0(const SpaceComplex &space, const Vector &D)
{
  std::vector<Triplet> t;
  for (int c = 0; c < space.n2(); ++c) {
    const auto &el = space.element(c);
    const auto &verts = space.mesh().cell(c).verts;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(el.size(), el.size());
    for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
      const auto &phi = el.tabulated()[q].phi;
      m.noalias() += el.quadrature()[q].w * phi * phi.transpose();
    }
    for (int i = 0; i < el.size(); ++i)
      for (int j = 0; j < el.size(); ++j)
        t.emplace_back(verts[i], verts[j], D[c] * m(i, j));
  }
  SparseMatrix M(space.n0(), space.n0());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SparseMatrix weighted_mass1(const SpaceComplex &space, const Vector &D)
{
  std::vector<Triplet> t;
  for (int c = 0; c < space.n2(); ++c) {
    const auto &el = space.element(c);
    const auto &cell = space.mesh().cell(c);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(el.size(), el.size());
    for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
      const auto &w = el.tabulated()[q].w;
      m.noalias() += el.quadrature()[q].w * w.transpose() * w;
    }
    for (int i = 0; i < el.size(); ++i)
      for (int j = 0; j < el.size(); ++j)
        t.emplace_back(cell.edges[i], cell.edges[j], D[c] * cell.signs[i] * cell.signs[j] * m(i, j));
  }
  SparseMatrix M(space.n1(), space.n1());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

Vector diagnose_pv(const SpaceComplex &space, const Vector &zeta, const Vector &D,
                   const Vector &f)
{
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(weighted_mass0(space, D));
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    throw Error("depth-weighted mass matrix is not positive definite (D <= 0 somewhere)");
  const Vector rhs = space.M0() * (zeta + f);
  Vector q = ldlt.solve(rhs);
  return q;
}

Vector diagnose_pv(const SpaceComplex &space, const State &s, const ModelParams &p)
{
  return diagnose_pv(space, diagnose_vorticity(space, s.u), s.D, p.f);
}

Vector compute_mass_flux_F(const SpaceComplex &space, const State &s)
{
  return space.solve_mass(1, weighted_mass1(space, s.D) * s.u);
}

QFlux compute_Q(const SpaceComplex &space, const State &s, const StabilizationConfig &cfg,
                const Vector &F, const Vector &q, const PVTendencyContext *ctx)
{
  if (cfg.tau_apvm < 0.0 || cfg.alpha_supg < 0.0)
    throw Error("stabilization parameters must be nonnegative");
  const bool supg = cfg.scheme == PVScheme::SUPG;
  const bool apvm = cfg.scheme == PVScheme::APVM;
  if (supg && ctx && (ctx->q_t.size() != space.n0() || ctx->D_t.size() != space.n2()))
    throw Error("SUPG tendency context does not match the space dimensions");

  QFlux out;
  out.coriolis_load = Vector::Zero(space.n1());
  Vector proj = Vector::Zero(space.n1());
  const Vector divF = space.D12() * F;
  for (int c = 0; c < space.n2(); ++c) {
    const auto &el = space.element(c);
    const auto &cell = space.mesh().cell(c);
    const double D = s.D[c];
    if (!(D > 0.0))
      throw Error("depth is not positive in cell " + std::to_string(c));
    const Eigen::VectorXd Fl = space.local1(c, F), ql = space.local0(c, q);
    Eigen::VectorXd ul, qtl;
    if (supg) {
      ul = space.local1(c, s.u);
      if (ctx)
        qtl = space.local0(c, ctx->q_t);
    }
    const double h = std::sqrt(el.area());
    Eigen::VectorXd load = Eigen::VectorXd::Zero(el.size()), pl = load;
    for (std::size_t k = 0; k < el.quadrature().size(); ++k) {
      const auto &bv = el.tabulated()[k];
      const double wq = el.quadrature()[k].w;
      const Vec2 Fx = bv.w * Fl;
      const double qx = bv.phi.dot(ql);
      double qp = qx;
      if (apvm) {
        const Vec2 gq = bv.grad * ql;
        qp -= cfg.tau_apvm / D * Fx.dot(gq);
      } else if (supg) {
        const Vec2 gq = bv.grad * ql;
        // Without a context, q_t = 0 and D_t = -div F.
        double dqD = -qx * divF[c];
        if (ctx)
          dqD = bv.phi.dot(qtl) * D + qx * ctx->D_t[c];
        const double R = dqD + Fx.dot(gq) + qx * divF[c];
        const double speed = (bv.w * ul).norm();
        const double tau = cfg.alpha_supg * h / (speed + 1e-8 * cfg.reference_speed);
        qp -= tau / D * R;
      }
      const Vec2 qF = qp * Fx;
      load.noalias() += wq * (bv.w.transpose() * perp(qF));
      pl.noalias() += wq * (bv.w.transpose() * qF);
    }
    for (int i = 0; i < el.size(); ++i) {
      out.coriolis_load[cell.edges[i]] += cell.signs[i] * load[i];
      proj[cell.edges[i]] += cell.signs[i] * pl[i];
    }
  }
  out.Q = space.solve_mass(1, proj);
  return out;
}

Vector bernoulli_potential(const SpaceComplex &space, const State &s, const ModelParams &p)
{
  Vector phi(space.n2());
  for (int c = 0; c < space.n2(); ++c) {
    const auto &el = space.element(c);
    const Eigen::VectorXd ul = space.local1(c, s.u);
    double ke = 0.0;
    for (std::size_t k = 0; k < el.quadrature().size(); ++k)
      ke += el.quadrature()[k].w * 0.5 * (el.tabulated()[k].w * ul).squaredNorm();
    phi[c] = p.g * (s.D[c] + p.b[c]) + ke / el.area();
  }
  return phi;
}

Vector velocity_rhs(const SpaceComplex &space, const State &s, const ModelParams &p,
                    const Vector &coriolis_load)
{
  const Vector Phi = bernoulli_potential(space, s, p);
  return space.solve_mass(1, space.B12().transpose() * Phi - coriolis_load);
}

Vector depth_rhs_projection(const SpaceComplex &space, const Vector &F)
{
  return -(space.D12() * F);
}

PrimalTendency primal_rhs(const SpaceComplex &space, const State &s, const ModelParams &p,
                          const StabilizationConfig &cfg, const Vector *F,
                          const PVTendencyContext *ctx)
{
  check_params(space, p);
  check_state(space, s);
  PrimalTendency t;
  t.F = F ? *F : compute_mass_flux_F(space, s);
  t.zeta = diagnose_vorticity(space, s.u);
  t.q = diagnose_pv(space, t.zeta, s.D, p.f);
  t.Q = compute_Q(space, s, cfg, t.F, t.q, ctx);
  t.u_t = velocity_rhs(space, s, p, t.Q.coriolis_load);
  t.D_t = depth_rhs_projection(space, t.F);
  return t;
}

Diagnostics diagnostics(const SpaceComplex &space, const State &s, const ModelParams &p)
{
  Diagnostics d;
  const Vector &A = space.areas();
  d.mass = A.dot(s.D);
  double ke = 0.0;
  for (int c = 0; c < space.n2(); ++c) {
    const auto &el = space.element(c);
    const Eigen::VectorXd ul = space.local1(c, s.u);
    double k2 = 0.0;
    for (std::size_t k = 0; k < el.quadrature().size(); ++k)
      k2 += el.quadrature()[k].w * (el.tabulated()[k].w * ul).squaredNorm();
    ke += 0.5 * s.D[c] * k2;
  }
  const Vector pe = p.g * (0.5 * s.D.array().square() + p.b.array() * s.D.array());
  d.energy = ke + A.dot(pe);
  const Vector zeta = diagnose_vorticity(space, s.u);
  d.total_vorticity = (space.M0() * zeta).sum();
  const Vector q = diagnose_pv(space, zeta, s.D, p.f);
  d.enstrophy = q.dot(weighted_mass0(space, s.D) * q);
  d.q_min = q.minCoeff();
  d.q_max = q.maxCoeff();
  d.d_min = s.D.minCoeff();
  return d;
}

InvariantRates invariant_rates(const SpaceComplex &space, const State &s, const ModelParams &p,
                               const PrimalTendency &t)
{
  InvariantRates r;
  const Vector Phi = bernoulli_potential(space, s, p);
  const double ek = t.F.dot(space.M1() * t.u_t);
  const double ep = Phi.dot(space.M2() * t.D_t);
  r.energy = ek + ep;
  r.energy_scale = std::abs(ek) + std::abs(ep);

  const Vector M0zt = space.D01().transpose() * (space.M1() * t.u_t);
  const SparseMatrix MDt = weighted_mass0(space, t.D_t);
  const SparseMatrix MD = weighted_mass0(space, s.D);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(MD);
  r.q_t = ldlt.solve(M0zt - MDt * t.q);
  const double z1 = 2.0 * t.q.dot(MD * r.q_t);
  const double z2 = t.q.dot(MDt * t.q);
  r.enstrophy = z1 + z2;
  r.enstrophy_scale = 2.0 * std::abs(t.q.dot(M0zt)) + std::abs(z2);

  r.pv_mass = (MD * r.q_t + MDt * t.q).sum();
  r.pv_mass_scale = M0zt.cwiseAbs().sum() + (MDt * t.q).cwiseAbs().sum();
  return r;
}

}  // namespace feec
