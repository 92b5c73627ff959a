// SPDX-License-Identifier: Apache-2.0

#include "feec/timestepping.hpp"

#include <cmath>
#include <sstream>

#include "feec/solvers.hpp"

namespace feec
{

Model::Model(std::shared_ptr<const SpaceComplex> space, ModelParams params, ModelOptions opt)
  : space_(std::move(space)), params_(std::move(params)), opt_(opt)
{
  if (!space_)
    throw Error("model needs a space");
  check_params(*space_, params_);
  if (opt_.formulation == Formulation::PrimalDual &&
      opt_.stabilization.scheme != PVScheme::EnergyEnstrophy)
    throw Error("the primal-dual formulation carries its own upwind PV flux; "
                "scheme must be energy_enstrophy");
  if (opt_.depth_scheme == DepthScheme::Upwind || opt_.limiter)
    dg_ = std::make_unique<DGSpace>(space_, 0);
}

const DualOperators &Model::dual() const
{
  if (!dual_)
    dual_ = build_dual_operators(space_);
  return *dual_;
}

Rate Model::rhs(const State &s, const PVTendencyContext *ctx) const
{
  Vector F;
  const Vector *Fp = nullptr;
  if (opt_.depth_scheme == DepthScheme::Upwind) {
    const DGField D = dg_->from_means(s.D);
    F = recover_flux_fortin(*dg_, D, s.u, dg_depth_rhs(*dg_, D, s.u)).F;
    Fp = &F;
  }
  Rate r;
  if (opt_.formulation == Formulation::Primal) {
    PrimalTendency t = primal_rhs(*space_, s, params_, opt_.stabilization, Fp, ctx);
    r.rate = State{std::move(t.u_t), std::move(t.D_t)};
    r.F = std::move(t.F);
  } else {
    DualTendency t = dual_rhs(dual(), s, params_, Fp);
    r.rate = State{std::move(t.u_t), std::move(t.D_t)};
    r.F = std::move(t.F);
  }
  return r;
}

Vector Model::pv(const State &s) const
{
  if (opt_.formulation == Formulation::Primal)
    return diagnose_pv(*space_, s, params_);
  return diagnose_dual(dual(), s, params_).q_d;
}

Diagnostics Model::diagnostics(const State &s) const
{
  Diagnostics d = feec::diagnostics(*space_, s, params_);
  if (opt_.formulation == Formulation::PrimalDual) {
    const DualOperators &ops = dual();
    const DualState ds = diagnose_dual(ops, s, params_);
    d.total_vorticity = ops.dual->areas().dot(ds.zeta_d);
    d.enstrophy = ds.q_d.cwiseAbs2().dot(dual_depth_integrals(ops, s.D));
    d.q_min = ds.q_d.minCoeff();
    d.q_max = ds.q_d.maxCoeff();
  }
  return d;
}

Vector Model::limit(State &s) const
{
  if (!opt_.limiter)
    return {};
  // Piecewise-constant depth has no slopes: the limiter is the identity and its flux,
  // which only has interior moments, contributes nothing to the edge fluxes.
  const DGField before = dg_->from_means(s.D);
  const DGField after = slope_limit(*dg_, before);
  s.D = dg_->means(after);
  return Vector::Zero(space_->n1());
}

void check_positive_depth(const State &s, const std::string &context)
{
  Eigen::Index c = 0;
  const double dmin = s.D.minCoeff(&c);
  if (!(dmin > 0.0)) {
    std::ostringstream os;
    os << context << ": depth " << dmin << " at cell " << c << " is not positive";
    throw NonPositiveDepth(os.str(), s, static_cast<int>(c));
  }
}

StepResult step_ssprk3(const RhsFn &rhs, const State &s, double dt, const StageFn &stage)
{
  if (!(dt > 0.0))
    throw Error("time step must be positive");
  // The hook maps y to S(y) with S(y) - y = -D12 F_s and returns F_s. Intermediate
  // stages only move the evaluation points; the final pass enters the step flux.
  auto apply_stage = [&](State &y) -> Vector {
    if (!stage)
      return {};
    return stage(y);
  };

  const Rate k1 = rhs(s);
  State y1{s.u + dt * k1.rate.u, s.D + dt * k1.rate.D};
  apply_stage(y1);

  const Rate k2 = rhs(y1);
  State y2{s.u + (0.25 * dt) * (k1.rate.u + k2.rate.u), s.D + (0.25 * dt) * (k1.rate.D + k2.rate.D)};
  apply_stage(y2);

  const Rate k3 = rhs(y2);
  StepResult out;
  out.state.u = s.u + (dt / 6.0) * (k1.rate.u + k2.rate.u + 4.0 * k3.rate.u);
  out.state.D = s.D + (dt / 6.0) * (k1.rate.D + k2.rate.D + 4.0 * k3.rate.D);
  out.flux = (k1.F + k2.F + 4.0 * k3.F) / 6.0;
  const Vector fs = apply_stage(out.state);
  if (fs.size() > 0)
    out.flux += fs / dt;
  check_positive_depth(out.state, "SSPRK3 step");
  return out;
}

SparseMatrix coriolis_matrix(const SpaceComplex &space)
{
  std::vector<Triplet> t;
  for (int c = 0; c < space.n2(); ++c) {
    const auto &el = space.element(c);
    const auto &cell = space.mesh().cell(c);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(el.size(), el.size());
    for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
      const auto &w = el.tabulated()[q].w;
      Eigen::Matrix<double, 2, Eigen::Dynamic> pw(2, w.cols());
      pw.row(0) = -w.row(1);
      pw.row(1) = w.row(0);
      m.noalias() += el.quadrature()[q].w * w.transpose() * pw;
    }
    for (int i = 0; i < el.size(); ++i)
      for (int j = 0; j < el.size(); ++j)
        t.emplace_back(cell.edges[i], cell.edges[j], cell.signs[i] * cell.signs[j] * m(i, j));
  }
  SparseMatrix P(space.n1(), space.n1());
  P.setFromTriplets(t.begin(), t.end());
  P.prune(0.0);
  return P;
}

SemiImplicitStepper::SemiImplicitStepper(std::shared_ptr<const SpaceComplex> space, double D0,
                                         double f0, double g, double dt, int picard_iters,
                                         double rtol, int max_iters)
  : space_(std::move(space)), D0_(D0), f0_(f0), g_(g), dt_(dt), picard_iters_(picard_iters),
    rtol_(rtol), max_iters_(max_iters)
{
  if (!space_)
    throw Error("semi-implicit stepper needs a space");
  if (!(dt > 0.0) || !(D0 > 0.0) || !(g > 0.0) || picard_iters < 1 || !(rtol > 0.0) ||
      max_iters < 1)
    throw Error("invalid semi-implicit stepper parameters");
  P_ = coriolis_matrix(*space_);
  const SparseMatrix A = space_->M1() + (0.5 * dt_ * f0_) * P_;
  A_lu_.compute(A);
  if (A_lu_.info() != Eigen::Success)
    throw SolverError("semi-implicit: velocity block factorization failed", 0, 0.0);
}

State SemiImplicitStepper::linear(const State &s) const
{
  const SpaceComplex &sp = *space_;
  State out;
  out.u = sp.solve_mass(1, g_ * (sp.B12().transpose() * s.D) - f0_ * (P_ * s.u));
  out.D = -D0_ * (sp.D12() * s.u);
  return out;
}

State SemiImplicitStepper::solve_linear(const State &r, const Vector *D_guess,
                                        SemiImplicitStats *stats) const
{
  // M1 u + h f0 P u - h g B12^T D = M1 r_u,  D + h D0 D12 u = r_D,  h = dt / 2.
  const SpaceComplex &sp = *space_;
  const double h = 0.5 * dt_;
  const SparseMatrix &B12 = sp.B12();
  const Vector M1ru = sp.M1() * r.u;
  auto solveA = [&](const Vector &b) {
    Vector x = A_lu_.solve(b);
    if (A_lu_.info() != Eigen::Success)
      throw SolverError("semi-implicit: velocity block solve failed", 1, 0.0);
    return x;
  };
  const Vector a0 = solveA(M1ru);
  MatrixFreeOp S(sp.n2(), [&](const Vector &D) {
    return Vector(D + (h * h * g_ * D0_) * (sp.D12() * solveA(B12.transpose() * D)));
  });
  const Vector rhs = r.D - (h * D0_) * (sp.D12() * a0);
  KrylovStats ks;
  const Vector D = solve_bicgstab(S, rhs, rtol_, max_iters_, D_guess, &ks);
  if (stats) {
    stats->krylov_iters += ks.iterations;
    stats->krylov_residual = std::max(stats->krylov_residual, ks.residual);
  }
  State out;
  out.u = a0 + (h * g_) * solveA(B12.transpose() * D);
  out.D = r.D - (h * D0_) * (sp.D12() * out.u);
  return out;
}

StepResult SemiImplicitStepper::step(const RhsFn &rhs, const State &s,
                                     SemiImplicitStats *stats) const
{
  const double h = 0.5 * dt_;
  const Rate n0 = rhs(s);
  const State base{s.u + h * n0.rate.u, s.D + h * n0.rate.D};
  SemiImplicitStats local;
  State x = s;
  Vector Fk = n0.F, uk = s.u;
  const double scale_u = std::max(s.u.norm(), 1e-300), scale_D = s.D.norm();
  double prev = INFINITY;
  for (int k = 0; k < picard_iters_; ++k) {
    const Rate nk = k == 0 ? n0 : rhs(x);
    const State lk = linear(x);
    const State r{base.u + h * (nk.rate.u - lk.u), base.D + h * (nk.rate.D - lk.D)};
    State next = solve_linear(r, &x.D, &local);
    if (!next.u.allFinite() || !next.D.allFinite())
      throw SolverError("semi-implicit: Picard iterate is not finite", k + 1, INFINITY);
    const double inc = std::max((next.u - x.u).norm() / scale_u, (next.D - x.D).norm() / scale_D);
    uk = x.u;
    x = std::move(next);
    Fk = nk.F;
    local.picard_iters = k + 1;
    local.picard_increment = inc;
    if (inc > 1e-8 && inc > prev && k + 1 == picard_iters_)
      throw SolverError("semi-implicit: Picard sweeps diverge (relative increment " +
                          std::to_string(inc) + ")",
                        k + 1, inc);
    prev = inc;
  }
  if (stats)
    *stats = local;
  // The update solves D+ = D - h D12 (F(x) + F(x^k) - D0 u^k + D0 u+) exactly.
  StepResult out;
  out.flux = 0.5 * (n0.F + Fk) + 0.5 * D0_ * (x.u - uk);
  out.state = std::move(x);
  check_positive_depth(out.state, "semi-implicit step");
  return out;
}

}  // namespace feec
