// SPDX-License-Identifier: Apache-2.0

#include "feec/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "feec/feec_ops.hpp"

namespace feec
{

namespace
{

Vector random_vector(std::mt19937_64 &rng, Eigen::Index n)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = u(rng);
  return v;
}

double rel(const Vector &a, const Vector &b)
{
  const double s = std::max(a.norm(), b.norm());
  return s > 0.0 ? (a - b).norm() / s : 0.0;
}

StabilizationConfig scheme_config(PVScheme s, const Reference &ref)
{
  StabilizationConfig c;
  c.scheme = s;
  c.tau_apvm = 300.0;
  c.alpha_supg = 0.5;
  c.reference_speed = std::sqrt(ref.g * ref.D0);
  return c;
}

}  // namespace

long long d_squared_max(const Mesh &m)
{
  const IncidenceMatrices inc = assemble_incidence(m);
  const IntSparseMatrix dd = inc.d12 * inc.d01;
  long long worst = 0;
  for (int k = 0; k < dd.outerSize(); ++k)
    for (IntSparseMatrix::InnerIterator it(dd, k); it; ++it)
      worst = std::max<long long>(worst, std::llabs(static_cast<long long>(it.value())));
  return worst;
}

double delta_squared_residual(const SpaceComplex &space, int n_fields, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < n_fields; ++i) {
    const Vector phi = random_vector(rng, space.n2());
    const Vector d1 = apply_delta_h(space, 2, {2, phi}).values;
    const Vector d0 = apply_delta_h(space, 1, {1, d1}).values;
    const Vector ref = space.solve_mass(0, space.D01().cwiseAbs().transpose() *
                                             (space.M1() * d1.cwiseAbs()));
    worst = std::max(worst, d0.norm() / ref.norm());
  }
  return worst;
}

HarmonicReport harmonic_rank(const SpaceComplex &space, int n_forms, std::uint64_t seed,
                             double threshold)
{
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd H(space.n1(), n_forms);
  for (int i = 0; i < n_forms; ++i)
    H.col(i) = helmholtz_decompose(space, {1, random_vector(rng, space.n1())}).harmonic;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(H);
  const Vector sv = svd.singularValues();
  HarmonicReport r;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    r.sv.push_back(sv[i] / sv[0]);
    if (sv[i] > threshold * sv[0])
      ++r.rank;
  }
  return r;
}

CommutingReport commuting_check(const DualOperators &ops, int n_trials, std::uint64_t seed)
{
  const SpaceComplex &p = *ops.primal;
  const SpaceComplex &d = *ops.dual;
  std::mt19937_64 rng(seed);
  CommutingReport r;
  for (int t = 0; t < n_trials; ++t) {
    const Vector g = random_vector(rng, d.n0());
    const Vector lhs0 = ops.H1.apply(d.D01() * g);
    const Vector rhs0 = apply_delta_h(p, 2, {2, ops.H0.apply(g)}).values;
    r.k0 = std::max(r.k0, rel(lhs0, -rhs0));
    const Vector v = random_vector(rng, d.n1());
    const Vector lhs1 = ops.H2.apply(d.D12() * v);
    const Vector rhs1 = apply_delta_h(p, 1, {1, ops.H1.apply(v)}).values;
    r.k1 = std::max(r.k1, rel(lhs1, rhs1));
  }
  r.sigma_ratio_min = INFINITY;
  for (const HodgeStar *h : {&ops.H0, &ops.H1, &ops.H2}) {
    if (!h->sigma_ratio())
      throw Error("Hodge star k=" + std::to_string(h->k()) +
                  " was built without the dense invertibility check");
    r.sigma_ratio_min = std::min(r.sigma_ratio_min, *h->sigma_ratio());
  }
  return r;
}

Vector consistent_coriolis_primal(const SpaceComplex &space, const State &s, double c)
{
  const Vector zeta = diagnose_vorticity(space, s.u);
  return space.solve_mass(0, weighted_mass0(space, s.D) * Vector::Constant(space.n0(), c)) - zeta;
}

Vector consistent_coriolis_dual(const DualOperators &ops, const State &s, double c)
{
  const Vector zeta_d = dual_vorticity(ops, dual_velocity(ops, s.u));
  const Vector rhs = c * dual_depth_integrals(ops, s.D) - ops.dual->areas().cwiseProduct(zeta_d);
  Eigen::SparseLU<SparseMatrix> lu;
  const SparseMatrix W2t = ops.H2.W().transpose();
  lu.compute(W2t);
  if (lu.info() != Eigen::Success)
    throw SolverError("dual Coriolis pairing is singular", 0, 0.0);
  return lu.solve(rhs);
}

DGField rough_depth(const DGSpace &dg, double D0, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DGField D = dg.zeros();
  for (int c = 0; c < dg.num_cells(); ++c) {
    D(0, c) = D0 * (1.0 + 0.2 * u(rng));
    for (int i = 1; i < dg.local_size(); ++i)
      D(i, c) = 0.1 * D0 * u(rng);
  }
  return D;
}

ConservationReport conservation_check(const std::shared_ptr<const SpaceComplex> &space,
                                      const DualOperators *ops, const Reference &ref,
                                      int n_states, std::uint64_t seed)
{
  const SpaceComplex &sp = *space;
  ConservationReport r;
  r.states = n_states;
  r.dual_checked = ops != nullptr;
  r.enstrophy_apvm_max = -INFINITY;
  const DGSpace dg0(space, 0);
  std::unique_ptr<DGSpace> dg1;
  try {
    dg1 = std::make_unique<DGSpace>(space, 1);
    r.dg_checked = true;
  } catch (const Error &) {
    // Q1 depth needs parallelogram cells.
  }
  const std::array<PVScheme, 3> schemes{PVScheme::EnergyEnstrophy, PVScheme::APVM, PVScheme::SUPG};
  const double c = 1.3e-7;

  for (int n = 0; n < n_states; ++n) {
    const std::uint64_t sd = seed + static_cast<std::uint64_t>(n);
    const State st = random_state(sp, ref, sd);
    const ModelParams p = random_params(sp, ref, sd);

    for (std::size_t k = 0; k < schemes.size(); ++k) {
      const StabilizationConfig cfg = scheme_config(schemes[k], ref);
      const PrimalTendency t = primal_rhs(sp, st, p, cfg);
      const InvariantRates ir = invariant_rates(sp, st, p, t);
      r.energy[k] = std::max(r.energy[k], std::abs(ir.energy) / ir.energy_scale);
      if (schemes[k] == PVScheme::EnergyEnstrophy)
        r.enstrophy_ee = std::max(r.enstrophy_ee, std::abs(ir.enstrophy) / ir.enstrophy_scale);
      if (schemes[k] == PVScheme::APVM)
        r.enstrophy_apvm_max = std::max(r.enstrophy_apvm_max, ir.enstrophy / ir.enstrophy_scale);
    }

    // Mass consistency: f such that q = c.
    ModelParams pc = p;
    pc.f = consistent_coriolis_primal(sp, st, c);
    for (PVScheme s : schemes) {
      const PrimalTendency t = primal_rhs(sp, st, pc, scheme_config(s, ref));
      const InvariantRates ir = invariant_rates(sp, st, pc, t);
      r.pv_consistency_projection =
        std::max(r.pv_consistency_projection, ir.q_t.cwiseAbs().maxCoeff() / c);
    }
    const DGField D0f = dg0.from_means(st.D);
    const DGField Dt0 = dg_depth_rhs(dg0, D0f, st.u);
    const RecoveredFlux rf0 = recover_flux_fortin(dg0, D0f, st.u, Dt0);
    {
      const PrimalTendency t = primal_rhs(sp, st, pc, scheme_config(PVScheme::EnergyEnstrophy, ref), &rf0.F);
      const InvariantRates ir = invariant_rates(sp, st, pc, t);
      r.pv_consistency_upwind = std::max(r.pv_consistency_upwind, ir.q_t.cwiseAbs().maxCoeff() / c);
      const Vector Dt = dg0.means(Dt0);
      r.recovery_p0 = std::max(r.recovery_p0, (Dt + sp.D12() * rf0.F).cwiseAbs().maxCoeff() /
                                                 Dt.cwiseAbs().maxCoeff());
    }
    if (ops) {
      ModelParams pd = p;
      pd.f = consistent_coriolis_dual(*ops, st, c);
      for (const Vector *F : {static_cast<const Vector *>(nullptr), &rf0.F}) {
        const DualTendency t = dual_rhs(*ops, st, pd, F);
        r.pv_consistency_dual =
          std::max(r.pv_consistency_dual, dual_pv_tendency(*ops, st, t).cwiseAbs().maxCoeff() / c);
      }
    }

    if (dg1) {
      const DGSpace &dg = *dg1;
      const DGField D = rough_depth(dg, ref.D0, sd);
      const DGField Dt = dg_depth_rhs(dg, D, st.u);
      const RecoveredFlux rf = recover_flux_fortin(dg, D, st.u, Dt);
      r.recovery_q1 =
        std::max(r.recovery_q1, (Dt + rt1_divergence_field(dg, rf.local)).cwiseAbs().maxCoeff() /
                                  Dt.cwiseAbs().maxCoeff());
      const DGField S = slope_limit(dg, D);
      const LimiterFlux lf = recover_limiter_flux(dg, D, S);
      const double e = (rt1_divergence_field(dg, lf.local) - (S - D)).cwiseAbs().maxCoeff();
      r.limiter_divergence_abs = std::max(r.limiter_divergence_abs, e);
      r.limiter_divergence_rel = std::max(r.limiter_divergence_rel, e / ref.D0);

      // Limited step: D_t = (S(D + dt D_t) - D) / dt carried by F - F_s / dt.
      const double dt = 100.0;
      const DGField Sl = slope_limit(dg, D + dt * Dt);
      const LimiterFlux lfl = recover_limiter_flux(dg, D + dt * Dt, Sl);
      const Vector q = Vector::Constant(sp.n0(), c);
      const Vector qt = pv_tendency_dg(dg, D, (Sl - D) / dt, rf.local - lfl.local / dt, q);
      r.pv_consistency_dg_limited =
        std::max(r.pv_consistency_dg_limited, qt.cwiseAbs().maxCoeff() / c);
    }
  }
  return r;
}

double linear_formulation_gap(const DualOperators &ops, const Reference &ref, int n_states,
                              std::uint64_t seed)
{
  const SpaceComplex &sp = *ops.primal;
  double worst = 0.0;
  for (int n = 0; n < n_states; ++n) {
    const State st = random_state(sp, ref, seed + static_cast<std::uint64_t>(n));
    const State pert{st.u, (st.D.array() - ref.D0).matrix()};
    const State a = linear_primal_rhs(sp, pert, ref.D0, ref.f0, ref.g);
    const State b = linear_dual_rhs(ops, pert, ref.D0, ref.f0, ref.g);
    worst = std::max({worst, rel(a.u, b.u), rel(a.D, b.D)});
  }
  return worst;
}

}  // namespace feec
