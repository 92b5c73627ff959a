// SPDX-License-Identifier: Apache-2.0

#include "feec/swe_dual.hpp"

#include <cmath>

namespace feec
{

namespace
{

int slot_of(const Mesh &m, int e, int c, int sign)
{
  for (const auto &[cc, k] : m.edge_cells(e))
    if (cc == c && m.cell(cc).signs[k] == sign)
      return k;
  throw MeshError("edge " + std::to_string(e) + " is not on cell " + std::to_string(c));
}

// Parameter along p + s (q - p) where it meets the line through a, b.
double crossing(const Vec2 &p, const Vec2 &q, const Vec2 &a, const Vec2 &b)
{
  const Vec2 d = q - p, t = b - a;
  const double den = cross(d, t);
  if (std::abs(den) <= 1e-14 * d.norm() * t.norm())
    throw MeshError("dual edge is parallel to its primal edge");
  return cross(a - p, t) / den;
}

std::vector<std::vector<DualOperators::FluxPoint>> build_edge_rules(const SpaceComplex &sp)
{
  const Mesh &m = sp.mesh();
  const double g = 0.5 / std::sqrt(3.0);
  std::vector<std::vector<DualOperators::FluxPoint>> rules(m.num_edges());
  for (int e = 0; e < m.num_edges(); ++e) {
    const int cl = m.left_cell(e), cr = m.right_cell(e);
    const int kl = slot_of(m, e, cl, 1), kr = slot_of(m, e, cr, -1);
    const auto &pl = m.cell_points(cl), &pr = m.cell_points(cr);
    const Vec2 a = pl[kl], b = pl[(kl + 1) % pl.size()];
    // Right-cell frame to left-cell frame.
    const Vec2 T = 0.5 * (a + b) - 0.5 * (pr[kr] + pr[(kr + 1) % pr.size()]);
    const Vec2 gl = m.cell_centroid(cl), gr = m.cell_centroid(cr) + T;
    const Vec2 t = gr - gl;
    const Vec2 n(t.y(), -t.x());
    const double sc = crossing(gl, gr, a, b);
    if (!(sc > 0.0 && sc < 1.0))
      throw MeshError("dual edge does not cross its primal edge");
    // Two-point Gauss on [0, sc] in the left cell and [sc, 1] in the right cell.
    const std::array<std::pair<double, double>, 2> segs{{{0.0, sc}, {sc, 1.0}}};
    for (int s = 0; s < 2; ++s) {
      const auto [s0, s1] = segs[s];
      const int c = s == 0 ? cl : cr;
      const Vec2 shift = s == 0 ? Vec2::Zero() : T;
      const auto &el = sp.element(c);
      const int piece = el.locate(gl + 0.5 * (s0 + s1) * t - shift);
      for (double xi : {0.5 - g, 0.5 + g}) {
        const double sig = s0 + xi * (s1 - s0);
        rules[e].push_back({c, piece, gl + sig * t - shift, 0.5 * (s1 - s0) * n});
      }
    }
  }
  return rules;
}

}  // namespace

std::shared_ptr<const DualOperators> build_dual_operators(std::shared_ptr<const SpaceComplex> primal,
                                                          const HodgeOptions &opt)
{
  if (!primal)
    throw Error("dual operators need a primal space");
  auto dual = build_space_complex(build_dual_mesh(primal->mesh()), Family::P1_N0_P0);
  HodgeStar H0 = build_hodge_star(primal, dual, 0, opt);
  HodgeStar H1 = build_hodge_star(primal, dual, 1, opt);
  HodgeStar H2 = build_hodge_star(primal, dual, 2, opt);
  std::vector<Triplet> t;
  for (const auto &q : overlap_quadrature(*primal, *dual))
    t.emplace_back(q.primal_cell, q.dual_cell, q.w);
  SparseMatrix ov(primal->n2(), dual->n2());
  ov.setFromTriplets(t.begin(), t.end());
  auto rules = build_edge_rules(*primal);
  return std::make_shared<const DualOperators>(DualOperators{
    primal, dual, std::move(H0), std::move(H1), std::move(H2), std::move(ov), std::move(rules)});
}

Vector dual_edge_fluxes(const DualOperators &ops, const Vector &F)
{
  const SpaceComplex &sp = *ops.primal;
  if (F.size() != sp.n1())
    throw Error("flux vector has the wrong size");
  Vector out = Vector::Zero(sp.n1());
  BasisValues bv;
  for (int e = 0; e < sp.n1(); ++e)
    for (const auto &fp : ops.edge_rules[e]) {
      sp.element(fp.cell).evaluate(fp.piece, fp.x, bv);
      out[e] += (bv.w * sp.local1(fp.cell, F)).dot(fp.nds);
    }
  return out;
}

Vector dual_velocity(const DualOperators &ops, const Vector &u)
{
  const Vector v = ops.H1.apply_inverse(u);
  const double res = (ops.H1.apply(v) - u).norm();
  if (res > 1e-11 * u.norm())
    throw SolverError("dual velocity round trip failed", 1, res);
  return v;
}

Vector dual_vorticity(const DualOperators &ops, const Vector &v)
{
  return ops.dual->D12() * v;
}

Vector dual_depth_integrals(const DualOperators &ops, const Vector &D)
{
  return ops.overlap.transpose() * D;
}

Vector diagnose_dual_pv(const DualOperators &ops, const Vector &zeta_d, const Vector &D,
                        const Vector &f)
{
  const Vector DD = dual_depth_integrals(ops, D);
  if ((DD.array() <= 0.0).any())
    throw Error("depth integrated over a dual cell is not positive");
  const Vector num = ops.dual->areas().cwiseProduct(zeta_d) + ops.H2.W().transpose() * f;
  return num.cwiseQuotient(DD);
}

DualState diagnose_dual(const DualOperators &ops, const State &s, const ModelParams &p)
{
  DualState d;
  d.v = dual_velocity(ops, s.u);
  d.zeta_d = dual_vorticity(ops, d.v);
  d.q_d = diagnose_dual_pv(ops, d.zeta_d, s.D, p.f);
  return d;
}

DualQ dual_pv_step_flux(const DualOperators &ops, const Vector &q_d, const Vector &F)
{
  const Mesh &dm = ops.dual->mesh();
  DualQ out;
  out.flux = dual_edge_fluxes(ops, F);
  out.q_upwind.resize(dm.num_edges());
  out.Qtilde.resize(dm.num_edges());
  // Lowest order: the dual V1 space has edge moments only, so conditions on interior
  // moments are empty and Qtilde is fixed by the upwind edge values.
  for (int e = 0; e < dm.num_edges(); ++e) {
    const double fl = out.flux[e];
    const int l = dm.left_cell(e), r = dm.right_cell(e);
    const double qu = fl > 0.0 ? q_d[l] : (fl < 0.0 ? q_d[r] : 0.5 * (q_d[l] + q_d[r]));
    out.q_upwind[e] = qu;
    out.Qtilde[e] = qu * fl;
  }
  return out;
}

Vector dual_velocity_rhs(const DualOperators &ops, const State &s, const ModelParams &p,
                         const Vector &Qtilde)
{
  const SpaceComplex &sp = *ops.primal;
  const Vector Phi = bernoulli_potential(sp, s, p);
  return sp.solve_mass(1, sp.B12().transpose() * Phi) - ops.H1.apply(Qtilde);
}

DualTendency dual_rhs(const DualOperators &ops, const State &s, const ModelParams &p,
                      const Vector *F)
{
  const SpaceComplex &sp = *ops.primal;
  check_params(sp, p);
  check_state(sp, s);
  DualTendency t;
  t.F = F ? *F : compute_mass_flux_F(sp, s);
  t.dual = diagnose_dual(ops, s, p);
  t.Q = dual_pv_step_flux(ops, t.dual.q_d, t.F);
  t.u_t = dual_velocity_rhs(ops, s, p, t.Q.Qtilde);
  t.D_t = depth_rhs_projection(sp, t.F);
  return t;
}

Vector dual_pv_tendency(const DualOperators &ops, const State &s, const DualTendency &t)
{
  const Vector zt = dual_vorticity(ops, ops.H1.apply_inverse(t.u_t));
  const Vector DD = dual_depth_integrals(ops, s.D);
  const Vector rhs = ops.dual->areas().cwiseProduct(zt) -
                     t.dual.q_d.cwiseProduct(dual_depth_integrals(ops, t.D_t));
  return rhs.cwiseQuotient(DD);
}

namespace
{

void check_linear(const SpaceComplex &sp, const State &s, double D0, double g)
{
  if (s.u.size() != sp.n1() || s.D.size() != sp.n2())
    throw Error("perturbation does not match the space dimensions");
  if (!(D0 > 0.0) || !(g > 0.0))
    throw Error("mean depth and gravity must be positive");
}

}  // namespace

State linear_primal_rhs(const SpaceComplex &space, const State &s, double D0, double f0, double g)
{
  check_linear(space, s, D0, g);
  // Constant PV f0 / D0 carried by F = D0 u gives the load f0 int w . perp(u).
  State mean{s.u, Vector::Constant(space.n2(), D0)};
  const Vector q = Vector::Constant(space.n0(), f0 / D0);
  const QFlux Q = compute_Q(space, mean, StabilizationConfig{}, D0 * s.u, q);
  State out;
  out.u = space.solve_mass(1, space.B12().transpose() * (g * s.D) - Q.coriolis_load);
  out.D = -D0 * (space.D12() * s.u);
  return out;
}

State linear_dual_rhs(const DualOperators &ops, const State &s, double D0, double f0, double g)
{
  const SpaceComplex &sp = *ops.primal;
  check_linear(sp, s, D0, g);
  const DualQ Q = dual_pv_step_flux(ops, Vector::Constant(ops.dual->n2(), f0 / D0), D0 * s.u);
  State out;
  out.u = sp.solve_mass(1, sp.B12().transpose() * (g * s.D)) - ops.H1.apply(Q.Qtilde);
  out.D = -D0 * (sp.D12() * s.u);
  return out;
}

}  // namespace feec
