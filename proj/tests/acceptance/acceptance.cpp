// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "feec/checks.hpp"
#include "feec/driver.hpp"

using namespace feec;

namespace
{

// Run-time limits; the pass thresholds live in feec/checks.hpp.
constexpr double kMimeticSeconds = 10.0;
constexpr double kSweepSeconds = 300.0;

constexpr double kL = 1e6;
constexpr std::uint64_t kSeed = 20240601;
const Reference kRef;
const std::array<CellKind, 3> kKinds{CellKind::Triangle, CellKind::Quadrilateral,
                                     CellKind::Hexagon};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<const SpaceComplex> space(CellKind kind, int n)
{
  return build_space_complex(build_periodic_mesh(kind, n, n, kL, kL), Family::P1_RT0_P0);
}

struct Outcome
{
  bool pass = true;
  std::string detail;
};

void note(Outcome &o, bool ok, const char *fmt, auto... args)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  if (!o.detail.empty())
    o.detail += "; ";
  o.detail += buf;
  o.pass = o.pass && ok;
}

Outcome c1_exactness()
{
  Outcome o;
  for (CellKind kind : kKinds) {
    const auto t0 = Clock::now();
    const auto sp = space(kind, 32);
    const long long dd = d_squared_max(sp->mesh());
    const double r = delta_squared_residual(*sp, 100, kSeed);
    const double t = seconds_since(t0);
    note(o, dd == 0 && r <= tolerance::delta_squared && t < kMimeticSeconds,
         "%s: |d12 d01|=%lld delta^2=%.2e %.1fs", to_string(kind).c_str(), dd, r, t);
  }
  return o;
}

Outcome c2_harmonic()
{
  Outcome o;
  for (CellKind kind : kKinds) {
    const HarmonicReport h = harmonic_rank(*space(kind, 12), 50, kSeed, tolerance::harmonic_threshold);
    note(o, h.rank == 2, "%s: rank=%d sv3=%.1e", to_string(kind).c_str(), h.rank,
         h.sv.size() > 2 ? h.sv[2] : 0.0);
  }
  return o;
}

// Conservation reports shared by criteria 3 to 6.
struct Suite
{
  CellKind kind;
  ConservationReport r;
};
std::vector<Suite> &conservation_suites()
{
  static std::vector<Suite> suites;
  if (suites.empty())
    for (CellKind kind : kKinds) {
      const auto sp = space(kind, 8);
      const auto ops = build_dual_operators(sp);
      suites.push_back({kind, conservation_check(sp, ops.get(), kRef, 100, kSeed)});
    }
  return suites;
}

Outcome c3_energy()
{
  Outcome o;
  for (const Suite &s : conservation_suites())
    note(o, s.r.energy[0] <= tolerance::energy && s.r.energy[1] <= tolerance::energy &&
              s.r.energy[2] <= tolerance::energy,
         "%s: EE %.1e APVM %.1e SUPG %.1e", to_string(s.kind).c_str(), s.r.energy[0],
         s.r.energy[1], s.r.energy[2]);
  return o;
}

Outcome c4_enstrophy()
{
  Outcome o;
  for (const Suite &s : conservation_suites())
    note(o, s.r.enstrophy_ee <= tolerance::enstrophy_ee && s.r.enstrophy_apvm_max <= tolerance::enstrophy_apvm,
         "%s: EE %.1e APVM max %.1e", to_string(s.kind).c_str(), s.r.enstrophy_ee,
         s.r.enstrophy_apvm_max);
  return o;
}

Outcome c5_pv_consistency()
{
  Outcome o;
  for (const Suite &s : conservation_suites()) {
    const ConservationReport &r = s.r;
    const bool ok = r.pv_consistency_projection <= tolerance::pv_consistency &&
                    r.pv_consistency_upwind <= tolerance::pv_consistency &&
                    r.pv_consistency_dual <= tolerance::pv_consistency &&
                    r.pv_consistency_dg_limited <= tolerance::pv_consistency;
    note(o, ok && r.dual_checked, "%s: proj %.1e upwind %.1e dual %.1e", to_string(s.kind).c_str(),
         r.pv_consistency_projection, r.pv_consistency_upwind, r.pv_consistency_dual);
    if (r.dg_checked)
      note(o, true, "%s Q1 limited %.1e", to_string(s.kind).c_str(), r.pv_consistency_dg_limited);
  }
  return o;
}

Outcome c6_recovery()
{
  Outcome o;
  bool any_q1 = false;
  for (const Suite &s : conservation_suites()) {
    const ConservationReport &r = s.r;
    note(o, r.recovery_p0 <= tolerance::recovery, "%s: P0 %.1e", to_string(s.kind).c_str(), r.recovery_p0);
    if (r.dg_checked) {
      any_q1 = true;
      note(o, r.recovery_q1 <= tolerance::recovery && r.limiter_divergence_abs <= tolerance::limiter,
           "%s: Q1 %.1e limiter %.1e m (%.1e rel)", to_string(s.kind).c_str(), r.recovery_q1,
           r.limiter_divergence_abs, r.limiter_divergence_rel);
    }
  }
  note(o, any_q1, "%s", any_q1 ? "Q1 checked" : "Q1 not checked");
  return o;
}

Outcome c7_commuting()
{
  Outcome o;
  for (CellKind kind : kKinds)
    for (int n : {8, 16, 24}) {
      const auto ops = build_dual_operators(space(kind, n));
      const CommutingReport c = commuting_check(*ops, 10, kSeed);
      note(o, c.k0 <= tolerance::commuting && c.k1 <= tolerance::commuting && c.sigma_ratio_min > tolerance::sigma_ratio,
           "%s %d: %.1e %.1e sigma %.1e", to_string(kind).c_str(), n, c.k0, c.k1,
           c.sigma_ratio_min);
    }
  return o;
}

Outcome c8_geostrophic()
{
  Outcome o;
  for (CellKind kind : {CellKind::Quadrilateral, CellKind::Hexagon}) {
    RunConfig c;
    c.mesh = kind;
    c.nx = c.ny = 16;
    c.test_case = "geostrophic_balance";
    c.integrator = Integrator::SemiImplicit;
    c.dt = 600.0;
    c.n_steps = 1000;
    Simulation sim(c);
    const Vector u0 = sim.state().u;
    const Diagnostics d0 = sim.model().diagnostics(sim.state());
    double worst_mass = 0.0;
    for (int n = 0; n < c.n_steps; ++n) {
      sim.step();
      worst_mass = std::max(worst_mass, std::abs(sim.last_mass_change()));
    }
    const Diagnostics d1 = sim.model().diagnostics(sim.state());
    const double du = (sim.state().u - u0).norm() / u0.norm();
    const double de = std::abs(d1.energy - d0.energy) / d0.energy;
    const double dm = std::abs(d1.mass - d0.mass) / d0.mass;
    note(o, du <= tolerance::balance_drift && de <= tolerance::balance_drift && dm <= tolerance::balance_mass &&
              worst_mass <= tolerance::balance_mass,
         "%s: |du|/|u| %.1e dE %.1e dM %.1e", to_string(kind).c_str(), du, de, dm);
  }
  return o;
}

Outcome c9_convergence()
{
  Outcome o;
  for (CellKind kind : kKinds) {
    RunConfig c;
    c.mesh = kind;
    c.nx = c.ny = 8;
    c.refinements = 3;
    const auto t0 = Clock::now();
    const auto rows = gravity_wave_convergence(c);
    const double t = seconds_since(t0);
    double slope = INFINITY;
    for (std::size_t i = 1; i < rows.size(); ++i)
      slope = std::min(slope, rows[i].slope);
    note(o, slope >= tolerance::slope && t < kSweepSeconds, "%s: min slope %.3f %.0fs",
         to_string(kind).c_str(), slope, t);
  }
  return o;
}

Outcome c10_linear_equivalence()
{
  Outcome o;
  for (CellKind kind : kKinds) {
    const auto ops = build_dual_operators(space(kind, 8));
    const double gap = linear_formulation_gap(*ops, kRef, 100, kSeed);
    note(o, gap <= tolerance::linear_gap, "%s: gap %.1e", to_string(kind).c_str(), gap);
  }
  return o;
}

}  // namespace

int main()
{
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
    {"exactness of the discrete complex", c1_exactness},
    {"harmonic forms", c2_harmonic},
    {"energy conservation", c3_energy},
    {"enstrophy conservation and dissipation", c4_enstrophy},
    {"PV mass consistency", c5_pv_consistency},
    {"flux recovery and limiter flux", c6_recovery},
    {"commuting Hodge stars", c7_commuting},
    {"steady geostrophic balance", c8_geostrophic},
    {"gravity-wave convergence", c9_convergence},
    {"linear primal and primal-dual equivalence", c10_linear_equivalence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2zu %s: %s [%s] (%.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
