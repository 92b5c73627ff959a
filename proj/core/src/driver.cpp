// SPDX-License-Identifier: Apache-2.0

#include "feec/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace feec
{

namespace fs = std::filesystem;

Reference reference_of(const RunConfig &c)
{
  return Reference{c.D0, c.g, c.f0};
}

StabilizationConfig stabilization_of(const RunConfig &c)
{
  StabilizationConfig s;
  s.scheme = c.scheme;
  s.tau_apvm = c.tau_apvm.value_or(0.5 * c.dt);
  s.alpha_supg = c.alpha_supg;
  s.reference_speed = std::sqrt(c.g * c.D0);
  return s;
}

std::shared_ptr<const SpaceComplex> space_of(const RunConfig &c)
{
  return build_space_complex(build_periodic_mesh(c.mesh, c.nx, c.ny, c.Lx, c.Ly),
                             Family::P1_RT0_P0);
}

double mesh_spacing(const SpaceComplex &space)
{
  return std::sqrt(space.areas().minCoeff());
}

double cfl_number(const SpaceComplex &space, const State &s, double g, double D0, double dt)
{
  return (max_speed(space, s.u) + std::sqrt(g * D0)) * dt / mesh_spacing(space);
}

namespace
{

std::string num(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string context(int step, double time)
{
  std::ostringstream os;
  os << "step " << step << ", t = " << num(time) << " s";
  return os.str();
}

}  // namespace

Simulation::Simulation(const RunConfig &config) : config_(config)
{
  validate_config(config_);
  const auto space = space_of(config_);
  const Reference ref = reference_of(config_);
  const StabilizationConfig stab = stabilization_of(config_);
  case_ = setup_test_case(config_.test_case, *space, ref, stab, config_.seed);
  ModelOptions opt;
  opt.formulation = config_.formulation;
  opt.depth_scheme = config_.depth_scheme;
  opt.limiter = config_.limiter;
  opt.stabilization = stab;
  model_ = std::make_unique<Model>(space, case_.params, opt);
  state_ = case_.state;
  check_state(*space, state_);
  mass0_ = space->areas().dot(state_.D);

  cfl_ = cfl_number(*space, state_, config_.g, config_.D0, config_.dt);
  if (cfl_ > 2.0)
    warnings_.push_back("CFL number " + num(cfl_) + " exceeds 2");
  if (config_.integrator == Integrator::SSPRK3 && cfl_ > config_.cfl_max)
    throw Error("CFL number " + num(cfl_) + " exceeds cfl_max = " + num(config_.cfl_max) +
                " for explicit stepping; reduce dt");
  if (config_.integrator == Integrator::SemiImplicit)
    implicit_ = std::make_unique<SemiImplicitStepper>(space, config_.D0, config_.f0, config_.g,
                                                      config_.dt, config_.picard_iters,
                                                      config_.solver_rtol,
                                                      config_.solver_max_iters);
}

void Simulation::step()
{
  const SpaceComplex &sp = model_->space();
  const bool supg = config_.formulation == Formulation::Primal &&
                    config_.scheme == PVScheme::SUPG;
  // SUPG tendency of the PV equation: backward difference over the previous step, zero at
  // the first step.
  PVTendencyContext ctx{Vector::Zero(sp.n0()), Vector::Zero(sp.n2())};
  Vector q_now;
  if (supg) {
    q_now = diagnose_pv(sp, state_, model_->params());
    if (step_ > 0) {
      ctx.q_t = (q_now - q_prev_) / config_.dt;
      ctx.D_t = (state_.D - D_prev_) / config_.dt;
    }
  }
  const RhsFn rhs = [&](const State &s) { return model_->rhs(s, supg ? &ctx : nullptr); };
  const StageFn stage = [&](State &s) { return model_->limit(s); };
  StepResult r;
  try {
    if (implicit_) {
      stats_ = SemiImplicitStats{};
      r = implicit_->step(rhs, state_, &stats_);
    } else {
      r = step_ssprk3(rhs, state_, config_.dt, config_.limiter ? stage : StageFn{});
    }
  } catch (const NonPositiveDepth &e) {
    throw NonPositiveDepth(context(step_, time()) + ": " + e.what(), e.state(), e.cell());
  } catch (const std::exception &e) {
    throw Error(context(step_, time()) + ": " + e.what());
  }
  const double m_old = sp.areas().dot(state_.D), m_new = sp.areas().dot(r.state.D);
  last_mass_change_ = std::abs(m_new - m_old) / std::abs(mass0_);
  if (supg) {
    q_prev_ = std::move(q_now);
    D_prev_ = state_.D;
  }
  state_ = std::move(r.state);
  ++step_;
}

std::string diagnostics_row(int step, double time, const Diagnostics &d)
{
  std::ostringstream os;
  os << step << ',' << num(time) << ',' << num(d.mass) << ',' << num(d.energy) << ','
     << num(d.enstrophy) << ',' << num(d.total_vorticity) << ',' << num(d.q_min) << ','
     << num(d.q_max) << ',' << num(d.d_min);
  return os.str();
}

void write_vtk(const std::string &path, const Model &model, const State &s, double time)
{
  const SpaceComplex &sp = model.space();
  const Mesh &m = sp.mesh();
  std::ofstream f(path);
  if (!f)
    throw Error("cannot write snapshot '" + path + "'");
  f << std::setprecision(17);
  f << "# vtk DataFile Version 3.0\nshallow water snapshot t=" << num(time)
    << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  std::size_t npts = 0;
  for (int c = 0; c < m.num_cells(); ++c)
    npts += m.cell_points(c).size();
  f << "POINTS " << npts << " double\n";
  for (int c = 0; c < m.num_cells(); ++c)
    for (const Vec2 &p : m.cell_points(c))
      f << p.x() << ' ' << p.y() << " 0\n";
  f << "CELLS " << m.num_cells() << ' ' << npts + m.num_cells() << '\n';
  std::size_t next = 0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const std::size_t k = m.cell_points(c).size();
    f << k;
    for (std::size_t i = 0; i < k; ++i)
      f << ' ' << next++;
    f << '\n';
  }
  f << "CELL_TYPES " << m.num_cells() << '\n';
  for (int c = 0; c < m.num_cells(); ++c)
    f << "7\n";

  // PV at primal vertices (primal) or dual cells, which are the primal vertices.
  const Vector q = model.pv(s);
  f << "CELL_DATA " << m.num_cells() << '\n';
  auto scalar = [&](const char *name, auto &&value) {
    f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < m.num_cells(); ++c)
      f << value(c) << '\n';
  };
  scalar("D", [&](int c) { return s.D[c]; });
  scalar("b", [&](int c) { return model.params().b[c]; });
  scalar("q", [&](int c) {
    const auto &v = m.cell(c).verts;
    double acc = 0.0;
    for (int i : v)
      acc += q[i];
    return acc / static_cast<double>(v.size());
  });
  f << "VECTORS u double\n";
  BasisValues bv;
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto &el = sp.element(c);
    const Vec2 x = m.cell_centroid(c);
    el.evaluate(el.locate(x), x, bv);
    const Vec2 u = bv.w * sp.local1(c, s.u);
    f << u.x() << ' ' << u.y() << " 0\n";
  }
  if (!f)
    throw Error("failed while writing snapshot '" + path + "'");
}

std::string summary_json(const RunConfig &c, const RunSummary &s)
{
  using nlohmann::json;
  auto diag = [](const Diagnostics &d) {
    return json{{"mass", d.mass},       {"energy", d.energy}, {"enstrophy", d.enstrophy},
                {"total_vorticity", d.total_vorticity},     {"q_min", d.q_min},
                {"q_max", d.q_max},     {"d_min", d.d_min}};
  };
  json j;
  j["config"] = {{"formulation", to_string(c.formulation)},
                 {"mesh", to_string(c.mesh)},
                 {"nx", c.nx},
                 {"ny", c.ny},
                 {"scheme", to_string(c.scheme)},
                 {"depth_scheme", to_string(c.depth_scheme)},
                 {"integrator", to_string(c.integrator)},
                 {"test_case", c.test_case},
                 {"dt", c.dt},
                 {"n_steps", c.n_steps},
                 {"seed", c.seed}};
  j["steps"] = s.steps;
  j["time"] = s.time;
  j["initial"] = diag(s.initial);
  j["final"] = diag(s.final);
  j["drift"] = {{"mass", s.mass_drift},
                {"energy", s.energy_drift},
                {"enstrophy", s.enstrophy_drift},
                {"total_vorticity", s.vorticity_drift},
                {"max_step_mass", s.max_step_mass_change},
                {"velocity", s.velocity_drift}};
  j["balance_residual"] = s.balance_residual;
  j["cfl"] = s.cfl;
  j["runtime_seconds"] = {{"setup", s.setup_seconds}, {"run", s.run_seconds}};
  j["solver"] = {{"krylov_iterations_total", s.krylov_iters_total},
                 {"krylov_iterations_max", s.krylov_iters_max},
                 {"krylov_residual_max", s.krylov_residual_max},
                 {"picard_increment_max", s.picard_increment_max}};
  j["warnings"] = s.warnings;
  j["artifacts"] = {{"csv", s.csv_path}, {"snapshots", s.snapshots}};
  return j.dump(2);
}

namespace
{

double rel(double a, double b)
{
  const double s = std::abs(b);
  return s > 0.0 ? std::abs(a - b) / s : std::abs(a - b);
}

}  // namespace

RunSummary run(const RunConfig &config, std::ostream *log)
{
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  Simulation sim(config);
  RunSummary out;
  out.setup_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  out.cfl = sim.initial_cfl();
  out.balance_residual = sim.test_case().balance_residual;
  out.warnings = sim.warnings();
  if (log)
    for (const auto &w : out.warnings)
      *log << "warning: " << w << '\n';

  fs::create_directories(config.output_dir);
  const fs::path dir(config.output_dir);
  out.csv_path = (dir / (config.name + ".csv")).string();
  out.summary_path = (dir / (config.name + "_summary.json")).string();
  std::ofstream csv(out.csv_path, std::ios::binary);
  if (!csv)
    throw Error("cannot write diagnostics '" + out.csv_path + "'");
  csv << kDiagnosticsHeader << '\n';

  const Model &model = sim.model();
  auto snapshot = [&]() {
    char name[64];
    std::snprintf(name, sizeof name, "_%06d.vtk", sim.step_index());
    const std::string path = (dir / (config.name + name)).string();
    write_vtk(path, model, sim.state(), sim.time());
    out.snapshots.push_back(path);
  };

  out.initial = model.diagnostics(sim.state());
  csv << diagnostics_row(0, 0.0, out.initial) << '\n';
  if (config.snapshot_every > 0)
    snapshot();
  const Vector u0 = sim.state().u;

  const auto t1 = clock::now();
  Diagnostics d = out.initial;
  for (int n = 0; n < config.n_steps; ++n) {
    try {
      sim.step();
    } catch (const NonPositiveDepth &e) {
      const std::string path = (dir / (config.name + "_failure.vtk")).string();
      write_vtk(path, model, e.state(), sim.time() + config.dt);
      throw Error(std::string(e.what()) + " (state dumped to " + path + ")");
    }
    out.max_step_mass_change = std::max(out.max_step_mass_change, sim.last_mass_change());
    const SemiImplicitStats &st = sim.last_stats();
    out.krylov_iters_total += st.krylov_iters;
    out.krylov_iters_max = std::max(out.krylov_iters_max, st.krylov_iters);
    out.krylov_residual_max = std::max(out.krylov_residual_max, st.krylov_residual);
    out.picard_increment_max = std::max(out.picard_increment_max, st.picard_increment);
    const bool last = n + 1 == config.n_steps;
    if (sim.step_index() % config.output_every == 0 || last) {
      d = model.diagnostics(sim.state());
      csv << diagnostics_row(sim.step_index(), sim.time(), d) << '\n';
    }
    if (config.snapshot_every > 0 && (sim.step_index() % config.snapshot_every == 0 || last))
      snapshot();
    if (log && (sim.step_index() % std::max(1, config.n_steps / 10) == 0 || last))
      *log << "step " << sim.step_index() << "/" << config.n_steps << "  t = " << sim.time()
           << " s  energy = " << num(d.energy) << '\n';
  }
  out.run_seconds = std::chrono::duration<double>(clock::now() - t1).count();
  if (!csv)
    throw Error("failed while writing diagnostics '" + out.csv_path + "'");

  out.steps = sim.step_index();
  out.time = sim.time();
  out.final = model.diagnostics(sim.state());
  out.mass_drift = rel(out.final.mass, out.initial.mass);
  out.energy_drift = rel(out.final.energy, out.initial.energy);
  out.enstrophy_drift = rel(out.final.enstrophy, out.initial.enstrophy);
  const double fscale = (model.space().M0() * model.params().f.cwiseAbs()).sum();
  out.vorticity_drift = std::abs(out.final.total_vorticity - out.initial.total_vorticity) /
                        (fscale > 0.0 ? fscale : 1.0);
  const double un = u0.norm();
  out.velocity_drift = un > 0.0 ? (sim.state().u - u0).norm() / un : sim.state().u.norm();

  std::ofstream js(out.summary_path);
  if (!js)
    throw Error("cannot write summary '" + out.summary_path + "'");
  js << summary_json(config, out) << '\n';
  return out;
}

std::vector<ConvergenceRow> gravity_wave_convergence(const RunConfig &config,
                                                     std::ostream *log)
{
  validate_config(config);
  const Reference ref = reference_of(config);
  const double eps = 1e-3 * config.D0;
  const double k = 2.0 * std::numbers::pi / config.Lx;
  const double omega = gravity_wave_frequency(ref, config.Lx);
  // A whole number of periods would hide the phase error (it enters at second order there).
  const double T =
    config.final_time > 0.0 ? config.final_time : 1.25 * 2.0 * std::numbers::pi / omega;
  const double c = std::sqrt(config.g * config.D0);

  std::vector<ConvergenceRow> rows;
  for (int level = 0; level <= config.refinements; ++level) {
    RunConfig rc = config;
    rc.nx = config.nx << level;
    rc.ny = config.ny << level;
    const auto space = space_of(rc);
    const SpaceComplex &sp = *space;
    const double h = mesh_spacing(sp);
    // Time step tied to h so either integrator's time error scales with the spatial one.
    const double cfl = config.integrator == Integrator::SSPRK3 ? 0.2 : 0.5;
    const int steps = static_cast<int>(std::ceil(T * c / (cfl * h)));
    const double dt = T / steps;

    std::shared_ptr<const DualOperators> ops;
    if (config.formulation == Formulation::PrimalDual)
      ops = build_dual_operators(space);
    const RhsFn lin = [&](const State &s) {
      const State pert{s.u, (s.D.array() - ref.D0).matrix()};
      State r = ops ? linear_dual_rhs(*ops, pert, ref.D0, ref.f0, ref.g)
                    : linear_primal_rhs(sp, pert, ref.D0, ref.f0, ref.g);
      return Rate{std::move(r), ref.D0 * s.u};
    };
    State s{Vector::Zero(sp.n1()),
            sp.project_scalar(2, [&](const Vec2 &x) { return ref.D0 + eps * std::cos(k * x.x()); })};
    if (config.integrator == Integrator::SSPRK3) {
      for (int n = 0; n < steps; ++n)
        s = step_ssprk3(lin, s, dt).state;
    } else {
      SemiImplicitStepper si(space, ref.D0, ref.f0, ref.g, dt, 1, 1e-13, config.solver_max_iters);
      for (int n = 0; n < steps; ++n)
        s = si.step(lin, s).state;
    }
    const double amp = gravity_wave_amplitude(ref, config.Lx, eps, T);
    const Vector exact =
      sp.project_scalar(2, [&](const Vec2 &x) { return ref.D0 + amp * std::cos(k * x.x()); });
    const Vector e = s.D - exact;
    ConvergenceRow row{rc.nx, rc.ny, h, dt, steps, std::sqrt(e.cwiseAbs2().dot(sp.areas())), 0.0};
    if (!rows.empty())
      row.slope = std::log(rows.back().error / row.error) / std::log(rows.back().h / row.h);
    rows.push_back(row);
    if (log)
      *log << "n = " << rc.nx << "x" << rc.ny << "  steps = " << steps
           << "  error = " << num(row.error) << '\n';
  }
  return rows;
}

std::string convergence_table(const std::vector<ConvergenceRow> &rows)
{
  std::ostringstream os;
  os << "nx,ny,h,dt,steps,error,slope\n";
  for (const auto &r : rows)
    os << r.nx << ',' << r.ny << ',' << num(r.h) << ',' << num(r.dt) << ',' << r.steps << ','
       << num(r.error) << ',' << (rows.front().nx == r.nx ? std::string("") : num(r.slope))
       << '\n';
  return os.str();
}

}  // namespace feec
