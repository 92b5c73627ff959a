// SPDX-License-Identifier: Apache-2.0

#include "feec/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace feec
{

std::string to_string(Formulation f)
{
  return f == Formulation::Primal ? "primal" : "primal_dual";
}

std::string to_string(DepthScheme d)
{
  return d == DepthScheme::Projection ? "projection" : "upwind";
}

std::string to_string(Integrator i)
{
  return i == Integrator::SSPRK3 ? "ssprk3" : "semi_implicit";
}

namespace
{

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &v)
{
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size())
    throw Error("not a number: '" + v + "'");
  return x;
}

long long to_int(const std::string &v)
{
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error("not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string &v)
{
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw Error("not a boolean: '" + v + "'");
}

using Setter = std::function<void(RunConfig &, const std::string &)>;

const std::map<std::string, Setter> &setters()
{
  static const std::map<std::string, Setter> s{
    {"formulation",
     [](RunConfig &c, const std::string &v) {
       if (v == "primal")
         c.formulation = Formulation::Primal;
       else if (v == "primal_dual")
         c.formulation = Formulation::PrimalDual;
       else
         throw Error("unknown formulation '" + v + "'");
     }},
    {"mesh", [](RunConfig &c, const std::string &v) { c.mesh = cell_kind_from_string(v); }},
    {"nx", [](RunConfig &c, const std::string &v) { c.nx = static_cast<int>(to_int(v)); }},
    {"ny", [](RunConfig &c, const std::string &v) { c.ny = static_cast<int>(to_int(v)); }},
    {"Lx", [](RunConfig &c, const std::string &v) { c.Lx = to_double(v); }},
    {"Ly", [](RunConfig &c, const std::string &v) { c.Ly = to_double(v); }},
    {"family", [](RunConfig &c, const std::string &v) { c.family = v; }},
    {"scheme", [](RunConfig &c, const std::string &v) { c.scheme = pv_scheme_from_string(v); }},
    {"tau_apvm", [](RunConfig &c, const std::string &v) { c.tau_apvm = to_double(v); }},
    {"alpha_supg", [](RunConfig &c, const std::string &v) { c.alpha_supg = to_double(v); }},
    {"depth_scheme",
     [](RunConfig &c, const std::string &v) {
       if (v == "projection")
         c.depth_scheme = DepthScheme::Projection;
       else if (v == "upwind")
         c.depth_scheme = DepthScheme::Upwind;
       else
         throw Error("unknown depth scheme '" + v + "'");
     }},
    {"limiter", [](RunConfig &c, const std::string &v) { c.limiter = to_bool(v); }},
    {"integrator",
     [](RunConfig &c, const std::string &v) {
       if (v == "ssprk3")
         c.integrator = Integrator::SSPRK3;
       else if (v == "semi_implicit")
         c.integrator = Integrator::SemiImplicit;
       else
         throw Error("unknown integrator '" + v + "'");
     }},
    {"dt", [](RunConfig &c, const std::string &v) { c.dt = to_double(v); }},
    {"n_steps", [](RunConfig &c, const std::string &v) { c.n_steps = static_cast<int>(to_int(v)); }},
    {"picard_iters",
     [](RunConfig &c, const std::string &v) { c.picard_iters = static_cast<int>(to_int(v)); }},
    {"solver_rtol", [](RunConfig &c, const std::string &v) { c.solver_rtol = to_double(v); }},
    {"solver_max_iters",
     [](RunConfig &c, const std::string &v) { c.solver_max_iters = static_cast<int>(to_int(v)); }},
    {"cfl_max", [](RunConfig &c, const std::string &v) { c.cfl_max = to_double(v); }},
    {"test_case", [](RunConfig &c, const std::string &v) { c.test_case = v; }},
    {"seed", [](RunConfig &c, const std::string &v) { c.seed = static_cast<std::uint64_t>(to_int(v)); }},
    {"D0", [](RunConfig &c, const std::string &v) { c.D0 = to_double(v); }},
    {"g", [](RunConfig &c, const std::string &v) { c.g = to_double(v); }},
    {"f0", [](RunConfig &c, const std::string &v) { c.f0 = to_double(v); }},
    {"output_every",
     [](RunConfig &c, const std::string &v) { c.output_every = static_cast<int>(to_int(v)); }},
    {"snapshot_every",
     [](RunConfig &c, const std::string &v) { c.snapshot_every = static_cast<int>(to_int(v)); }},
    {"output_dir", [](RunConfig &c, const std::string &v) { c.output_dir = v; }},
    {"name", [](RunConfig &c, const std::string &v) { c.name = v; }},
    {"refinements",
     [](RunConfig &c, const std::string &v) { c.refinements = static_cast<int>(to_int(v)); }},
    {"final_time", [](RunConfig &c, const std::string &v) { c.final_time = to_double(v); }},
  };
  return s;
}

}  // namespace

RunConfig parse_config(const std::string &text)
{
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw Error("config line " + std::to_string(no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw Error("config line " + std::to_string(no) + ": duplicate key '" + key + "'");
    if (value.empty())
      throw Error("config line " + std::to_string(no) + ": empty value for '" + key + "'");
    try {
      it->second(c, value);
    } catch (const std::exception &e) {
      throw Error("config line " + std::to_string(no) + " (" + key + "): " + e.what());
    }
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string &path)
{
  std::ifstream f(path);
  if (!f)
    throw Error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig &c)
{
  std::ostringstream o;
  o.precision(17);
  o << "formulation = " << to_string(c.formulation) << "\n"
    << "mesh = " << to_string(c.mesh) << "\n"
    << "nx = " << c.nx << "\nny = " << c.ny << "\nLx = " << c.Lx << "\nLy = " << c.Ly << "\n"
    << "family = " << c.family << "\n"
    << "scheme = " << to_string(c.scheme) << "\n";
  if (c.tau_apvm)
    o << "tau_apvm = " << *c.tau_apvm << "\n";
  o << "alpha_supg = " << c.alpha_supg << "\n"
    << "depth_scheme = " << to_string(c.depth_scheme) << "\n"
    << "limiter = " << (c.limiter ? "true" : "false") << "\n"
    << "integrator = " << to_string(c.integrator) << "\n"
    << "dt = " << c.dt << "\nn_steps = " << c.n_steps << "\npicard_iters = " << c.picard_iters
    << "\nsolver_rtol = " << c.solver_rtol << "\nsolver_max_iters = " << c.solver_max_iters
    << "\ncfl_max = " << c.cfl_max << "\ntest_case = " << c.test_case << "\nseed = " << c.seed
    << "\nD0 = " << c.D0 << "\ng = " << c.g << "\nf0 = " << c.f0
    << "\noutput_every = " << c.output_every << "\nsnapshot_every = " << c.snapshot_every
    << "\noutput_dir = " << c.output_dir << "\nname = " << c.name
    << "\nrefinements = " << c.refinements << "\nfinal_time = " << c.final_time << "\n";
  return o.str();
}

void validate_config(const RunConfig &c)
{
  auto need = [](bool ok, const std::string &msg) {
    if (!ok)
      throw Error("invalid config: " + msg);
  };
  need(c.nx >= 2 && c.ny >= 2, "nx and ny must be at least 2");
  need(c.mesh != CellKind::Hexagon || c.ny % 2 == 0, "hexagonal meshes need an even ny");
  need(c.Lx > 0.0 && c.Ly > 0.0, "domain lengths must be positive");
  need(c.family == "p1_rt0_p0", "only the p1_rt0_p0 family is available for the model");
  need(c.dt > 0.0, "dt must be positive");
  need(c.n_steps >= 0, "n_steps must be nonnegative");
  need(c.picard_iters >= 1, "picard_iters must be at least 1");
  need(c.solver_rtol > 0.0 && c.solver_rtol < 1.0, "solver_rtol must lie in (0, 1)");
  need(c.solver_max_iters >= 1, "solver_max_iters must be positive");
  need(c.cfl_max > 0.0, "cfl_max must be positive");
  need(!c.tau_apvm || *c.tau_apvm >= 0.0, "tau_apvm must be nonnegative");
  need(c.alpha_supg >= 0.0, "alpha_supg must be nonnegative");
  need(c.D0 > 0.0 && c.g > 0.0, "D0 and g must be positive");
  need(c.output_every >= 1, "output_every must be at least 1");
  need(c.snapshot_every >= 0, "snapshot_every must be nonnegative");
  need(c.refinements >= 1, "refinements must be at least 1");
  need(c.final_time >= 0.0, "final_time must be nonnegative");
  static const std::set<std::string> cases{"rest", "geostrophic_balance", "gravity_wave", "ridge",
                                           "random"};
  need(cases.count(c.test_case) == 1, "unknown test case '" + c.test_case + "'");
  need(c.formulation == Formulation::Primal || c.scheme == PVScheme::EnergyEnstrophy,
       "the primal_dual formulation uses its own upwind PV flux; leave scheme at energy_enstrophy");
}

}  // namespace feec
