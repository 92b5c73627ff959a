// SPDX-License-Identifier: Apache-2.0

#include "feec/test_cases.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "feec/solvers.hpp"

namespace feec
{

SmoothField::SmoothField(double Lx, double Ly, std::uint64_t seed, int kmax) : Lx_(Lx), Ly_(Ly)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  double total = 0.0;
  for (int ky = -kmax; ky <= kmax; ++ky)
    for (int kx = 0; kx <= kmax; ++kx) {
      if (kx == 0 && ky <= 0)
        continue;
      const double decay = 1.0 / (1.0 + kx * kx + ky * ky);
      Mode m{kx, ky, n(rng) * decay, n(rng) * decay};
      total += std::abs(m.a) + std::abs(m.b);
      modes_.push_back(m);
    }
  for (auto &m : modes_) {
    m.a /= total;
    m.b /= total;
  }
}

double SmoothField::operator()(const Vec2 &x) const
{
  double s = 0.0;
  for (const auto &m : modes_) {
    const double th = 2.0 * std::numbers::pi * (m.kx * x.x() / Lx_ + m.ky * x.y() / Ly_);
    s += m.a * std::cos(th) + m.b * std::sin(th);
  }
  return s;
}

Vec2 SmoothField::gradient(const Vec2 &x) const
{
  Vec2 g = Vec2::Zero();
  for (const auto &m : modes_) {
    const double th = 2.0 * std::numbers::pi * (m.kx * x.x() / Lx_ + m.ky * x.y() / Ly_);
    const double dth = -m.a * std::sin(th) + m.b * std::cos(th);
    g += dth * 2.0 * std::numbers::pi * Vec2(m.kx / Lx_, m.ky / Ly_);
  }
  return g;
}

double max_speed(const SpaceComplex &space, const Vector &u)
{
  double s = 0.0;
  for (int c = 0; c < space.n2(); ++c) {
    const Eigen::VectorXd ul = space.local1(c, u);
    for (const auto &bv : space.element(c).tabulated())
      s = std::max(s, (bv.w * ul).norm());
  }
  return s;
}

State random_state(const SpaceComplex &space, const Reference &ref, std::uint64_t seed)
{
  const double Lx = space.mesh().Lx(), Ly = space.mesh().Ly();
  const SmoothField sd(Lx, Ly, seed * 4 + 1), spsi(Lx, Ly, seed * 4 + 2),
    schi(Lx, Ly, seed * 4 + 3);
  State s;
  Vector d = space.project_scalar(2, [&](const Vec2 &x) { return sd(x); });
  const double dmax = d.cwiseAbs().maxCoeff();
  s.D = ref.D0 * (1.0 + 0.45 * d.array() / (dmax > 0 ? dmax : 1.0)).matrix();

  // Rotational plus divergent velocity.
  s.u = space.project_vector([&](const Vec2 &x) {
    const Vec2 gp = spsi.gradient(x), gc = schi.gradient(x);
    return Vec2(-gp.y() + 0.5 * gc.x(), gp.x() + 0.5 * gc.y());
  });
  const double umax = max_speed(space, s.u);
  const double target = 0.1 * std::sqrt(ref.g * ref.D0) * 0.99;
  if (umax > 0.0)
    s.u *= target / umax;
  return s;
}

ModelParams random_params(const SpaceComplex &space, const Reference &ref, std::uint64_t seed)
{
  const double Lx = space.mesh().Lx(), Ly = space.mesh().Ly();
  const SmoothField s1(Lx, Ly, seed * 4 + 5), s2(Lx, Ly, seed * 4 + 6);
  ModelParams p;
  p.g = ref.g;
  p.f = space.project_scalar(0, [&](const Vec2 &x) { return ref.f0 * (1.0 + 0.3 * s1(x)); });
  p.b = space.project_scalar(2, [&](const Vec2 &x) { return 0.05 * ref.D0 * s2(x); });
  return p;
}

ModelParams f_plane_params(const SpaceComplex &space, const Reference &ref)
{
  ModelParams p;
  p.g = ref.g;
  p.f = Vector::Constant(space.n0(), ref.f0);
  p.b = Vector::Zero(space.n2());
  return p;
}

namespace
{

// Part of a load vector C that is not of the form B12^T phi, measured through M1^{-1}.
struct GradientSplit
{
  Vector phi;       // V2, zero mean
  Vector residual;  // C - B12^T phi
};

GradientSplit split_gradient(const SpaceComplex &space, const Vector &C)
{
  const SparseMatrix &B12 = space.B12();
  Vector rhs = B12 * space.solve_mass(1, C);
  rhs.array() -= rhs.mean();
  MatrixFreeOp A(space.n2(), [&](const Vector &x) {
    return Vector(B12 * space.solve_mass(1, B12.transpose() * x));
  });
  GradientSplit out;
  out.phi = rhs.norm() > 0.0 ? solve_cg(A, rhs, 1e-14, 40 * space.n2() + 200)
                             : Vector(Vector::Zero(space.n2()));
  out.phi.array() -= out.phi.mean();
  out.residual = C - B12.transpose() * out.phi;
  return out;
}

double dual_dot(const SpaceComplex &space, const Vector &a, const Vector &b)
{
  return a.dot(space.solve_mass(1, b));
}

Vector coriolis_load(const SpaceComplex &space, const State &s, const StabilizationConfig &cfg, const Vector &q)
{
  const Vector F = compute_mass_flux_F(space, s);
  const PVTendencyContext ctx{Vector::Zero(space.n0()), Vector::Zero(space.n2())};
  return compute_Q(space, s, cfg, F, q, &ctx).coriolis_load;
}

double periodic_delta(double d, double L)
{
  return d - L * std::round(d / L);
}

}  // namespace

TestCase geostrophic_balance(const SpaceComplex &space, const Reference &ref,
                             const StabilizationConfig &cfg, double U0)
{
  const double Ly = space.mesh().Ly();
  const double k = 2.0 * std::numbers::pi / Ly;
  const Vector u0 =
    space.project_vector([&](const Vec2 &x) { return Vec2(U0 * std::sin(k * x.y()), 0.0); });
  const Vector ex = space.project_vector([](const Vec2 &) { return Vec2(1.0, 0.0); });
  TestCase tc;
  tc.params = f_plane_params(space, ref);
  const ModelParams &p = tc.params;
  const double area = space.areas().sum();
  State s{u0, Vector::Constant(space.n2(), ref.D0)};

  for (int it = 0; it < 60; ++it) {
    // With q and D frozen the load is affine in the zonal shift; ex carries no vorticity.
    const Vector q = diagnose_pv(space, State{u0, s.D}, p);
    const Vector C0 = coriolis_load(space, State{u0, s.D}, cfg, q);
    const Vector C1 = coriolis_load(space, State{ex, s.D}, cfg, q);
    const Vector r0 = split_gradient(space, C0).residual;
    const Vector r1 = split_gradient(space, C1).residual;
    const double den = dual_dot(space, r1, r1);
    const double shift = den > 0.0 ? -dual_dot(space, r0, r1) / den : 0.0;
    const Vector u = u0 + shift * ex;
    const GradientSplit gs =
      split_gradient(space, coriolis_load(space, State{u, s.D}, cfg, q));

    // Phi = g (D + b) + K = phi + const.
    ModelParams flat = p;
    flat.b = Vector::Zero(space.n2());
    const Vector K = bernoulli_potential(space, State{u, Vector::Zero(space.n2())}, flat);
    Vector D = (gs.phi - K) / p.g - p.b;
    D.array() += ref.D0 - space.areas().dot(D) / area;
    const double change = (D - s.D).cwiseAbs().maxCoeff() / ref.D0;
    s = State{u, D};
    if (change <= 1e-15)
      break;
  }
  if ((s.D.array() <= 0.0).any())
    throw Error("geostrophic balance: jet too strong for the mean depth");
  tc.state = s;
  const PVTendencyContext ctx{Vector::Zero(space.n0()), Vector::Zero(space.n2())};
  const PrimalTendency t = primal_rhs(space, s, p, cfg, nullptr, &ctx);
  const double scale = space.solve_mass(1, t.Q.coriolis_load).cwiseAbs().maxCoeff();
  tc.balance_residual = scale > 0.0 ? t.u_t.cwiseAbs().maxCoeff() / scale : 0.0;
  return tc;
}

double gravity_wave_frequency(const Reference &ref, double Lx)
{
  const double k = 2.0 * std::numbers::pi / Lx;
  return std::sqrt(ref.f0 * ref.f0 + ref.g * ref.D0 * k * k);
}

double gravity_wave_amplitude(const Reference &ref, double Lx, double eps, double t)
{
  const double k = 2.0 * std::numbers::pi / Lx;
  const double w = gravity_wave_frequency(ref, Lx);
  return eps * (1.0 - ref.g * ref.D0 * k * k / (w * w) * (1.0 - std::cos(w * t)));
}

TestCase setup_test_case(const std::string &id, const SpaceComplex &space, const Reference &ref,
                         const StabilizationConfig &cfg, std::uint64_t seed)
{
  const double Lx = space.mesh().Lx(), Ly = space.mesh().Ly();
  TestCase tc;
  if (id == "rest") {
    tc.params = f_plane_params(space, ref);
    tc.state = State{Vector::Zero(space.n1()), Vector::Constant(space.n2(), ref.D0)};
  } else if (id == "gravity_wave") {
    tc.params = f_plane_params(space, ref);
    const double eps = 1e-3 * ref.D0, k = 2.0 * std::numbers::pi / Lx;
    tc.state.u = Vector::Zero(space.n1());
    tc.state.D = space.project_scalar(
      2, [&](const Vec2 &x) { return ref.D0 + eps * std::cos(k * x.x()); });
  } else if (id == "geostrophic_balance") {
    tc = geostrophic_balance(space, ref, cfg);
    if (!(tc.balance_residual <= 1e-10))
      throw Error("geostrophic balance residual " + std::to_string(tc.balance_residual) +
                  " exceeds 1e-10 on this mesh");
  } else if (id == "ridge") {
    // Conical bump under an unchanged free surface.
    tc = geostrophic_balance(space, ref, cfg);
    const Vec2 centre(0.5 * Lx, 0.5 * Ly);
    const double h0 = 0.4 * ref.D0, R = Lx / 9.0;
    tc.params.b = space.project_scalar(2, [&](const Vec2 &x) {
      const double r = std::hypot(periodic_delta(x.x() - centre.x(), Lx),
                                  periodic_delta(x.y() - centre.y(), Ly));
      return r < R ? h0 * (1.0 - r / R) : 0.0;
    });
    tc.state.D -= tc.params.b;
  } else if (id == "random") {
    tc.state = random_state(space, ref, seed);
    tc.params = random_params(space, ref, seed);
  } else {
    throw Error("unknown test case '" + id + "'");
  }
  return tc;
}

}  // namespace feec
