// SPDX-License-Identifier: Apache-2.0

#include "feec/space.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace feec
{

std::string to_string(Family f)
{
  return f == Family::P1_RT0_P0 ? "P1-RT0-P0" : "P1-N0-P0";
}

SpaceComplex::SpaceComplex(Mesh mesh, Family family) : mesh_(std::move(mesh)), family_(family)
{
  const int V = n0(), E = n1(), C = n2();
  elements_.reserve(C);
  for (int c = 0; c < C; ++c)
    elements_.emplace_back(mesh_.cell_points(c));

  std::vector<Triplet> t0, t1;
  areas_.resize(C);
  for (int c = 0; c < C; ++c) {
    const auto &cell = mesh_.cell(c);
    const auto &el = elements_[c];
    const int n = el.size();
    Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(n, n), m1 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
      const double w = el.quadrature()[q].w;
      const auto &bv = el.tabulated()[q];
      m0.noalias() += w * bv.phi * bv.phi.transpose();
      m1.noalias() += w * bv.w.transpose() * bv.w;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        t0.emplace_back(cell.verts[i], cell.verts[j], m0(i, j));
        t1.emplace_back(cell.edges[i], cell.edges[j], cell.signs[i] * cell.signs[j] * m1(i, j));
      }
    areas_[c] = el.area();
  }
  M0_.resize(V, V);
  M0_.setFromTriplets(t0.begin(), t0.end());
  M1_.resize(E, E);
  M1_.setFromTriplets(t1.begin(), t1.end());
  M2_.resize(C, C);
  std::vector<Triplet> t2;
  for (int c = 0; c < C; ++c)
    t2.emplace_back(c, c, areas_[c]);
  M2_.setFromTriplets(t2.begin(), t2.end());

  const IncidenceMatrices inc = assemble_incidence(mesh_);
  D01_ = inc.d01.cast<double>();
  B12_ = inc.d12.cast<double>();
  D12_ = areas_.cwiseInverse().asDiagonal() * B12_;

  M0_solver_.compute(M0_);
  if (M0_solver_.info() != Eigen::Success)
    throw SolverError("V0 mass matrix factorization failed", 0, 0.0);
  M1_solver_.compute(M1_);
  if (M1_solver_.info() != Eigen::Success)
    throw SolverError("V1 mass matrix factorization failed", 0, 0.0);
}

int SpaceComplex::dim(int k) const
{
  switch (k) {
  case 0:
    return n0();
  case 1:
    return n1();
  case 2:
    return n2();
  }
  throw Error("form degree must be 0, 1 or 2");
}

const SparseMatrix &SpaceComplex::mass(int k) const
{
  switch (k) {
  case 0:
    return M0_;
  case 1:
    return M1_;
  case 2:
    return M2_;
  }
  throw Error("form degree must be 0, 1 or 2");
}

Vector SpaceComplex::solve_mass(int k, const Vector &rhs) const
{
  if (rhs.size() != dim(k))
    throw Error("mass solve: right-hand side has the wrong length");
  Vector x;
  if (k == 2)
    return rhs.cwiseQuotient(areas_);
  const double bn = rhs.norm();
  if (bn == 0.0)
    return Vector::Zero(rhs.size());
  x = k == 0 ? M0_solver_.solve(rhs) : M1_solver_.solve(rhs);
  const double res = (mass(k) * x - rhs).norm();
  if (!std::isfinite(res) || res > 1e-12 * bn)
    throw SolverError("mass solve did not reach tolerance", 1, res / bn);
  return x;
}

Eigen::VectorXd SpaceComplex::local0(int c, const Vector &g) const
{
  const auto &cell = mesh_.cell(c);
  Eigen::VectorXd out(cell.verts.size());
  for (std::size_t i = 0; i < cell.verts.size(); ++i)
    out[i] = g[cell.verts[i]];
  return out;
}

Eigen::VectorXd SpaceComplex::local1(int c, const Vector &g) const
{
  const auto &cell = mesh_.cell(c);
  Eigen::VectorXd out(cell.edges.size());
  for (std::size_t i = 0; i < cell.edges.size(); ++i)
    out[i] = cell.signs[i] * g[cell.edges[i]];
  return out;
}

Vector SpaceComplex::load_scalar(int k, const std::function<double(const Vec2 &)> &f) const
{
  if (k != 0 && k != 2)
    throw Error("scalar projection needs k = 0 or k = 2");
  Vector b = Vector::Zero(dim(k));
  for (int c = 0; c < n2(); ++c) {
    const auto &el = elements_[c];
    const auto &cell = mesh_.cell(c);
    for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
      const auto &qp = el.quadrature()[q];
      const double v = f(qp.x) * qp.w;
      if (k == 2) {
        b[c] += v;
      } else {
        const auto &phi = el.tabulated()[q].phi;
        for (int i = 0; i < el.size(); ++i)
          b[cell.verts[i]] += v * phi[i];
      }
    }
  }
  return b;
}

Vector SpaceComplex::load_vector(const std::function<Vec2(const Vec2 &)> &f) const
{
  Vector b = Vector::Zero(n1());
  for (int c = 0; c < n2(); ++c) {
    const auto &el = elements_[c];
    const auto &cell = mesh_.cell(c);
    for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
      const auto &qp = el.quadrature()[q];
      const Vec2 v = f(qp.x) * qp.w;
      const auto &w = el.tabulated()[q].w;
      for (int i = 0; i < el.size(); ++i)
        b[cell.edges[i]] += cell.signs[i] * v.dot(vector_proxy(w.col(i)));
    }
  }
  return b;
}

Vector SpaceComplex::project_scalar(int k, const std::function<double(const Vec2 &)> &f) const
{
  return solve_mass(k, load_scalar(k, f));
}

Vector SpaceComplex::project_vector(const std::function<Vec2(const Vec2 &)> &f) const
{
  return solve_mass(1, load_vector(f));
}

double SpaceComplex::l2_error2(const Vector &d, const std::function<double(const Vec2 &)> &f) const
{
  double s = 0.0;
  for (int c = 0; c < n2(); ++c)
    for (const auto &qp : elements_[c].quadrature()) {
      const double e = d[c] - f(qp.x);
      s += qp.w * e * e;
    }
  return std::sqrt(s);
}

double SpaceComplex::l2_error0(const Vector &g, const std::function<double(const Vec2 &)> &f) const
{
  double s = 0.0;
  for (int c = 0; c < n2(); ++c) {
    const auto &el = elements_[c];
    const Eigen::VectorXd loc = local0(c, g);
    for (std::size_t q = 0; q < el.quadrature().size(); ++q) {
      const auto &qp = el.quadrature()[q];
      const double e = el.tabulated()[q].phi.dot(loc) - f(qp.x);
      s += qp.w * e * e;
    }
  }
  return std::sqrt(s);
}

std::shared_ptr<const SpaceComplex> build_space_complex(const Mesh &m, Family family)
{
  return std::make_shared<const SpaceComplex>(m, family);
}

FormCoeffs project_L2(const SpaceComplex &space, int k,
                      const std::function<double(const Vec2 &)> &field)
{
  return {k, space.project_scalar(k, field)};
}

FormCoeffs project_L2_vector(const SpaceComplex &space,
                             const std::function<Vec2(const Vec2 &)> &field)
{
  return {1, space.project_vector(field)};
}

void write_coo(std::ostream &os, const SparseMatrix &A)
{
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  os.precision(old);
}

}  // namespace feec
