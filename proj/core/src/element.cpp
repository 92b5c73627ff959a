// SPDX-License-Identifier: Apache-2.0

#include "feec/element.hpp"

#include <array>
#include <cmath>

namespace feec
{

std::vector<QuadPoint> triangle_rule(const Vec2 &a, const Vec2 &b, const Vec2 &c)
{
  static constexpr std::array<std::array<double, 2>, 2> orbits{{
    {0.44594849091596488632, 0.22338158967801146570},
    {0.091576213509770743460, 0.10995174365532186764},
  }};
  const double area = 0.5 * cross(b - a, c - a);
  std::vector<QuadPoint> out;
  out.reserve(6);
  for (const auto &[s, w] : orbits) {
    const double t = 1.0 - 2.0 * s;
    out.push_back({t * a + s * b + s * c, w * area});
    out.push_back({s * a + t * b + s * c, w * area});
    out.push_back({s * a + s * b + t * c, w * area});
  }
  return out;
}

std::vector<QuadPoint> parallelogram_rule(const Vec2 &o, const Vec2 &e1, const Vec2 &e2)
{
  const double r = 0.5 * std::sqrt(0.6);
  const std::array<double, 3> x{0.5 - r, 0.5, 0.5 + r};
  const std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const double det = cross(e1, e2);
  std::vector<QuadPoint> out;
  out.reserve(9);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      out.push_back({o + x[i] * e1 + x[j] * e2, w[i] * w[j] * det});
  return out;
}

Vec2 piola_map_velocity(const ElementMap &map, const Vec2 &ref_value)
{
  const double det = map.detJ();
  if (!(det > 0.0))
    throw Error("Piola transform needs a positively oriented element map");
  return map.J * ref_value / det;
}

namespace
{

// Barycentric coordinate i of triangle q as an affine function about origin o:
// lambda_i(x) = alpha + beta . (x - o).
void barycentric(const std::array<Vec2, 3> &q, int i, const Vec2 &o, double &alpha, Vec2 &beta)
{
  const double twoA = cross(q[1] - q[0], q[2] - q[0]);
  const Vec2 &p = q[(i + 1) % 3];
  const Vec2 d = q[(i + 2) % 3] - p;
  alpha = cross(d, o - p) / twoA;
  beta = perp(d) / twoA;
}

bool is_parallelogram(const std::vector<Vec2> &p)
{
  if (p.size() != 4)
    return false;
  const double scale = (p[2] - p[0]).norm() + (p[3] - p[1]).norm();
  return ((p[1] - p[0]) - (p[2] - p[3])).norm() <= 1e-12 * scale;
}

}  // namespace

LocalElement::LocalElement(std::vector<Vec2> corners) : corners_(std::move(corners))
{
  const std::size_t n = corners_.size();
  if (n < 3)
    throw MeshError("element needs at least three corners");
  double a2 = 0.0;
  Vec2 cx = Vec2::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 &p = corners_[k];
    const Vec2 &q = corners_[(k + 1) % n];
    a2 += cross(p, q);
    cx += cross(p, q) * (p + q);
  }
  if (!(a2 > 0.0))
    throw MeshError("element corners are not counterclockwise");
  area_ = 0.5 * a2;
  centroid_ = cx / (3.0 * a2);
  origin_ = centroid_;

  if (n == 3) {
    shape_ = ElementShape::Triangle;
    build_triangle();
  } else if (is_parallelogram(corners_)) {
    shape_ = ElementShape::Parallelogram;
    build_parallelogram();
  } else {
    shape_ = ElementShape::Polygon;
    build_polygon();
  }
  tabulate();
}

void LocalElement::build_triangle()
{
  Piece pc;
  pc.poly = corners_;
  pc.a.resize(3);
  pc.g.resize(2, 3);
  pc.b.resize(2, 3);
  pc.c.resize(3);
  const std::array<Vec2, 3> q{corners_[0], corners_[1], corners_[2]};
  for (int i = 0; i < 3; ++i) {
    double alpha;
    Vec2 beta;
    barycentric(q, i, origin_, alpha, beta);
    pc.a[i] = alpha;
    pc.g.col(i) = beta;
    // Side i is opposite corner i + 2.
    const Vec2 &opp = q[(i + 2) % 3];
    pc.b.col(i) = (origin_ - opp) / (2.0 * area_);
    pc.c[i] = 1.0 / (2.0 * area_);
  }
  pieces_.push_back(std::move(pc));
}

void LocalElement::build_parallelogram()
{
  J_.col(0) = corners_[1] - corners_[0];
  J_.col(1) = corners_[3] - corners_[0];
  Jinv_ = J_.inverse();
  Piece pc;
  pc.poly = corners_;
  pc.simplex = false;
  pieces_.push_back(std::move(pc));
}

void LocalElement::build_polygon()
{
  const int n = size();
  const Vec2 &c = centroid_;
  std::vector<std::array<Vec2, 3>> tri(n);
  std::vector<double> At(n);
  for (int t = 0; t < n; ++t) {
    tri[t] = {c, corners_[t], corners_[(t + 1) % n]};
    At[t] = 0.5 * cross(tri[t][1] - c, tri[t][2] - c);
    if (!(At[t] > 0.0))
      throw MeshError("polygonal element is not star-shaped about its centroid");
  }

  // Barycentric data per sub-triangle: index 0 = centre, 1 = corner t, 2 = corner t+1.
  std::vector<std::array<double, 3>> alpha(n);
  std::vector<std::array<Vec2, 3>> beta(n);
  for (int t = 0; t < n; ++t)
    for (int i = 0; i < 3; ++i)
      barycentric(tri[t], i, origin_, alpha[t][i], beta[t][i]);

  // Interior value of each corner function from the discrete harmonic condition.
  Eigen::VectorXd Kci = Eigen::VectorXd::Zero(n);
  double Kcc = 0.0;
  for (int t = 0; t < n; ++t) {
    Kcc += At[t] * beta[t][0].squaredNorm();
    Kci[t] += At[t] * beta[t][0].dot(beta[t][1]);
    Kci[(t + 1) % n] += At[t] * beta[t][0].dot(beta[t][2]);
  }
  const Eigen::VectorXd cval = -Kci / Kcc;

  pieces_.resize(n);
  for (int t = 0; t < n; ++t) {
    Piece &pc = pieces_[t];
    pc.poly = {tri[t][0], tri[t][1], tri[t][2]};
    pc.a = cval * alpha[t][0];
    pc.g.resize(2, n);
    for (int i = 0; i < n; ++i)
      pc.g.col(i) = cval[i] * beta[t][0];
    pc.a[t] += alpha[t][1];
    pc.g.col(t) += beta[t][1];
    pc.a[(t + 1) % n] += alpha[t][2];
    pc.g.col((t + 1) % n) += beta[t][2];
  }

  // RT0 on sub-triangle t with unit outward flux through the side opposite vertex s.
  auto psi_b = [&](int t, int s) -> Vec2 { return (origin_ - tri[t][s]) / (2.0 * At[t]); };
  auto psi_c = [&](int t) { return 1.0 / (2.0 * At[t]); };

  // Side function j with spoke fluxes g (g[t] enters sub-triangle t through spoke t):
  // outer side of t is opposite the centre, spoke t+1 opposite corner t, spoke t
  // opposite corner t+1.
  auto piece_field = [&](int t, double outer, double g_in, double g_out, Vec2 &b, double &cc) {
    b = outer * psi_b(t, 0) + g_out * psi_b(t, 1) - g_in * psi_b(t, 2);
    cc = (outer + g_out - g_in) * psi_c(t);
  };
  auto inner = [&](int t, const Vec2 &b1, double c1, const Vec2 &b2, double c2) {
    double s = 0.0;
    for (const auto &q : triangle_rule(tri[t][0], tri[t][1], tri[t][2])) {
      const Vec2 r = q.x - origin_;
      s += q.w * (b1 + c1 * r).dot(b2 + c2 * r);
    }
    return s;
  };

  for (int t = 0; t < n; ++t) {
    pieces_[t].b.resize(2, n);
    pieces_[t].c.resize(n);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> g(n + 1, 0.0);
    for (int t = 0; t < n; ++t)
      g[t + 1] = g[t] + At[t] / area_ - (t == j ? 1.0 : 0.0);
    // Remove the circulation mode (zero outer flux, unit spoke flux).
    double wz = 0.0, zz = 0.0;
    for (int t = 0; t < n; ++t) {
      Vec2 bw, bz;
      double cw, cz;
      piece_field(t, t == j ? 1.0 : 0.0, g[t], g[t + 1], bw, cw);
      piece_field(t, 0.0, 1.0, 1.0, bz, cz);
      wz += inner(t, bw, cw, bz, cz);
      zz += inner(t, bz, cz, bz, cz);
    }
    const double g0 = -wz / zz;
    for (int t = 0; t < n; ++t) {
      Vec2 bw;
      double cw;
      piece_field(t, t == j ? 1.0 : 0.0, g[t] + g0, g[t + 1] + g0, bw, cw);
      pieces_[t].b.col(j) = bw;
      pieces_[t].c[j] = cw;
    }
  }
}

void LocalElement::evaluate(int p, const Vec2 &x, BasisValues &out) const
{
  const int n = size();
  out.phi.resize(n);
  out.grad.resize(2, n);
  out.w.resize(2, n);
  const Piece &pc = pieces_[p];
  if (pc.simplex) {
    const Vec2 r = x - origin_;
    for (int i = 0; i < n; ++i) {
      out.phi[i] = pc.a[i] + pc.g.col(i).dot(r);
      out.grad.col(i) = pc.g.col(i);
      out.w.col(i) = pc.b.col(i) + pc.c[i] * r;
    }
    return;
  }
  const Vec2 xh = Jinv_ * (x - corners_[0]);
  const double s = xh.x(), t = xh.y();
  out.phi << (1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t;
  Eigen::Matrix<double, 2, 4> gh;
  gh << -(1 - t), (1 - t), t, -t, -(1 - s), -s, s, (1 - s);
  out.grad = Jinv_.transpose() * gh;
  Eigen::Matrix<double, 2, 4> wh;
  wh << 0.0, s, 0.0, s - 1.0, t - 1.0, 0.0, t, 0.0;
  out.w = J_ * wh / J_.determinant();
}

int LocalElement::locate(const Vec2 &x) const
{
  if (pieces_.size() == 1)
    return 0;
  int best = 0;
  double best_min = -1e300;
  for (int p = 0; p < num_pieces(); ++p) {
    const auto &poly = pieces_[p].poly;
    const std::array<Vec2, 3> q{poly[0], poly[1], poly[2]};
    double mn = 1e300;
    for (int i = 0; i < 3; ++i) {
      double a;
      Vec2 b;
      barycentric(q, i, x, a, b);
      mn = std::min(mn, a);
    }
    if (mn >= -1e-12)
      return p;
    if (mn > best_min) {
      best_min = mn;
      best = p;
    }
  }
  return best;
}

void LocalElement::tabulate()
{
  qp_.clear();
  qp_piece_.clear();
  for (int p = 0; p < num_pieces(); ++p) {
    const auto &poly = pieces_[p].poly;
    std::vector<QuadPoint> rule = pieces_[p].simplex
                                    ? triangle_rule(poly[0], poly[1], poly[2])
                                    : parallelogram_rule(poly[0], poly[1] - poly[0], poly[3] - poly[0]);
    for (const auto &q : rule) {
      qp_.push_back(q);
      qp_piece_.push_back(p);
    }
  }
  tab_.resize(qp_.size());
  for (std::size_t i = 0; i < qp_.size(); ++i)
    evaluate(qp_piece_[i], qp_[i].x, tab_[i]);
}

ElementMap LocalElement::element_map() const
{
  ElementMap m;
  m.origin = corners_[0];
  if (shape_ == ElementShape::Triangle) {
    m.J.col(0) = corners_[1] - corners_[0];
    m.J.col(1) = corners_[2] - corners_[0];
  } else if (shape_ == ElementShape::Parallelogram) {
    m.J = J_;
  } else {
    throw Error("polygonal elements have no single affine reference map");
  }
  return m;
}

}  // namespace feec
