// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_ELEMENT_HPP
#define FEEC_ELEMENT_HPP

#include <vector>

#include "feec/common.hpp"

namespace feec
{

struct QuadPoint
{
  Vec2 x;
  double w;
};

// Symmetric 6-point rule, exact for polynomials of degree 4.
std::vector<QuadPoint> triangle_rule(const Vec2 &a, const Vec2 &b, const Vec2 &c);
// 3 x 3 Gauss rule on the parallelogram spanned by e1, e2 from origin o.
std::vector<QuadPoint> parallelogram_rule(const Vec2 &o, const Vec2 &e1, const Vec2 &e2);

// Affine map from a reference element: x = origin + J * xhat.
struct ElementMap
{
  int element = -1;
  Vec2 origin = Vec2::Zero();
  Mat2 J = Mat2::Identity();
  double detJ() const { return J.determinant(); }
};

// Contravariant Piola transform of a reference vector value.
Vec2 piola_map_velocity(const ElementMap &map, const Vec2 &ref_value);

enum class ElementShape
{
  Triangle,       // P1 / RT0
  Parallelogram,  // Q1 / RT0 via Piola
  Polygon         // fan-subdivided P1 / RT0 with a discretely harmonic interior
};

// Values of all local basis functions at one point.
struct BasisValues
{
  Eigen::VectorXd phi;                   // V0 corner functions
  Eigen::Matrix<double, 2, Eigen::Dynamic> grad;  // their gradients
  Eigen::Matrix<double, 2, Eigen::Dynamic> w;     // V1 side functions, unit outward flux
};

// Lowest-order local bases on one convex cell given by its counterclockwise corners
// (in any fixed frame). Corner k carries V0 function k; side k runs from corner k to
// corner k+1 and carries V1 function k. The V2 function is the indicator, and every V1
// function has divergence 1/area. On each piece the bases are polynomial.
class LocalElement
{
public:
  explicit LocalElement(std::vector<Vec2> corners);

  ElementShape shape() const { return shape_; }
  int size() const { return static_cast<int>(corners_.size()); }
  const std::vector<Vec2> &corners() const { return corners_; }
  double area() const { return area_; }
  const Vec2 &centroid() const { return centroid_; }

  int num_pieces() const { return static_cast<int>(pieces_.size()); }
  const std::vector<Vec2> &piece_polygon(int p) const { return pieces_[p].poly; }
  // Evaluate every basis function at x, using the polynomial of piece p.
  void evaluate(int p, const Vec2 &x, BasisValues &out) const;
  // Piece containing x (ties resolved to the lowest index).
  int locate(const Vec2 &x) const;

  // Quadrature points over the whole element and the tabulated bases.
  const std::vector<QuadPoint> &quadrature() const { return qp_; }
  const std::vector<int> &quadrature_piece() const { return qp_piece_; }
  const std::vector<BasisValues> &tabulated() const { return tab_; }

  // Affine map of the reference triangle or unit square. Throws for polygons.
  ElementMap element_map() const;

private:
  struct Piece
  {
    std::vector<Vec2> poly;
    bool simplex = true;
    // Simplex pieces: phi_i = a[i] + g.col(i) . (x - origin), w_k = b.col(k) + c[k] (x - origin).
    Eigen::VectorXd a;
    Eigen::Matrix<double, 2, Eigen::Dynamic> g;
    Eigen::Matrix<double, 2, Eigen::Dynamic> b;
    Eigen::VectorXd c;
  };

  void build_triangle();
  void build_parallelogram();
  void build_polygon();
  void tabulate();

  ElementShape shape_;
  std::vector<Vec2> corners_;
  double area_ = 0.0;
  Vec2 centroid_;
  Vec2 origin_;
  // Parallelogram map data.
  Mat2 J_ = Mat2::Identity();
  Mat2 Jinv_ = Mat2::Identity();
  std::vector<Piece> pieces_;
  std::vector<QuadPoint> qp_;
  std::vector<int> qp_piece_;
  std::vector<BasisValues> tab_;
};

}  // namespace feec

#endif  // FEEC_ELEMENT_HPP
