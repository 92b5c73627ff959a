// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_COMMON_HPP
#define FEEC_COMMON_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace feec
{

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using IntSparseMatrix = Eigen::SparseMatrix<int>;
using Triplet = Eigen::Triplet<double>;

// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

class MeshError : public Error
{
public:
  using Error::Error;
};

class SolverError : public Error
{
public:
  SolverError(const std::string &what, int iterations, double residual)
    : Error(what + " (iterations=" + std::to_string(iterations) +
            ", residual=" + std::to_string(residual) + ")"),
      iterations_(iterations), residual_(residual)
  {
  }
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

private:
  int iterations_;
  double residual_;
};

// k x (x, y) = (-y, x).
inline Vec2 perp(const Vec2 &v) { return {-v.y(), v.x()}; }

inline double cross(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace feec

#endif  // FEEC_COMMON_HPP
