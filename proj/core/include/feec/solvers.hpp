// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_SOLVERS_HPP
#define FEEC_SOLVERS_HPP

#include <functional>

#include <Eigen/IterativeLinearSolvers>

#include "feec/common.hpp"

namespace feec
{

// Square operator known only through its action, usable with Eigen's Krylov solvers.
class MatrixFreeOp;

}  // namespace feec

namespace Eigen::internal
{
template <>
struct traits<feec::MatrixFreeOp> : public traits<Eigen::SparseMatrix<double>>
{
};
}  // namespace Eigen::internal

namespace feec
{

class MatrixFreeOp : public Eigen::EigenBase<MatrixFreeOp>
{
public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum
  {
    ColsAtCompileTime = Eigen::Dynamic,
    MaxColsAtCompileTime = Eigen::Dynamic,
    IsRowMajor = false
  };

  MatrixFreeOp(Eigen::Index n, std::function<Vector(const Vector &)> apply)
    : n_(n), apply_(std::move(apply))
  {
  }

  Eigen::Index rows() const { return n_; }
  Eigen::Index cols() const { return n_; }
  Vector apply(const Vector &x) const { return apply_(x); }

  template <typename Rhs>
  Eigen::Product<MatrixFreeOp, Rhs, Eigen::AliasFreeProduct>
  operator*(const Eigen::MatrixBase<Rhs> &x) const
  {
    return Eigen::Product<MatrixFreeOp, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

private:
  Eigen::Index n_;
  std::function<Vector(const Vector &)> apply_;
};

struct KrylovStats
{
  int iterations = 0;
  double residual = 0.0;
};

// Conjugate gradients for a symmetric positive (semi)definite operator. Throws SolverError
// when the relative residual stays above rtol after max_iters.
Vector solve_cg(const MatrixFreeOp &A, const Vector &b, double rtol, int max_iters,
                KrylovStats *stats = nullptr);
// BiCGSTAB for general operators, same contract.
Vector solve_bicgstab(const MatrixFreeOp &A, const Vector &b, double rtol, int max_iters,
                      const Vector *guess = nullptr, KrylovStats *stats = nullptr);

}  // namespace feec

namespace Eigen::internal
{
template <typename Rhs>
struct generic_product_impl<feec::MatrixFreeOp, Rhs, SparseShape, DenseShape, GemvProduct>
  : generic_product_impl_base<feec::MatrixFreeOp, Rhs,
                              generic_product_impl<feec::MatrixFreeOp, Rhs>>
{
  using Scalar = typename Product<feec::MatrixFreeOp, Rhs>::Scalar;

  template <typename Dest>
  static void scaleAndAddTo(Dest &dst, const feec::MatrixFreeOp &lhs, const Rhs &rhs,
                            const Scalar &alpha)
  {
    dst.noalias() += alpha * lhs.apply(feec::Vector(rhs));
  }
};
}  // namespace Eigen::internal

#endif  // FEEC_SOLVERS_HPP
