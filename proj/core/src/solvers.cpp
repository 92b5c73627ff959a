// SPDX-License-Identifier: Apache-2.0

#include "feec/solvers.hpp"

namespace feec
{

namespace
{

template <typename Solver>
Vector run(Solver &solver, const MatrixFreeOp &A, const Vector &b, double rtol, int max_iters,
           const Vector *guess, KrylovStats *stats, const char *name)
{
  if (b.size() != A.rows())
    throw Error(std::string(name) + ": right-hand side has the wrong length");
  if (b.norm() == 0.0) {
    if (stats)
      *stats = {};
    return Vector::Zero(b.size());
  }
  solver.setTolerance(rtol);
  solver.setMaxIterations(max_iters);
  solver.compute(A);
  Vector x = guess ? solver.solveWithGuess(b, *guess) : Vector(solver.solve(b));
  const double res = (A.apply(x) - b).norm() / b.norm();
  if (stats)
    *stats = {static_cast<int>(solver.iterations()), res};
  // Eigen's own estimate can drift from the true residual; accept a small margin.
  if (!(res <= 10.0 * rtol))
    throw SolverError(std::string(name) + " did not converge", static_cast<int>(solver.iterations()),
                      res);
  return x;
}

}  // namespace

Vector solve_cg(const MatrixFreeOp &A, const Vector &b, double rtol, int max_iters,
                KrylovStats *stats)
{
  Eigen::ConjugateGradient<MatrixFreeOp, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner>
    cg;
  return run(cg, A, b, rtol, max_iters, nullptr, stats, "conjugate gradients");
}

Vector solve_bicgstab(const MatrixFreeOp &A, const Vector &b, double rtol, int max_iters,
                      const Vector *guess, KrylovStats *stats)
{
  Eigen::BiCGSTAB<MatrixFreeOp, Eigen::IdentityPreconditioner> solver;
  return run(solver, A, b, rtol, max_iters, guess, stats, "BiCGSTAB");
}

}  // namespace feec
