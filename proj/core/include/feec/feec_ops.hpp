// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_FEEC_OPS_HPP
#define FEEC_FEEC_OPS_HPP

#include <memory>
#include <optional>

#include <Eigen/SparseLU>

#include "feec/space.hpp"

namespace feec
{

// Strong exterior derivative: k = 0 gives V1 coefficients, k = 1 gives V2 coefficients.
FormCoeffs apply_d(const SpaceComplex &space, int k, const FormCoeffs &w);

// Discrete codifferential: c in V^{k-1} with M_{k-1} c = D_{k-1,k}^T M_k w.
FormCoeffs apply_delta_h(const SpaceComplex &space, int k, const FormCoeffs &w);

struct HelmholtzParts
{
  Vector psi;         // V0 potential, zero mean
  Vector phi;         // V2 potential, zero mean
  Vector gradient;    // D01 psi
  Vector rotational;  // delta_h phi
  Vector harmonic;    // remainder
};

HelmholtzParts helmholtz_decompose(const SpaceComplex &space, const FormCoeffs &w);

// Quadrature over the overlaps of primal and dual cells. Each point is given in both the
// primal cell frame and the dual cell frame, with the polynomial piece it lies in.
struct OverlapPoint
{
  int primal_cell;
  int dual_cell;
  int primal_piece;
  int dual_piece;
  Vec2 xp;
  Vec2 xd;
  double w;
};

// The dual space must live on build_dual_mesh(primal mesh).
std::vector<OverlapPoint> overlap_quadrature(const SpaceComplex &primal, const SpaceComplex &dual);

// Convex polygon clipping (both counterclockwise; clip must be convex).
std::vector<Vec2> clip_convex(const std::vector<Vec2> &subject, const std::vector<Vec2> &clip);

struct HodgeOptions
{
  // Dense singular value check of the assembled operator, skipped above this size.
  bool check_invertibility = true;
  int max_dense_check = 2500;
  double min_sigma_ratio = 1e-10;
};

// Discrete Hodge star from dual k-forms to primal (2-k)-forms, defined by
// M^p_{2-k} (H w) = W_k w, with W_k the cross-mesh pairing of primal test functions
// against dual basis functions (orientation sign included).
class HodgeStar
{
public:
  HodgeStar(int k, std::shared_ptr<const SpaceComplex> primal,
            std::shared_ptr<const SpaceComplex> dual, SparseMatrix W, const HodgeOptions &opt);

  int k() const { return k_; }
  const SparseMatrix &W() const { return W_; }
  const SpaceComplex &primal() const { return *primal_; }
  const SpaceComplex &dual() const { return *dual_; }

  Vector apply(const Vector &w) const;
  Vector apply_inverse(const Vector &p) const;
  // sigma_min / sigma_max of the dense operator M^{-1} W, when it was computed.
  std::optional<double> sigma_ratio() const { return sigma_ratio_; }

private:
  int k_;
  std::shared_ptr<const SpaceComplex> primal_, dual_;
  SparseMatrix W_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;  // shared so the operator is movable
  std::optional<double> sigma_ratio_;
};

HodgeStar build_hodge_star(std::shared_ptr<const SpaceComplex> primal,
                           std::shared_ptr<const SpaceComplex> dual, int k,
                           const HodgeOptions &opt = {});

}  // namespace feec

#endif  // FEEC_FEEC_OPS_HPP
