#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>

#include "mfg/diff_plan.hpp"

namespace mfg {

/// The eps-weighted energy operator shared by both subproblems:
///
///   apply(w)        = eps * ( W.w + sum_{|beta|=2k} (D^beta)^T W D^beta w )
///   apply_metric(w) = W^{-1} apply(w)
///
/// where W is the space-time quadrature weight.  apply() returns the dual
/// (weighted) form whose Euclidean pairing with v equals
/// eps * ( <w,v> + sum <D^beta w, D^beta v> ) in the quadrature inner
/// product; apply_metric() is the self-adjoint form the iterative solvers
/// use.  Both are symmetric positive definite with Rayleigh floor eps.
class GramOperator {
  public:
    GramOperator(std::shared_ptr<const DiffPlan> plan, double epsilon);

    double epsilon() const { return epsilon_; }
    const DiffPlan& plan() const { return *plan_; }
    const GridPtr& grid() const { return plan_->grid(); }

    SpaceTimeField apply(const SpaceTimeField& w) const;
    SpaceTimeField apply_metric(const SpaceTimeField& w) const;

    /// eps * ( ||w||^2 + sum_beta ||D^beta w||^2 ) in the quadrature pairing.
    double energy(const SpaceTimeField& w) const;
    /// ||w||^2 + sum_beta ||D^beta w||^2 (no eps); the discrete H^2k energy.
    double sobolev_energy(const SpaceTimeField& w) const;

    /// Inverse of the Fourier-in-x symbol with a diagonal (Jacobi) lump in t.
    /// Self-adjoint positive; intended as a PCG preconditioner for
    /// apply_metric in the quadrature inner product.
    SpaceTimeField precondition(const SpaceTimeField& r) const;

  private:
    std::shared_ptr<const DiffPlan> plan_;
    double epsilon_;
    SpaceTimeField weight_;
    Eigen::MatrixXcd dft_;      // forward DFT along one axis
    Eigen::MatrixXcd idft_;     // inverse
    Eigen::MatrixXd symbol_t_;  // symbol_t_(i, flat kappa): preconditioner diagonal
};

}  // namespace mfg
