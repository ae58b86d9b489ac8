#pragma once

#include <memory>
#include <optional>

#include "mfg/gram.hpp"
#include "mfg/problem.hpp"

namespace mfg {

/// Machine-checkable evidence returned by each subsolver.
struct SolveCertificate {
    int iterations = 0;
    double residual = 0.0;          // stopping measure actually used
    double pg_norm = 0.0;           // quadrature norm of the natural residual (VI)
    double complementarity = 0.0;   // max_i min(|grad_i|, distance to bound)
    double cg_rel_residual = 0.0;   // relative residual (linear solve)
    bool converged = false;
};

struct SubsolverOptions {
    double vi_tol = 1e-7;   // scaled by (1 + ||linear_term||_inf)
    int vi_max_iter = 20000;
    double cg_tol = 1e-8;   // relative
    int cg_max_iter = 20000;
};

/// Obstacle-constrained quadratic subproblem over the shifted density:
/// minimize  eps/2 ( <w+S, w+S> + sum_b ||D^b w||^2 ) + <b1, w>
/// over the box [lower, upper] with the t=0 slice pinned to zero.
struct QuadraticVI {
    std::shared_ptr<const GramOperator> gram;
    SpaceTimeField affine_offset;  // S
    SpaceTimeField linear_term;    // b1
    SpaceTimeField lower;
    SpaceTimeField upper;  // +inf entries when no cap
    int pinned_slice = 0;

    double objective(const SpaceTimeField& w) const;
    /// Quadrature-metric gradient eps (w + S + W^-1 A w) + b1.
    SpaceTimeField gradient(const SpaceTimeField& w) const;
    void validate() const;
};

/// Coercive symmetric subproblem for the shifted value: B[u, v] = <f, v>
/// for all v with the t=T slice pinned to zero; rhs is the quadrature
/// representer of f.
struct LinearSystem {
    std::shared_ptr<const GramOperator> gram;
    SpaceTimeField rhs;
    int pinned_slice;
};

/// Thrown when the VI iteration hits its budget; carries the best iterate.
struct IterationLimitError : std::runtime_error {
    SpaceTimeField best;
    SolveCertificate cert;
    IterationLimitError(std::string msg, SpaceTimeField b, SolveCertificate c)
        : std::runtime_error(std::move(msg)), best(std::move(b)), cert(std::move(c)) {}
};

QuadraticVI assemble_variational(const ShiftedProblem& shifted,
                                 std::shared_ptr<const GramOperator> gram,
                                 const SpaceTimeField& m1, const SpaceTimeField& u1);

LinearSystem assemble_transport(const ShiftedProblem& shifted,
                                std::shared_ptr<const GramOperator> gram,
                                const SpaceTimeField& m1, const SpaceTimeField& u1);

std::pair<SpaceTimeField, SolveCertificate> solve_variational(
    const QuadraticVI& vi, const SubsolverOptions& opts,
    const SpaceTimeField* warm_start = nullptr);

std::pair<SpaceTimeField, SolveCertificate> solve_bilinear(
    const LinearSystem& sys, const SubsolverOptions& opts,
    const SpaceTimeField* warm_start = nullptr);

/// Relative error between the analytic directional derivative of the VI
/// objective and a central finite difference.
double directional_derivative_check(const QuadraticVI& vi, const SpaceTimeField& w,
                                    const SpaceTimeField& dw);

/// Preconditioned CG on the flag-masked Gram metric operator; flags are a
/// 0/1 field selecting the active subspace.  Exposed for oracle tests.
std::pair<SpaceTimeField, SolveCertificate> pcg_masked(
    const GramOperator& gram, const SpaceTimeField& rhs, const SpaceTimeField& flags,
    double tol_rel, int max_iter, const SpaceTimeField* x0 = nullptr);

/// 0/1 flag field with one time slice zeroed.
SpaceTimeField slice_mask(const GridPtr& grid, int pinned_slice);

}  // namespace mfg
