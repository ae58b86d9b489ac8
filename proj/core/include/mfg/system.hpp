#pragma once

#include "mfg/diff_plan.hpp"
#include "mfg/problem.hpp"

namespace mfg {

/// Hamilton-Jacobi expression at unshifted fields:
///   u_t + a : D^2 u - H(x, Du[, m]) + g(m, h(m)) + V.
SpaceTimeField hj_expression(const MFGProblem& problem, const DiffPlan& plan,
                             const SpaceTimeField& density, const SpaceTimeField& value);

/// Transport expression at unshifted fields, derivatives on products so the
/// discrete pairing against any test field equals the integrated-by-parts
/// form exactly:
///   m_t - sum_ij d_{x_i x_j}(a_ij m) - div( m D_p H(x, Du[, m]) ).
SpaceTimeField transport_expression(const MFGProblem& problem, const DiffPlan& plan,
                                    const SpaceTimeField& density, const SpaceTimeField& value);

/// <F[eta, v], (w1, w2)>: the joint monotone operator paired with a test
/// pair in the quadrature inner product.
double operator_pairing(const MFGProblem& problem, const DiffPlan& plan,
                        const SpaceTimeField& eta, const SpaceTimeField& v,
                        const SpaceTimeField& w1, const SpaceTimeField& w2);

}  // namespace mfg
