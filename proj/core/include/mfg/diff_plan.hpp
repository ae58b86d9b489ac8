#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "mfg/field.hpp"

namespace mfg {

/// Multi-index over (t, x1[, x2]); unused spatial entries stay zero.
using MultiIndex = std::array<int, 3>;

/// Discrete mixed derivatives on a space-time grid.
///
/// Spatial factors are Fourier-spectral: dense N_x x N_x matrices built from
/// the DFT symbol (i 2 pi kappa)^o, Nyquist zeroed for odd orders, then
/// symmetrized so odd orders are exactly skew and even orders exactly
/// symmetric.  Temporal factors are dense matrices from fixed-width Lagrange
/// stencils of polynomial order p (one-sided near the ends).  Different axes
/// commute, so mixed derivatives apply factor by factor.
class DiffPlan {
  public:
    /// k is the regularity order (2k > (d+1)/2 + 3 enforced); p defaults to
    /// max(2k, 8) clipped to N_t - 1.
    DiffPlan(GridPtr grid, int k, int stencil_order = 0);

    const GridPtr& grid() const { return grid_; }
    int regularity() const { return k_; }
    int stencil_order() const { return p_; }

    /// Mixed discrete derivative; |beta| <= 2k.
    SpaceTimeField partial(const SpaceTimeField& f, const MultiIndex& beta) const;

    /// Spatial gradient components, one field per dimension.
    std::vector<SpaceTimeField> gradient_x(const SpaceTimeField& f) const;
    /// Sum of pure second derivatives weighted by coefficient profiles:
    /// a11 u_x1x1 [+ 2 a12 u_x1x2 + a22 u_x2x2].  Profiles are x-only.
    SpaceTimeField diffusion_term(const SpaceTimeField& u,
                                  const std::vector<Eigen::VectorXd>& a) const;
    /// Spectral divergence of a vector field given by components.
    SpaceTimeField divergence_x(const std::vector<SpaceTimeField>& q) const;
    /// sum_ij d_{x_i x_j} ( a_ij(x) rho ); derivatives land on the product.
    SpaceTimeField diffusion_divergence(const SpaceTimeField& rho,
                                        const std::vector<Eigen::VectorXd>& a) const;
    /// Temporal derivative (order 1 shortcut).
    SpaceTimeField time_derivative(const SpaceTimeField& f) const;

    /// f + sum over |beta| = 2k of d^(2 beta) f, computed by composing the
    /// order-(<= 2k) factors twice.  Used for the smooth data offsets.
    SpaceTimeField data_offset(const SpaceTimeField& f) const;

    /// All multi-indices with |beta| = 2k for this dimension.
    const std::vector<MultiIndex>& top_order_indices() const { return betas_; }

    const Eigen::MatrixXd& time_matrix(int order) const;
    const Eigen::MatrixXd& space_matrix(int order) const;

    /// Apply an N_t x N_t matrix along the time axis.
    Eigen::MatrixXd apply_time(const Eigen::MatrixXd& M, const Eigen::MatrixXd& v) const;
    /// Apply an N_x x N_x matrix along spatial axis 0 or 1.
    Eigen::MatrixXd apply_space(const Eigen::MatrixXd& M, const Eigen::MatrixXd& v, int axis) const;

  private:
    GridPtr grid_;
    int k_;
    int p_;
    std::vector<Eigen::MatrixXd> dt_;  // dt_[o-1]: temporal derivative of order o
    std::vector<Eigen::MatrixXd> dx_;  // dx_[o-1]: spectral derivative of order o
    std::vector<MultiIndex> betas_;
};

}  // namespace mfg
