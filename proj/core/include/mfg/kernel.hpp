#pragma once

#include <Eigen/Dense>

#include "mfg/field.hpp"

namespace mfg {

/// Nonnegative, even-symmetric convolution kernel on the torus grid,
/// renormalized at construction to exact unit discrete mass.
class PeriodicKernel {
  public:
    /// `samples` has length N_x (d=1) or N_x^2 (d=2, row-major).
    PeriodicKernel(const TorusGrid& grid, Eigen::VectorXd samples);

    static PeriodicKernel wrapped_gaussian(const TorusGrid& grid, double width);
    static PeriodicKernel bump(const TorusGrid& grid, double radius);

    const Eigen::VectorXd& samples() const { return samples_; }
    /// Discrete mass wx * sum(samples); exactly 1 after renormalization.
    double mass() const;
    bool even_symmetric(double tol = 1e-10) const;

    /// Circular convolution slice by slice in t; preserves slice mass.
    SpaceTimeField convolve(const SpaceTimeField& f) const;
    /// Convolve an x-only profile.
    Eigen::VectorXd convolve_profile(const Eigen::VectorXd& f) const;

  private:
    int dim_;
    int nx_;
    Eigen::VectorXd samples_;
    Eigen::MatrixXd op_;  // dense circulant, site_count x site_count
};

}  // namespace mfg
