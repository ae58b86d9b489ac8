#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "mfg/grid.hpp"

namespace mfg {

/// Scalar values on a tensor grid over [0,T] x T^d.
///
/// Storage is an N_t x N_x^d matrix, row i holding the slice at t_i.  For
/// d = 2 the site index flattens as i1 * N_x + i2.  Fields are plain values;
/// every operation returns a fresh field and checks finiteness on exit.
class SpaceTimeField {
  public:
    SpaceTimeField() = default;
    SpaceTimeField(GridPtr grid, Eigen::MatrixXd values);

    static SpaceTimeField zeros(const GridPtr& grid);
    static SpaceTimeField constant(const GridPtr& grid, double c);
    /// Sample f(t, x1[, x2]) on the grid.
    static SpaceTimeField sample(const GridPtr& grid,
                                 const std::function<double(double, double, double)>& f);
    /// Broadcast an x-only profile (length N_x^d) across all time slices.
    static SpaceTimeField broadcast_space(const GridPtr& grid, const Eigen::VectorXd& profile);
    /// Broadcast a time series (length N_t) across all sites.
    static SpaceTimeField broadcast_time(const GridPtr& grid, const Eigen::VectorXd& series);

    bool empty() const { return !grid_; }
    const GridPtr& grid() const { return grid_; }
    const TimeGrid& time() const { return grid_->time; }
    const TorusGrid& torus() const { return grid_->torus; }
    int rows() const { return static_cast<int>(values_.rows()); }
    int cols() const { return static_cast<int>(values_.cols()); }

    const Eigen::MatrixXd& values() const { return values_; }
    Eigen::MatrixXd& values() { return values_; }
    double operator()(int i, int j) const { return values_(i, j); }
    double& operator()(int i, int j) { return values_(i, j); }

    SpaceTimeField& operator+=(const SpaceTimeField& g);
    SpaceTimeField& operator-=(const SpaceTimeField& g);
    SpaceTimeField& operator*=(double a);

    /// Throws NonFiniteError naming `where` if any entry is NaN/Inf.
    void ensure_finite(const std::string& where) const;
    void require_same_grid(const SpaceTimeField& other, const std::string& where) const;

  private:
    GridPtr grid_;
    Eigen::MatrixXd values_;
};

SpaceTimeField operator+(SpaceTimeField f, const SpaceTimeField& g);
SpaceTimeField operator-(SpaceTimeField f, const SpaceTimeField& g);
SpaceTimeField operator*(double a, SpaceTimeField f);

/// Pointwise product.
SpaceTimeField cwise(const SpaceTimeField& f, const SpaceTimeField& g);

/// Space-time quadrature weights as a field: W(i, j) = wt_i * wx.
SpaceTimeField quadrature_weights(const GridPtr& grid);

/// Trapezoid-in-t x uniform-in-x quadrature of f*g over [0,T] x T^d
/// (with the grid's end-corrected t-weights).
double inner(const SpaceTimeField& f, const SpaceTimeField& g);

double norm_l2(const SpaceTimeField& f);
double norm_inf(const SpaceTimeField& f);
/// ( integral of |f|^p )^(1/p).
double norm_lp(const SpaceTimeField& f, double p);

/// Per-slice spatial average, length N_t.
Eigen::VectorXd spatial_mean(const SpaceTimeField& u);
/// Per-slice mass: spatial mean scaled by the torus measure (1).
Eigen::VectorXd mass_per_slice(const SpaceTimeField& m);

/// u minus its per-slice spatial mean.
SpaceTimeField remove_spatial_mean(const SpaceTimeField& u);

}  // namespace mfg
