#pragma once

#include <Eigen/Dense>
#include <memory>

namespace mfg {

/// Uniform grid on [0, T] with end-corrected quadrature weights.
///
/// The weights are a Gregory-type correction of the composite trapezoid
/// rule: the minimum-norm perturbation that makes the rule exact on
/// polynomials up to degree `exact_degree()`.  Weights stay positive and
/// sum to T; the correction is what lets the discrete pairings cancel
/// integration-by-parts terms to rounding instead of O(h^2).
class TimeGrid {
  public:
    TimeGrid(double horizon, int node_count);

    double horizon() const { return horizon_; }
    int node_count() const { return n_; }
    double spacing() const { return horizon_ / (n_ - 1); }
    double node(int i) const { return nodes_[i]; }
    const Eigen::VectorXd& nodes() const { return nodes_; }
    const Eigen::VectorXd& quad_weights() const { return weights_; }
    int exact_degree() const { return exact_degree_; }

  private:
    double horizon_;
    int n_;
    Eigen::VectorXd nodes_;
    Eigen::VectorXd weights_;
    int exact_degree_;
};

/// Uniform periodic grid on the unit torus T^d, d in {1, 2}.
class TorusGrid {
  public:
    TorusGrid(int dim, int points_per_dim);

    int dim() const { return dim_; }
    int points_per_dim() const { return nx_; }
    double spacing() const { return 1.0 / nx_; }
    /// Number of spatial sites, N_x^d.
    int site_count() const { return sites_; }
    /// Quadrature weight of one site (uniform exact rule).
    double site_weight() const { return weight_; }
    /// Physical coordinate of site index along one axis.
    double coord(int j) const { return static_cast<double>(j) / nx_; }
    /// Flattened site index from per-axis indices (wraps modulo N_x).
    int site(int i1, int i2 = 0) const;

  private:
    int dim_;
    int nx_;
    int sites_;
    double weight_;
};

/// A time grid and a torus grid bundled; fields share one via shared_ptr.
struct SpaceTimeGrid {
    TimeGrid time;
    TorusGrid torus;

    SpaceTimeGrid(TimeGrid t, TorusGrid x) : time(std::move(t)), torus(std::move(x)) {}

    int rows() const { return time.node_count(); }
    int cols() const { return torus.site_count(); }
    double measure() const { return time.horizon(); }  // unit torus

    bool compatible(const SpaceTimeGrid& other) const;
};

using GridPtr = std::shared_ptr<const SpaceTimeGrid>;

GridPtr make_grid(double horizon, int time_nodes, int dim, int space_nodes);

}  // namespace mfg
