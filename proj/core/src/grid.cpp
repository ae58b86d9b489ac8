#include "mfg/grid.hpp"

#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

// Shifted-Legendre values P_j(t/T) on the nodes; orthogonal-ish constraint
// basis keeps the correction solve well conditioned.
Eigen::MatrixXd legendre_rows(const Eigen::VectorXd& nodes, double horizon, int degree) {
    const int n = static_cast<int>(nodes.size());
    Eigen::MatrixXd p(degree + 1, n);
    for (int i = 0; i < n; ++i) {
        const double s = 2.0 * nodes[i] / horizon - 1.0;
        p(0, i) = 1.0;
        if (degree >= 1) p(1, i) = s;
        for (int j = 2; j <= degree; ++j)
            p(j, i) = ((2 * j - 1) * s * p(j - 1, i) - (j - 1) * p(j - 2, i)) / j;
    }
    return p;
}

// Minimum-norm correction of trapezoid weights enforcing exactness on
// polynomials of degree <= q.  Falls back to smaller q if positivity fails.
Eigen::VectorXd corrected_weights(const Eigen::VectorXd& nodes, double horizon, int& q_out) {
    const int n = static_cast<int>(nodes.size());
    const double h = horizon / (n - 1);
    Eigen::VectorXd trap = Eigen::VectorXd::Constant(n, h);
    trap[0] = trap[n - 1] = 0.5 * h;

    int q = n >= 16 ? 8 : 4;
    while (q >= 2) {
        Eigen::MatrixXd v = legendre_rows(nodes, horizon, q);
        Eigen::VectorXd moments = Eigen::VectorXd::Zero(q + 1);
        moments[0] = horizon;  // int_0^T P_0 = T, higher Legendre moments vanish
        Eigen::VectorXd defect = moments - v * trap;
        Eigen::VectorXd w =
            trap + v.transpose() * (v * v.transpose()).ldlt().solve(defect);
        if (w.minCoeff() > 0.0) {
            q_out = q;
            return w;
        }
        q -= 2;
    }
    q_out = 1;
    return trap;
}

}  // namespace

TimeGrid::TimeGrid(double horizon, int node_count) : horizon_(horizon), n_(node_count) {
    if (!(horizon > 0.0)) throw ShapeError("TimeGrid: horizon must be positive");
    if (n_ < 8) throw ShapeError("TimeGrid: need at least 8 nodes");
    nodes_.resize(n_);
    const double h = horizon_ / (n_ - 1);
    for (int i = 0; i < n_; ++i) nodes_[i] = i * h;
    nodes_[0] = 0.0;
    nodes_[n_ - 1] = horizon_;
    weights_ = corrected_weights(nodes_, horizon_, exact_degree_);
}

TorusGrid::TorusGrid(int dim, int points_per_dim) : dim_(dim), nx_(points_per_dim) {
    if (dim_ != 1 && dim_ != 2) throw ShapeError("TorusGrid: dim must be 1 or 2");
    if (nx_ < 8 || nx_ % 2 != 0) throw ShapeError("TorusGrid: points_per_dim must be even and >= 8");
    sites_ = dim_ == 1 ? nx_ : nx_ * nx_;
    weight_ = 1.0 / sites_;
}

int TorusGrid::site(int i1, int i2) const {
    auto wrap = [this](int i) {
        int r = i % nx_;
        return r < 0 ? r + nx_ : r;
    };
    return dim_ == 1 ? wrap(i1) : wrap(i1) * nx_ + wrap(i2);
}

bool SpaceTimeGrid::compatible(const SpaceTimeGrid& other) const {
    return time.node_count() == other.time.node_count() &&
           time.horizon() == other.time.horizon() && torus.dim() == other.torus.dim() &&
           torus.points_per_dim() == other.torus.points_per_dim();
}

GridPtr make_grid(double horizon, int time_nodes, int dim, int space_nodes) {
    return std::make_shared<const SpaceTimeGrid>(TimeGrid(horizon, time_nodes),
                                                 TorusGrid(dim, space_nodes));
}

}  // namespace mfg
