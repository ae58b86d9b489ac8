#include "mfg/field.hpp"

#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

SpaceTimeField::SpaceTimeField(GridPtr grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() != grid_->rows() || values_.cols() != grid_->cols())
        throw ShapeError("SpaceTimeField: value shape does not match grids");
}

SpaceTimeField SpaceTimeField::zeros(const GridPtr& grid) {
    return {grid, Eigen::MatrixXd::Zero(grid->rows(), grid->cols())};
}

SpaceTimeField SpaceTimeField::constant(const GridPtr& grid, double c) {
    return {grid, Eigen::MatrixXd::Constant(grid->rows(), grid->cols(), c)};
}

SpaceTimeField SpaceTimeField::sample(const GridPtr& grid,
                                      const std::function<double(double, double, double)>& f) {
    Eigen::MatrixXd v(grid->rows(), grid->cols());
    const auto& tg = grid->time;
    const auto& xg = grid->torus;
    for (int i = 0; i < grid->rows(); ++i) {
        const double t = tg.node(i);
        if (xg.dim() == 1) {
            for (int j = 0; j < xg.points_per_dim(); ++j) v(i, j) = f(t, xg.coord(j), 0.0);
        } else {
            for (int j1 = 0; j1 < xg.points_per_dim(); ++j1)
                for (int j2 = 0; j2 < xg.points_per_dim(); ++j2)
                    v(i, xg.site(j1, j2)) = f(t, xg.coord(j1), xg.coord(j2));
        }
    }
    SpaceTimeField out(grid, std::move(v));
    out.ensure_finite("sample");
    return out;
}

SpaceTimeField SpaceTimeField::broadcast_space(const GridPtr& grid, const Eigen::VectorXd& profile) {
    if (profile.size() != grid->cols()) throw ShapeError("broadcast_space: profile length mismatch");
    Eigen::MatrixXd v = profile.transpose().replicate(grid->rows(), 1);
    return {grid, std::move(v)};
}

SpaceTimeField SpaceTimeField::broadcast_time(const GridPtr& grid, const Eigen::VectorXd& series) {
    if (series.size() != grid->rows()) throw ShapeError("broadcast_time: series length mismatch");
    Eigen::MatrixXd v = series.replicate(1, grid->cols());
    return {grid, std::move(v)};
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& g) {
    require_same_grid(g, "field add");
    values_ += g.values_;
    return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& g) {
    require_same_grid(g, "field sub");
    values_ -= g.values_;
    return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double a) {
    values_ *= a;
    return *this;
}

void SpaceTimeField::ensure_finite(const std::string& where) const {
    if (!values_.allFinite())
        throw NonFiniteError("non-finite value in " + where);
}

void SpaceTimeField::require_same_grid(const SpaceTimeField& other, const std::string& where) const {
    if (!grid_ || !other.grid_ || !grid_->compatible(*other.grid_))
        throw ShapeError("incompatible grids in " + where);
}

SpaceTimeField operator+(SpaceTimeField f, const SpaceTimeField& g) { return f += g; }
SpaceTimeField operator-(SpaceTimeField f, const SpaceTimeField& g) { return f -= g; }
SpaceTimeField operator*(double a, SpaceTimeField f) { return f *= a; }

SpaceTimeField cwise(const SpaceTimeField& f, const SpaceTimeField& g) {
    f.require_same_grid(g, "cwise");
    return {f.grid(), f.values().cwiseProduct(g.values())};
}

SpaceTimeField quadrature_weights(const GridPtr& grid) {
    Eigen::MatrixXd w = grid->time.quad_weights().replicate(1, grid->cols());
    w *= grid->torus.site_weight();
    return {grid, std::move(w)};
}

double inner(const SpaceTimeField& f, const SpaceTimeField& g) {
    f.require_same_grid(g, "inner");
    const Eigen::VectorXd& wt = f.time().quad_weights();
    const double wx = f.torus().site_weight();
    double acc = 0.0;
    for (int i = 0; i < f.rows(); ++i)
        acc += wt[i] * f.values().row(i).dot(g.values().row(i));
    return acc * wx;
}

double norm_l2(const SpaceTimeField& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double norm_inf(const SpaceTimeField& f) { return f.values().cwiseAbs().maxCoeff(); }

double norm_lp(const SpaceTimeField& f, double p) {
    const Eigen::VectorXd& wt = f.time().quad_weights();
    const double wx = f.torus().site_weight();
    double acc = 0.0;
    for (int i = 0; i < f.rows(); ++i)
        acc += wt[i] * f.values().row(i).cwiseAbs().array().pow(p).sum();
    return std::pow(acc * wx, 1.0 / p);
}

Eigen::VectorXd spatial_mean(const SpaceTimeField& u) {
    return u.values().rowwise().mean();
}

Eigen::VectorXd mass_per_slice(const SpaceTimeField& m) {
    return spatial_mean(m);  // unit torus measure
}

SpaceTimeField remove_spatial_mean(const SpaceTimeField& u) {
    Eigen::MatrixXd v = u.values();
    v.colwise() -= v.rowwise().mean();
    return {u.grid(), std::move(v)};
}

}  // namespace mfg
