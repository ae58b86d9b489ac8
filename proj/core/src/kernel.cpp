#include "mfg/kernel.hpp"

#include <cmath>
#include <functional>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

// Signed periodic distance to 0 for a coordinate in [0,1).
double wrap_dist(double x) { return x > 0.5 ? x - 1.0 : x; }

Eigen::VectorXd sample_radial(const TorusGrid& grid, const std::function<double(double)>& rho) {
    const int nx = grid.points_per_dim();
    Eigen::VectorXd s(grid.site_count());
    if (grid.dim() == 1) {
        for (int j = 0; j < nx; ++j) s[j] = rho(std::abs(wrap_dist(grid.coord(j))));
    } else {
        for (int j1 = 0; j1 < nx; ++j1)
            for (int j2 = 0; j2 < nx; ++j2) {
                const double r = std::hypot(wrap_dist(grid.coord(j1)), wrap_dist(grid.coord(j2)));
                s[grid.site(j1, j2)] = rho(r);
            }
    }
    return s;
}

}  // namespace

PeriodicKernel::PeriodicKernel(const TorusGrid& grid, Eigen::VectorXd samples)
    : dim_(grid.dim()), nx_(grid.points_per_dim()), samples_(std::move(samples)) {
    if (samples_.size() != grid.site_count())
        throw ShapeError("PeriodicKernel: sample count does not match grid");
    if (samples_.minCoeff() < 0.0) throw DomainError("PeriodicKernel: kernel must be nonnegative");
    const double raw_mass = samples_.sum() * grid.site_weight();
    if (raw_mass <= 0.0) throw DomainError("PeriodicKernel: kernel mass must be positive");
    samples_ /= raw_mass;  // exact unit discrete mass

    // ζ(x) = ζ(-x) on the grid
    auto mirrored = [this](int j) { return (nx_ - j) % nx_; };
    double asym = 0.0;
    if (dim_ == 1) {
        for (int j = 0; j < nx_; ++j) asym = std::max(asym, std::abs(samples_[j] - samples_[mirrored(j)]));
    } else {
        for (int j1 = 0; j1 < nx_; ++j1)
            for (int j2 = 0; j2 < nx_; ++j2)
                asym = std::max(asym, std::abs(samples_[j1 * nx_ + j2] -
                                               samples_[mirrored(j1) * nx_ + mirrored(j2)]));
    }
    if (asym > 1e-10 * samples_.maxCoeff())
        throw DomainError("PeriodicKernel: kernel must be even-symmetric on the grid");

    // Dense circulant: op(i, j) = wx * zeta[i - j mod N], symmetric for even kernels.
    const int ns = dim_ == 1 ? nx_ : nx_ * nx_;
    const double wx = 1.0 / ns;
    op_.resize(ns, ns);
    if (dim_ == 1) {
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns; ++j) op_(i, j) = wx * samples_[((i - j) % nx_ + nx_) % nx_];
    } else {
        for (int i1 = 0; i1 < nx_; ++i1)
            for (int i2 = 0; i2 < nx_; ++i2)
                for (int j1 = 0; j1 < nx_; ++j1)
                    for (int j2 = 0; j2 < nx_; ++j2)
                        op_(i1 * nx_ + i2, j1 * nx_ + j2) =
                            wx * samples_[(((i1 - j1) % nx_ + nx_) % nx_) * nx_ +
                                          (((i2 - j2) % nx_ + nx_) % nx_)];
    }
    op_ = 0.5 * (op_ + op_.transpose()).eval();
}

PeriodicKernel PeriodicKernel::wrapped_gaussian(const TorusGrid& grid, double width) {
    if (!(width > 0.0)) throw DomainError("wrapped_gaussian: width must be positive");
    auto rho = [width](double r) {
        double acc = 0.0;
        for (int n = -3; n <= 3; ++n) acc += std::exp(-0.5 * std::pow((r + n) / width, 2));
        return acc;
    };
    return PeriodicKernel(grid, sample_radial(grid, rho));
}

PeriodicKernel PeriodicKernel::bump(const TorusGrid& grid, double radius) {
    if (!(radius > 0.0) || radius > 0.5) throw DomainError("bump: radius must lie in (0, 0.5]");
    auto rho = [radius](double r) {
        const double s = r / radius;
        return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    };
    return PeriodicKernel(grid, sample_radial(grid, rho));
}

double PeriodicKernel::mass() const { return samples_.sum() / samples_.size(); }

bool PeriodicKernel::even_symmetric(double tol) const {
    auto mirrored = [this](int j) { return (nx_ - j) % nx_; };
    if (dim_ == 1) {
        for (int j = 0; j < nx_; ++j)
            if (std::abs(samples_[j] - samples_[mirrored(j)]) > tol) return false;
        return true;
    }
    for (int j1 = 0; j1 < nx_; ++j1)
        for (int j2 = 0; j2 < nx_; ++j2)
            if (std::abs(samples_[j1 * nx_ + j2] - samples_[mirrored(j1) * nx_ + mirrored(j2)]) > tol)
                return false;
    return true;
}

SpaceTimeField PeriodicKernel::convolve(const SpaceTimeField& f) const {
    if (f.cols() != op_.rows()) throw ShapeError("convolve: kernel grid mismatch");
    SpaceTimeField out(f.grid(), f.values() * op_.transpose());
    out.ensure_finite("convolve");
    return out;
}

Eigen::VectorXd PeriodicKernel::convolve_profile(const Eigen::VectorXd& f) const {
    if (f.size() != op_.rows()) throw ShapeError("convolve_profile: kernel grid mismatch");
    return op_ * f;
}

}  // namespace mfg
