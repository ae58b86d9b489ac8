#include "mfg/diff_plan.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

// Fornberg finite-difference weights: derivatives 0..m at point z from
// nodes x[0..n].  Returns (n+1) x (m+1); column j holds order-j weights.
Eigen::MatrixXd fornberg_weights(double z, const Eigen::VectorXd& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + 1, m + 1);
    double c1 = 1.0;
    double c4 = x[0] - z;
    c(0, 0) = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j <= i - 1; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int s = mn; s >= 1; --s)
                    c(i, s) = c1 * (s * c(i - 1, s - 1) - c5 * c(i - 1, s)) / c2;
                c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
            }
            for (int s = mn; s >= 1; --s)
                c(j, s) = (c4 * c(j, s) - s * c(j, s - 1)) / c3;
            c(j, 0) = c4 * c(j, 0) / c3;
        }
        c1 = c2;
    }
    return c;
}

// Dense temporal differentiation matrix of the given order from width-(p+1)
// stencils, one-sided near the ends.
Eigen::MatrixXd time_diff_matrix(const TimeGrid& tg, int order, int p) {
    const int n = tg.node_count();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const int width = p + 1;
    for (int i = 0; i < n; ++i) {
        int start = std::clamp(i - p / 2, 0, n - width);
        Eigen::VectorXd stencil(width);
        for (int s = 0; s < width; ++s) stencil[s] = tg.node(start + s);
        Eigen::MatrixXd w = fornberg_weights(tg.node(i), stencil, order);
        for (int s = 0; s < width; ++s) d(i, start + s) = w(s, order);
    }
    return d;
}

// Dense spectral differentiation matrix of the given order on N uniform
// periodic points: D = Re(F^-1 diag(symbol) F), Nyquist zeroed for odd
// orders, then symmetrized so the parity is exact in floating point.
Eigen::MatrixXd space_diff_matrix(int n, int order) {
    using cplx = std::complex<double>;
    const double two_pi = 2.0 * M_PI;
    Eigen::VectorXcd symbol(n);
    for (int j = 0; j < n; ++j) {
        const int kappa = j <= n / 2 ? j : j - n;
        if (order % 2 == 1 && j == n / 2)
            symbol[j] = 0.0;
        else
            symbol[j] = std::pow(cplx(0.0, two_pi * kappa), order);
    }
    Eigen::MatrixXd d(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            cplx acc = 0.0;
            for (int j = 0; j < n; ++j) {
                const double phase = two_pi * j * (r - c) / n;
                acc += symbol[j] * cplx(std::cos(phase), std::sin(phase));
            }
            d(r, c) = acc.real() / n;
        }
    }
    if (order % 2 == 0)
        d = 0.5 * (d + d.transpose()).eval();
    else
        d = 0.5 * (d - d.transpose()).eval();
    return d;
}

std::vector<MultiIndex> enumerate_top_order(int dim, int total) {
    std::vector<MultiIndex> out;
    if (dim == 1) {
        for (int bt = 0; bt <= total; ++bt) out.push_back({bt, total - bt, 0});
    } else {
        for (int bt = 0; bt <= total; ++bt)
            for (int b1 = 0; b1 + bt <= total; ++b1) out.push_back({bt, b1, total - bt - b1});
    }
    return out;
}

}  // namespace

DiffPlan::DiffPlan(GridPtr grid, int k, int stencil_order) : grid_(std::move(grid)), k_(k) {
    const int d = grid_->torus.dim();
    if (2 * k_ <= (d + 1) / 2.0 + 3.0)
        throw OrderError("DiffPlan: regularity order too small, need 2k > (d+1)/2 + 3");
    const int nt = grid_->time.node_count();
    p_ = stencil_order > 0 ? stencil_order : std::max(2 * k_, 8);
    p_ = std::min(p_, nt - 1);
    if (p_ < 2 * k_) throw OrderError("DiffPlan: time grid too coarse for the requested order");

    dt_.reserve(2 * k_);
    for (int o = 1; o <= 2 * k_; ++o) dt_.push_back(time_diff_matrix(grid_->time, o, p_));
    dx_.reserve(2 * k_);
    for (int o = 1; o <= 2 * k_; ++o)
        dx_.push_back(space_diff_matrix(grid_->torus.points_per_dim(), o));
    betas_ = enumerate_top_order(d, 2 * k_);
}

const Eigen::MatrixXd& DiffPlan::time_matrix(int order) const {
    if (order < 1 || order > 2 * k_) throw OrderError("time derivative order out of range");
    return dt_[order - 1];
}

const Eigen::MatrixXd& DiffPlan::space_matrix(int order) const {
    if (order < 1 || order > 2 * k_) throw OrderError("space derivative order out of range");
    return dx_[order - 1];
}

Eigen::MatrixXd DiffPlan::apply_time(const Eigen::MatrixXd& M, const Eigen::MatrixXd& v) const {
    return M * v;
}

Eigen::MatrixXd DiffPlan::apply_space(const Eigen::MatrixXd& M, const Eigen::MatrixXd& v,
                                      int axis) const {
    const int d = grid_->torus.dim();
    if (d == 1) return v * M.transpose();
    const int nx = grid_->torus.points_per_dim();
    Eigen::MatrixXd out(v.rows(), v.cols());
    for (int i = 0; i < v.rows(); ++i) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            slice(v.row(i).data(), nx, nx);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> res;
        if (axis == 0)
            res = M * slice;  // acts on x1
        else
            res = slice * M.transpose();  // acts on x2
        out.row(i) = Eigen::Map<const Eigen::RowVectorXd>(res.data(), nx * nx);
    }
    return out;
}

SpaceTimeField DiffPlan::partial(const SpaceTimeField& f, const MultiIndex& beta) const {
    if (!f.grid()->compatible(*grid_)) throw ShapeError("partial: field grid mismatch");
    const int d = grid_->torus.dim();
    if (d == 1 && beta[2] != 0) throw OrderError("partial: x2 index on a 1-d torus");
    const int total = beta[0] + beta[1] + beta[2];
    if (total > 2 * k_) throw OrderError("partial: |beta| exceeds 2k");
    for (int b : beta)
        if (b < 0) throw OrderError("partial: negative multi-index entry");

    Eigen::MatrixXd v = f.values();
    if (beta[1] > 0) v = apply_space(space_matrix(beta[1]), v, 0);
    if (beta[2] > 0) v = apply_space(space_matrix(beta[2]), v, 1);
    if (beta[0] > 0) v = apply_time(time_matrix(beta[0]), v);
    SpaceTimeField out(f.grid(), std::move(v));
    out.ensure_finite("partial");
    return out;
}

std::vector<SpaceTimeField> DiffPlan::gradient_x(const SpaceTimeField& f) const {
    std::vector<SpaceTimeField> g;
    g.push_back(partial(f, {0, 1, 0}));
    if (grid_->torus.dim() == 2) g.push_back(partial(f, {0, 0, 1}));
    return g;
}

SpaceTimeField DiffPlan::diffusion_term(const SpaceTimeField& u,
                                        const std::vector<Eigen::VectorXd>& a) const {
    const int d = grid_->torus.dim();
    SpaceTimeField out = SpaceTimeField::zeros(u.grid());
    if (d == 1) {
        SpaceTimeField uxx = partial(u, {0, 2, 0});
        out.values() = uxx.values().array().rowwise() * a[0].transpose().array();
    } else {
        SpaceTimeField u11 = partial(u, {0, 2, 0});
        SpaceTimeField u12 = partial(u, {0, 1, 1});
        SpaceTimeField u22 = partial(u, {0, 0, 2});
        out.values() = u11.values().array().rowwise() * a[0].transpose().array();
        out.values() += 2.0 * (u12.values().array().rowwise() * a[1].transpose().array()).matrix();
        out.values() += (u22.values().array().rowwise() * a[2].transpose().array()).matrix();
    }
    return out;
}

SpaceTimeField DiffPlan::divergence_x(const std::vector<SpaceTimeField>& q) const {
    SpaceTimeField out = partial(q[0], {0, 1, 0});
    if (grid_->torus.dim() == 2) out += partial(q[1], {0, 0, 1});
    return out;
}

SpaceTimeField DiffPlan::diffusion_divergence(const SpaceTimeField& rho,
                                              const std::vector<Eigen::VectorXd>& a) const {
    auto weighted = [&](const Eigen::VectorXd& coeff) {
        Eigen::MatrixXd v = rho.values().array().rowwise() * coeff.transpose().array();
        return SpaceTimeField(rho.grid(), std::move(v));
    };
    if (grid_->torus.dim() == 1) return partial(weighted(a[0]), {0, 2, 0});
    SpaceTimeField out = partial(weighted(a[0]), {0, 2, 0});
    out += 2.0 * partial(weighted(a[1]), {0, 1, 1});
    out += partial(weighted(a[2]), {0, 0, 2});
    return out;
}

SpaceTimeField DiffPlan::time_derivative(const SpaceTimeField& f) const {
    return partial(f, {1, 0, 0});
}

SpaceTimeField DiffPlan::data_offset(const SpaceTimeField& f) const {
    SpaceTimeField acc = f;
    for (const auto& beta : betas_) {
        SpaceTimeField once = partial(f, beta);
        acc += partial(once, beta);
    }
    acc.ensure_finite("data_offset");
    return acc;
}

}  // namespace mfg
