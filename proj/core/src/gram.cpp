#include "mfg/gram.hpp"

#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

GramOperator::GramOperator(std::shared_ptr<const DiffPlan> plan, double epsilon)
    : plan_(std::move(plan)), epsilon_(epsilon), weight_(quadrature_weights(plan_->grid())) {
    if (!(epsilon_ > 0.0)) throw DomainError("GramOperator: epsilon must be positive");

    const auto& g = *plan_->grid();
    const int nx = g.torus.points_per_dim();
    const int nt = g.rows();
    const int k2 = 2 * plan_->regularity();

    dft_.resize(nx, nx);
    idft_.resize(nx, nx);
    for (int r = 0; r < nx; ++r)
        for (int c = 0; c < nx; ++c) {
            const double phase = -2.0 * M_PI * r * c / nx;
            dft_(r, c) = std::complex<double>(std::cos(phase), std::sin(phase));
            idft_(r, c) = std::conj(dft_(r, c)) / double(nx);
        }

    // Jacobi lump of (Dt^j)^T diag(wt) Dt^j in the wt metric, per order.
    const Eigen::VectorXd& wt = g.time.quad_weights();
    Eigen::MatrixXd lump(k2 + 1, nt);
    lump.row(0).setOnes();
    for (int j = 1; j <= k2; ++j) {
        const Eigen::MatrixXd& dt = plan_->time_matrix(j);
        for (int i = 0; i < nt; ++i)
            lump(j, i) = dt.col(i).cwiseAbs2().dot(wt) / wt[i];
    }

    // Preconditioner diagonal per (t index, spatial frequency tuple).
    auto freq = [nx](int j) { return j <= nx / 2 ? j : j - nx; };
    const int d = g.torus.dim();
    const int ncols = g.cols();
    symbol_t_.resize(nt, ncols);
    symbol_t_.setZero();
    for (int col = 0; col < ncols; ++col) {
        const int k1 = d == 1 ? col : col / nx;
        const int k2i = d == 1 ? 0 : col % nx;
        const double w1 = 2.0 * M_PI * freq(k1);
        const double w2 = 2.0 * M_PI * freq(k2i);
        for (const auto& beta : plan_->top_order_indices()) {
            const double sym = std::pow(w1 * w1, beta[1]) * std::pow(w2 * w2, beta[2]);
            for (int i = 0; i < nt; ++i) symbol_t_(i, col) += sym * lump(beta[0], i);
        }
        for (int i = 0; i < nt; ++i)
            symbol_t_(i, col) = epsilon_ * (1.0 + symbol_t_(i, col));
    }
}

SpaceTimeField GramOperator::apply(const SpaceTimeField& w) const {
    const auto& g = *plan_->grid();
    if (!w.grid()->compatible(g)) throw ShapeError("gram apply: grid mismatch");
    const Eigen::VectorXd& wt = g.time.quad_weights();
    const double wx = g.torus.site_weight();

    Eigen::MatrixXd acc = w.values();
    acc.array().colwise() *= wt.array();
    acc *= wx;

    for (const auto& beta : plan_->top_order_indices()) {
        Eigen::MatrixXd v = w.values();
        if (beta[1] > 0) v = plan_->apply_space(plan_->space_matrix(beta[1]), v, 0);
        if (beta[2] > 0) v = plan_->apply_space(plan_->space_matrix(beta[2]), v, 1);
        if (beta[0] > 0) v = plan_->apply_time(plan_->time_matrix(beta[0]), v);
        v.array().colwise() *= wt.array();
        v *= wx;
        if (beta[0] > 0) v = plan_->apply_time(plan_->time_matrix(beta[0]).transpose(), v);
        if (beta[2] > 0) v = plan_->apply_space(plan_->space_matrix(beta[2]).transpose(), v, 1);
        if (beta[1] > 0) v = plan_->apply_space(plan_->space_matrix(beta[1]).transpose(), v, 0);
        acc += v;
    }
    SpaceTimeField out(w.grid(), epsilon_ * acc);
    out.ensure_finite("gram apply");
    return out;
}

SpaceTimeField GramOperator::apply_metric(const SpaceTimeField& w) const {
    SpaceTimeField dual = apply(w);
    dual.values().array() /= weight_.values().array();
    return dual;
}

double GramOperator::energy(const SpaceTimeField& w) const {
    SpaceTimeField dual = apply(w);
    return dual.values().cwiseProduct(w.values()).sum();
}

double GramOperator::sobolev_energy(const SpaceTimeField& w) const {
    return energy(w) / epsilon_;
}

SpaceTimeField GramOperator::precondition(const SpaceTimeField& r) const {
    const auto& g = *plan_->grid();
    if (!r.grid()->compatible(g)) throw ShapeError("precondition: grid mismatch");
    const int d = g.torus.dim();
    const int nx = g.torus.points_per_dim();
    const int nt = g.rows();

    Eigen::MatrixXcd z = r.values().cast<std::complex<double>>();
    if (d == 1) {
        z = z * dft_.transpose();
    } else {
        for (int i = 0; i < nt; ++i) {
            Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
                slice(z.row(i).data(), nx, nx);
            slice = (dft_ * slice * dft_.transpose()).eval();
        }
    }
    z.array() /= symbol_t_.array();
    if (d == 1) {
        z = z * idft_.transpose();
    } else {
        for (int i = 0; i < nt; ++i) {
            Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
                slice(z.row(i).data(), nx, nx);
            slice = (idft_ * slice * idft_.transpose()).eval();
        }
    }
    SpaceTimeField out(r.grid(), z.real());
    out.ensure_finite("precondition");
    return out;
}

}  // namespace mfg
