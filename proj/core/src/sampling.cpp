#include "mfg/sampling.hpp"

#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

FieldSampler::FieldSampler(GridPtr grid, const DiffPlan& plan, std::uint64_t seed)
    : grid_(std::move(grid)), k_(plan.regularity()), decay_(plan.regularity() + 1.0), rng_(seed) {}

SpaceTimeField FieldSampler::smooth(double amplitude, int t_degree) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto& tg = grid_->time;
    const auto& xg = grid_->torus;
    const int nt = tg.node_count();
    const int kmax = std::max(1, xg.points_per_dim() / 4);
    const double horizon = tg.horizon();

    // Legendre polynomials in s = 2t/T - 1.
    Eigen::MatrixXd leg(t_degree + 1, nt);
    for (int i = 0; i < nt; ++i) {
        const double s = 2.0 * tg.node(i) / horizon - 1.0;
        leg(0, i) = 1.0;
        if (t_degree >= 1) leg(1, i) = s;
        for (int l = 2; l <= t_degree; ++l)
            leg(l, i) = ((2 * l - 1) * s * leg(l - 1, i) - (l - 1) * leg(l - 2, i)) / l;
    }

    auto mode_amp = [&](int kappa_sq_sum) {
        return 1.0 / (1.0 + std::pow(2.0 * M_PI * std::sqrt(double(kappa_sq_sum)), decay_));
    };

    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(nt, grid_->cols());
    auto add_mode = [&](auto&& spatial) {
        for (int l = 0; l <= t_degree; ++l) {
            const double c = gauss(rng_);
            for (int i = 0; i < nt; ++i) {
                const double tv = c * leg(l, i);
                for (int j = 0; j < grid_->cols(); ++j) v(i, j) += tv * spatial(j);
            }
        }
    };

    if (xg.dim() == 1) {
        const int nx = xg.points_per_dim();
        for (int kappa = 0; kappa <= kmax; ++kappa) {
            const double a = mode_amp(kappa * kappa);
            const double phase = gauss(rng_);
            add_mode([&, kappa, a, phase](int j) {
                const double x = double(j) / nx;
                return a * std::cos(2.0 * M_PI * kappa * x + (kappa == 0 ? 0.0 : phase));
            });
        }
    } else {
        const int nx = xg.points_per_dim();
        for (int k1 = 0; k1 <= kmax; ++k1)
            for (int k2 = -kmax; k2 <= kmax; ++k2) {
                if (k1 == 0 && k2 < 0) continue;
                const double a = mode_amp(k1 * k1 + k2 * k2);
                const double phase = (k1 == 0 && k2 == 0) ? 0.0 : gauss(rng_);
                add_mode([&, k1, k2, a, phase](int j) {
                    const double x1 = double(j / nx) / nx;
                    const double x2 = double(j % nx) / nx;
                    return a * std::cos(2.0 * M_PI * (k1 * x1 + k2 * x2) + phase);
                });
            }
    }
    SpaceTimeField out(grid_, amplitude * v);
    out.ensure_finite("sampler smooth");
    return out;
}

SpaceTimeField FieldSampler::admissible_density(const Eigen::VectorXd& m0, double floor,
                                                std::optional<double> cap) {
    if ((m0.array() <= floor).any())
        throw DomainError("sampler: initial density must exceed the floor");
    SpaceTimeField r = smooth(0.3, 2);
    // Pin the square root at t = 0 so eta(0,.) = m0 exactly.
    Eigen::VectorXd base = (m0.array() - floor).sqrt();
    Eigen::MatrixXd inner_part = r.values();
    inner_part.rowwise() -= inner_part.row(0);
    inner_part.rowwise() += base.transpose();
    SpaceTimeField eta(grid_, inner_part.cwiseAbs2());
    eta.values().array() += floor;
    if (cap) eta.values() = eta.values().cwiseMin(*cap);
    return eta;
}

SpaceTimeField FieldSampler::unit_mass_density(const Eigen::VectorXd& m0, double floor,
                                               std::optional<double> cap) {
    SpaceTimeField eta = admissible_density(m0, floor, cap);
    for (int pass = 0; pass < 3; ++pass) {
        Eigen::VectorXd mass = mass_per_slice(eta);
        for (int i = 0; i < eta.rows(); ++i) eta.values().row(i) /= mass[i];
        eta.values() = eta.values().cwiseMax(floor);
        if (cap) eta.values() = eta.values().cwiseMin(*cap);
    }
    return eta;
}

SpaceTimeField FieldSampler::admissible_value(const Eigen::VectorXd& terminal) {
    SpaceTimeField v = smooth(0.3, 4);
    v.values().rowwise() -= v.values().row(v.rows() - 1);
    v.values().rowwise() += terminal.transpose();
    return v;
}

SpaceTimeField FieldSampler::terminal_zero_test() {
    SpaceTimeField v = smooth(1.0, 3);
    v.values().rowwise() -= v.values().row(v.rows() - 1);
    return v;
}

SpaceTimeField FieldSampler::nonnegative_initial_zero_test() {
    SpaceTimeField s = smooth(1.0, 1);
    const auto& tg = grid_->time;
    Eigen::VectorXd ramp(tg.node_count());
    for (int i = 0; i < tg.node_count(); ++i) ramp[i] = tg.node(i) / tg.horizon();
    SpaceTimeField out(grid_, s.values().cwiseAbs2());
    out.values().array().colwise() *= ramp.array().square();
    return out;
}

}  // namespace mfg
