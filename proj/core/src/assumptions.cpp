#include "mfg/assumptions.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace mfg {

namespace {

double smallest_lower_constant(double lhs, double pg) {
    // Smallest C with lhs >= pg / C - C, i.e. C^2 + lhs C - pg >= 0.
    return 0.5 * (-lhs + std::sqrt(lhs * lhs + 4.0 * std::max(pg, 0.0)));
}

}  // namespace

AssumptionReport probe_assumptions(const MFGProblem& problem, int sample_count,
                                   std::uint64_t seed) {
    AssumptionReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto& ham = problem.hamiltonian;
    const int d = problem.dim();
    const int ns = problem.grid->cols();
    const double gamma = ham.kind == HamiltonianKind::quadratic ? 2.0 : ham.gamma;
    const double floor = problem.effective_floor();

    auto random_p = [&](double scale) {
        Eigen::VectorXd p(d);
        for (int i = 0; i < d; ++i) p[i] = scale * gauss(rng);
        return p;
    };
    auto random_density = [&] {
        return ham.density_dependent() ? floor + 4.0 * unit(rng) : 1.0;
    };

    rep.convexity_gap_min = std::numeric_limits<double>::infinity();
    rep.gradient_monotonicity_min = std::numeric_limits<double>::infinity();
    rep.coercivity_constant = 0.0;
    rep.lower_growth_constant = 0.0;
    rep.gradient_growth_constant = 0.0;
    rep.gradient_fd_error = 0.0;

    for (int s = 0; s < sample_count; ++s) {
        const int site = static_cast<int>(unit(rng) * ns) % ns;
        const double scale = std::pow(10.0, -1.0 + 3.0 * unit(rng));
        const Eigen::VectorXd p = random_p(scale);
        const Eigen::VectorXd q = random_p(scale);
        const double m = random_density();

        // Midpoint convexity in p.
        const double mid = ham.value_at(site, 0.5 * (p + q), m);
        const double avg = 0.5 * (ham.value_at(site, p, m) + ham.value_at(site, q, m));
        const double h_scale = 1.0 + std::abs(mid) + std::abs(avg);
        rep.convexity_gap_min = std::min(rep.convexity_gap_min, (avg - mid) / h_scale);

        // Monotonicity of the p-gradient.
        const Eigen::VectorXd gp = ham.gradient_at(site, p, m);
        const Eigen::VectorXd gq = ham.gradient_at(site, q, m);
        const double pair = (gp - gq).dot(p - q);
        const double g_scale = 1.0 + (gp - gq).norm() * (p - q).norm();
        rep.gradient_monotonicity_min = std::min(rep.gradient_monotonicity_min, pair / g_scale);

        // Sampled structural constants.
        const double pg = std::pow(p.norm(), gamma);
        const double coer = -ham.value_at(site, p, m) + gp.dot(p);
        const double denom = ham.density_dependent() ? std::pow(m, ham.tau) : 1.0;
        rep.coercivity_constant =
            std::max(rep.coercivity_constant, smallest_lower_constant(coer, pg / denom));
        rep.lower_growth_constant = std::max(
            rep.lower_growth_constant, smallest_lower_constant(ham.value_at(site, p, m), pg / denom));
        const double grad_bound = std::pow(p.norm(), gamma - 1.0) / denom + 1.0;
        rep.gradient_growth_constant =
            std::max(rep.gradient_growth_constant, gp.norm() / grad_bound);

        // Central finite differences of H against the analytic gradient.
        const double h = 1e-5 * (1.0 + p.norm());
        double fd_err = 0.0;
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd pp = p, pm = p;
            pp[i] += h;
            pm[i] -= h;
            const double fd = (ham.value_at(site, pp, m) - ham.value_at(site, pm, m)) / (2.0 * h);
            fd_err = std::max(fd_err, std::abs(fd - gp[i]) / (1.0 + std::abs(gp[i])));
        }
        rep.gradient_fd_error = std::max(rep.gradient_fd_error, fd_err);
    }

    rep.convexity_ok = rep.convexity_gap_min >= -1e-10;
    rep.gradient_monotonicity_ok = rep.gradient_monotonicity_min >= -1e-10;
    rep.growth_ok = std::isfinite(rep.coercivity_constant) &&
                    std::isfinite(rep.lower_growth_constant) &&
                    std::isfinite(rep.gradient_growth_constant);
    rep.gradient_fd_ok = rep.gradient_fd_error <= 1e-6;

    // Coupling monotonicity over random nonnegative density pairs.
    const GridPtr& grid = problem.grid;
    rep.coupling_monotonicity_min = std::numeric_limits<double>::infinity();
    const int pair_count = std::max(8, sample_count / 2);
    for (int s = 0; s < pair_count; ++s) {
        auto draw = [&] {
            Eigen::MatrixXd v(grid->rows(), grid->cols());
            for (int i = 0; i < v.rows(); ++i)
                for (int j = 0; j < v.cols(); ++j) v(i, j) = 2.0 * unit(rng);
            return SpaceTimeField(grid, std::move(v));
        };
        SpaceTimeField m1 = draw(), m2 = draw();
        const double pair = inner(problem.coupling.evaluate(m1) - problem.coupling.evaluate(m2),
                                  m1 - m2);
        const double scale = 1.0 + norm_l2(m1 - m2);
        rep.coupling_monotonicity_min = std::min(rep.coupling_monotonicity_min, pair / scale);
    }
    rep.coupling_monotonicity_ok = rep.coupling_monotonicity_min >= -1e-10;
    return rep;
}

}  // namespace mfg
