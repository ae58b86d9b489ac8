#include "mfg/fixedpoint.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <tuple>

#include "mfg/errors.hpp"
#include "mfg/system.hpp"

namespace mfg {

namespace {

double pair_norm(const SpaceTimeField& a, const SpaceTimeField& b) {
    return std::sqrt(inner(a, a) + inner(b, b));
}

// Flattened copy (density block then value block) for the mixing window.
Eigen::VectorXd flatten(const SpaceTimeField& a, const SpaceTimeField& b) {
    Eigen::VectorXd v(a.values().size() + b.values().size());
    v.head(a.values().size()) = Eigen::Map<const Eigen::VectorXd>(a.values().data(), a.values().size());
    v.tail(b.values().size()) = Eigen::Map<const Eigen::VectorXd>(b.values().data(), b.values().size());
    return v;
}

void unflatten(const Eigen::VectorXd& v, SpaceTimeField& a, SpaceTimeField& b) {
    Eigen::Map<Eigen::VectorXd>(a.values().data(), a.values().size()) = v.head(a.values().size());
    Eigen::Map<Eigen::VectorXd>(b.values().data(), b.values().size()) = v.tail(b.values().size());
}

struct AndersonWindow {
    int depth;
    std::deque<Eigen::VectorXd> dz;
    std::deque<Eigen::VectorXd> dr;
    Eigen::VectorXd z_prev, r_prev;
    bool primed = false;

    explicit AndersonWindow(int d) : depth(d) {}

    void reset() {
        dz.clear();
        dr.clear();
        primed = false;
    }

    // Type-II mixing: z+ = z + beta r - (DZ + beta DR) gamma with
    // gamma = argmin || r - DR gamma ||.
    Eigen::VectorXd step(const Eigen::VectorXd& z, const Eigen::VectorXd& r, double beta) {
        if (primed) {
            dz.push_back(z - z_prev);
            dr.push_back(r - r_prev);
            while (static_cast<int>(dz.size()) > depth) {
                dz.pop_front();
                dr.pop_front();
            }
        }
        z_prev = z;
        r_prev = r;
        primed = true;
        if (dz.empty()) return z + beta * r;

        const int m = static_cast<int>(dz.size());
        Eigen::MatrixXd R(r.size(), m), Z(r.size(), m);
        for (int j = 0; j < m; ++j) {
            R.col(j) = dr[j];
            Z.col(j) = dz[j];
        }
        Eigen::VectorXd gamma = R.colPivHouseholderQr().solve(r);
        return z + beta * r - (Z + beta * R) * gamma;
    }
};

}  // namespace

std::pair<IterState, std::pair<SolveCertificate, SolveCertificate>> apply_fixed_point_map(
    const IterState& state, const ShiftedProblem& shifted,
    const std::shared_ptr<const GramOperator>& gram, const SubsolverOptions& opts) {
    QuadraticVI vi = assemble_variational(shifted, gram, state.density_shift, state.value_shift);
    auto [m_star, vi_cert] = solve_variational(vi, opts, &state.density_shift);

    LinearSystem sys = assemble_transport(shifted, gram, state.density_shift, state.value_shift);
    auto [u_star, cg_cert] = solve_bilinear(sys, opts, &state.value_shift);

    IterState next;
    next.density_shift = std::move(m_star);
    next.value_shift = std::move(u_star);
    next.iteration = state.iteration + 1;
    return {std::move(next), {vi_cert, cg_cert}};
}

FixedPointResult fixed_point_solve(const MFGProblem& problem, const RegularizationConfig& reg,
                                   const FixedPointOpts& opts, const IterState* start,
                                   std::shared_ptr<const DiffPlan> plan) {
    if (!plan) plan = std::make_shared<const DiffPlan>(problem.grid, reg.k);
    ShiftedProblem shifted = terminal_shift(problem, reg, plan);
    auto gram = std::make_shared<const GramOperator>(plan, reg.epsilon);

    const GridPtr& grid = problem.grid;
    SpaceTimeField lb = shifted.lower_bound();
    std::optional<SpaceTimeField> ub = shifted.upper_bound();
    auto project = [&](SpaceTimeField& w) {
        w.values() = w.values().cwiseMax(lb.values());
        if (ub) w.values() = w.values().cwiseMin(ub->values());
        w.values().row(0).setZero();
    };

    IterState z;
    if (start) {
        z = *start;
        project(z.density_shift);
        z.value_shift.values().row(grid->rows() - 1).setZero();
    } else {
        z.density_shift = SpaceTimeField::zeros(grid);
        z.value_shift = SpaceTimeField::zeros(grid);
    }

    FixedPointResult out;
    AndersonWindow window(std::max(0, opts.anderson_depth));
    double omega = opts.damping;

    IterState az;
    double residual = 0.0;
    auto evaluate = [&](const IterState& state) {
        auto [mapped, certs] = apply_fixed_point_map(state, shifted, gram, opts.subsolver);
        out.vi_certificate = certs.first;
        out.cg_certificate = certs.second;
        const double r = pair_norm(mapped.density_shift - state.density_shift,
                                   mapped.value_shift - state.value_shift);
        return std::make_pair(std::move(mapped), r);
    };

    std::tie(az, residual) = evaluate(z);
    out.residual_history.push_back(residual);

    IterState best = z;
    double best_residual = residual;

    auto damped_from = [&](const IterState& base, const IterState& image, double w) {
        IterState next = base;
        next.density_shift += w * (image.density_shift - base.density_shift);
        next.value_shift += w * (image.value_shift - base.value_shift);
        project(next.density_shift);
        next.value_shift.values().row(grid->rows() - 1).setZero();
        return next;
    };

    for (int it = 0; it < opts.max_outer; ++it) {
        out.iterations = it + 1;
        out.residual = residual;
        const double znorm = pair_norm(z.density_shift, z.value_shift);
        if (residual <= opts.tolerance * (1.0 + znorm)) {
            out.converged = true;
            z = az;  // one extra half-step sharpens the certificates
            project(z.density_shift);
            break;
        }

        IterState z_trial;
        IterState az_trial;
        double res_trial = 0.0;
        if (opts.anderson_depth > 0) {
            Eigen::VectorXd zf = flatten(z.density_shift, z.value_shift);
            Eigen::VectorXd rf = flatten(az.density_shift - z.density_shift,
                                         az.value_shift - z.value_shift);
            Eigen::VectorXd znext = window.step(zf, rf, omega);
            z_trial = z;
            if (znext.allFinite())
                unflatten(znext, z_trial.density_shift, z_trial.value_shift);
            else
                z_trial = damped_from(z, az, omega);
            project(z_trial.density_shift);
            z_trial.value_shift.values().row(grid->rows() - 1).setZero();
            std::tie(az_trial, res_trial) = evaluate(z_trial);
            if (!std::isfinite(res_trial) || res_trial > 100.0 * std::max(residual, 1.0)) {
                window.reset();
                z_trial = damped_from(z, az, omega);
                std::tie(az_trial, res_trial) = evaluate(z_trial);
            }
        } else {
            // Plain damped iteration with the residual kept non-increasing:
            // a growing trial is rolled back and retried with half the step,
            // five times at most, after which the step is taken and flagged.
            double w = omega;
            int shrink = 0;
            while (true) {
                z_trial = damped_from(z, az, w);
                std::tie(az_trial, res_trial) = evaluate(z_trial);
                if (res_trial <= residual * (1.0 + 1e-12) || shrink >= 5) break;
                w *= 0.5;
                ++shrink;
            }
            if (res_trial > residual * (1.0 + 1e-12)) out.monotone_flagged = true;
            omega = w;
        }

        z = std::move(z_trial);
        az = std::move(az_trial);
        residual = res_trial;
        z.iteration = it + 1;
        out.residual_history.push_back(residual);
        if (residual < best_residual) {
            best_residual = residual;
            best = z;
        }
    }

    if (!out.converged) {
        z = best;  // non-converged: hand back the best iterate, flagged
        out.residual = best_residual;
    }

    out.density = shifted.unshift_density(z.density_shift);
    out.value = shifted.unshift_value(z.value_shift);
    out.density.ensure_finite("fixed_point_solve density");
    out.value.ensure_finite("fixed_point_solve value");
    return out;
}

WeakSolution epsilon_continuation(const MFGProblem& problem, const RegularizationConfig& reg,
                                  const std::vector<double>& schedule,
                                  const FixedPointOpts& opts) {
    if (schedule.empty()) throw DomainError("epsilon_continuation: empty schedule");
    for (size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] < schedule[i - 1]))
            throw DomainError("epsilon_continuation: schedule must decrease strictly");
    for (double e : schedule)
        if (!(e > 0.0 && e < 1.0))
            throw DomainError("epsilon_continuation: schedule entries must lie in (0,1)");

    auto plan = std::make_shared<const DiffPlan>(problem.grid, reg.k);
    WeakSolution sol;
    IterState warm;
    bool have_warm = false;

    const Eigen::VectorXd m0 = problem.initial_density;
    for (double eps : schedule) {
        RegularizationConfig reg_eps = reg;
        reg_eps.epsilon = eps;
        FixedPointResult res =
            fixed_point_solve(problem, reg_eps, opts, have_warm ? &warm : nullptr, plan);

        EpsilonRecord rec;
        rec.epsilon = eps;
        rec.iterations = res.iterations;
        rec.residual = res.residual;
        rec.converged = res.converged;

        std::vector<SpaceTimeField> du = plan->gradient_x(res.value);
        SpaceTimeField du_norm(problem.grid, du[0].values().cwiseAbs2());
        if (du.size() > 1) du_norm.values() += du[1].values().cwiseAbs2();
        du_norm.values() = du_norm.values().cwiseSqrt();
        const double gamma = problem.hamiltonian.kind == HamiltonianKind::quadratic
                                 ? 2.0
                                 : problem.hamiltonian.gamma;
        rec.gradient_lgamma = norm_lp(du_norm, gamma);

        GramOperator gram(plan, eps);
        rec.sqrt_eps_energy_m = std::sqrt(eps * gram.sobolev_energy(res.density));
        rec.sqrt_eps_energy_u = std::sqrt(eps * gram.sobolev_energy(res.value));
        rec.mass_deviation = (mass_per_slice(res.density).array() - 1.0).abs().maxCoeff();

        sol.history.push_back(rec);
        sol.fields.emplace_back(res.density, res.value);

        warm.density_shift = res.density - SpaceTimeField::broadcast_space(problem.grid, m0);
        warm.value_shift =
            res.value - SpaceTimeField::broadcast_space(problem.grid, problem.terminal_cost);
        have_warm = true;

        if (!res.converged) break;  // truncated continuation, history kept
    }

    const auto& last = sol.fields.back();
    sol.density = last.first;
    sol.value_tilde = remove_spatial_mean(last.second);
    MultiplierSeries mult = recover_multiplier(sol.density, sol.value_tilde, problem, *plan);
    sol.mu = mult.mu;
    sol.mu_deviation = mult.deviation;
    sol.value = reconstruct_value(sol.value_tilde, sol.mu);
    sol.converged = sol.history.back().converged && sol.history.size() == schedule.size();
    return sol;
}

MultiplierSeries recover_multiplier(const SpaceTimeField& density,
                                    const SpaceTimeField& value_tilde, const MFGProblem& problem,
                                    const DiffPlan& plan) {
    SpaceTimeField expr = hj_expression(problem, plan, density, value_tilde);
    MultiplierSeries out;
    out.mu = spatial_mean(expr);
    const int nt = expr.rows();
    out.deviation.resize(nt);
    for (int i = 0; i < nt; ++i) {
        const double mean = out.mu[i];
        out.deviation[i] =
            std::sqrt((expr.values().row(i).array() - mean).square().mean());
    }
    out.min_density = density.values().rowwise().minCoeff();
    return out;
}

SpaceTimeField reconstruct_value(const SpaceTimeField& value_tilde, const Eigen::VectorXd& mu) {
    const TimeGrid& tg = value_tilde.time();
    const int nt = tg.node_count();
    if (mu.size() != nt) throw ShapeError("reconstruct_value: mu length mismatch");
    Eigen::VectorXd tail(nt);  // trapezoid integral of mu over [t_i, T]
    tail[nt - 1] = 0.0;
    for (int i = nt - 2; i >= 0; --i) {
        const double dt = tg.node(i + 1) - tg.node(i);
        tail[i] = tail[i + 1] + 0.5 * dt * (mu[i] + mu[i + 1]);
    }
    SpaceTimeField out = value_tilde;
    out.values().colwise() += tail;
    return out;
}

std::vector<double> default_epsilon_schedule() {
    std::vector<double> s;
    const double ratio = std::pow(10.0, -0.5);
    double e = 1e-1;
    for (int i = 0; i < 7; ++i) {
        s.push_back(e);
        e *= ratio;
    }
    return s;
}

}  // namespace mfg
