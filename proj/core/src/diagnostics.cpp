#include "mfg/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "mfg/errors.hpp"
#include "mfg/fixedpoint.hpp"
#include "mfg/system.hpp"

namespace mfg {

SpaceTimeField hj_expression(const MFGProblem& problem, const DiffPlan& plan,
                             const SpaceTimeField& density, const SpaceTimeField& value) {
    std::vector<SpaceTimeField> du = plan.gradient_x(value);
    SpaceTimeField ham = problem.hamiltonian.density_dependent()
                             ? problem.hamiltonian.value(du, &density)
                             : problem.hamiltonian.value(du);
    SpaceTimeField clipped = density;
    clipped.values() = clipped.values().cwiseMax(0.0);
    SpaceTimeField expr = plan.time_derivative(value);
    expr += plan.diffusion_term(value, problem.diffusion);
    expr -= ham;
    expr += problem.coupling.evaluate(clipped);
    if (!problem.potential.empty()) expr += problem.potential;
    return expr;
}

SpaceTimeField transport_expression(const MFGProblem& problem, const DiffPlan& plan,
                                    const SpaceTimeField& density, const SpaceTimeField& value) {
    std::vector<SpaceTimeField> du = plan.gradient_x(value);
    std::vector<SpaceTimeField> dph = problem.hamiltonian.density_dependent()
                                          ? problem.hamiltonian.gradient(du, &density)
                                          : problem.hamiltonian.gradient(du);
    std::vector<SpaceTimeField> flux;
    for (auto& comp : dph) flux.push_back(cwise(density, comp));

    SpaceTimeField expr = plan.time_derivative(density);
    expr -= plan.diffusion_divergence(density, problem.diffusion);
    expr -= plan.divergence_x(flux);
    return expr;
}

double operator_pairing(const MFGProblem& problem, const DiffPlan& plan,
                        const SpaceTimeField& eta, const SpaceTimeField& v,
                        const SpaceTimeField& w1, const SpaceTimeField& w2) {
    return inner(hj_expression(problem, plan, eta, v), w1) +
           inner(transport_expression(problem, plan, eta, v), w2);
}

EnergyReport energy_report(const SpaceTimeField& density, const SpaceTimeField& value,
                           const MFGProblem& problem, const RegularizationConfig& reg,
                           const DiffPlan& plan) {
    EnergyReport rep;
    SpaceTimeField m = density;
    m.values() = m.values().cwiseMax(0.0);

    rep.coupling_integral = inner(m, problem.coupling.evaluate(m));

    std::vector<SpaceTimeField> du = plan.gradient_x(value);
    SpaceTimeField du_norm(value.grid(), du[0].values().cwiseAbs2());
    for (size_t i = 1; i < du.size(); ++i) du_norm.values() += du[i].values().cwiseAbs2();
    du_norm.values() = du_norm.values().cwiseSqrt();

    const double gamma =
        problem.hamiltonian.kind == HamiltonianKind::quadratic ? 2.0 : problem.hamiltonian.gamma;
    SpaceTimeField du_pow(value.grid(), du_norm.values().array().pow(gamma).matrix());

    SpaceTimeField weight = reg.sigma.empty() ? m : m + reg.sigma;
    rep.weighted_gradient_integral = inner(weight, du_pow);
    SpaceTimeField m0f = SpaceTimeField::broadcast_space(problem.grid, problem.initial_density);
    rep.initial_weighted_gradient_integral = inner(m0f, du_pow);

    GramOperator gram(std::make_shared<const DiffPlan>(plan), reg.epsilon);
    rep.eps_energy = reg.epsilon * (gram.sobolev_energy(density) + gram.sobolev_energy(value));

    rep.gradient_l1 = norm_lp(du_norm, 1.0);
    rep.gradient_lgamma = norm_lp(du_norm, gamma);
    rep.rhs_driver = 1.0 + rep.gradient_l1;
    const double lhs = rep.coupling_integral + rep.weighted_gradient_integral +
                       rep.initial_weighted_gradient_integral + rep.eps_energy;
    rep.lhs_over_rhs = lhs / rep.rhs_driver;
    return rep;
}

MonotonicityPair monotone_pairing(const MFGProblem& problem, const DiffPlan& plan, double epsilon,
                                  const SpaceTimeField& eta1, const SpaceTimeField& v1,
                                  const SpaceTimeField& eta2, const SpaceTimeField& v2) {
    MonotonicityPair out;
    SpaceTimeField d_eta = eta1 - eta2;
    SpaceTimeField d_v = v1 - v2;
    out.base = operator_pairing(problem, plan, eta1, v1, d_eta, d_v) -
               operator_pairing(problem, plan, eta2, v2, d_eta, d_v);

    double quad = inner(d_eta, d_eta) + inner(d_v, d_v);
    for (const auto& beta : plan.top_order_indices()) {
        SpaceTimeField de = plan.partial(d_eta, beta);
        SpaceTimeField dv = plan.partial(d_v, beta);
        quad += inner(de, de) + inner(dv, dv);
    }
    out.regularized = out.base + epsilon * quad;
    out.quadratic_gap = epsilon * quad;
    return out;
}

MonotonicityProbe monotonicity_probe(const MFGProblem& problem, const DiffPlan& plan,
                                     double epsilon, int sample_count, std::uint64_t seed) {
    FieldSampler sampler(problem.grid, plan, seed);
    MonotonicityProbe probe;
    probe.base_min = std::numeric_limits<double>::infinity();
    probe.regularized_min = std::numeric_limits<double>::infinity();
    probe.gap_min = std::numeric_limits<double>::infinity();

    for (int s = 0; s < sample_count; ++s) {
        SpaceTimeField eta1 = sampler.admissible_density(problem.initial_density,
                                                         problem.test_density_floor(),
                                                         problem.density_cap);
        SpaceTimeField eta2 = sampler.admissible_density(problem.initial_density,
                                                         problem.test_density_floor(),
                                                         problem.density_cap);
        SpaceTimeField v1 = sampler.admissible_value(problem.terminal_cost);
        SpaceTimeField v2 = sampler.admissible_value(problem.terminal_cost);
        MonotonicityPair pair = monotone_pairing(problem, plan, epsilon, eta1, v1, eta2, v2);
        const double scale = 1.0 + pairing_scale(problem, plan, eta1, v1, eta2, v2);
        probe.base_min = std::min(probe.base_min, pair.base / scale);
        probe.regularized_min = std::min(probe.regularized_min, pair.regularized / scale);
        probe.gap_min = std::min(probe.gap_min, pair.quadratic_gap);
        probe.samples = s + 1;
    }
    probe.base_ok = probe.base_min >= -1e-8;
    probe.regularized_ok = probe.gap_min >= 0.0;
    return probe;
}

double pairing_scale(const MFGProblem& problem, const DiffPlan& plan, const SpaceTimeField& eta1,
                     const SpaceTimeField& v1, const SpaceTimeField& eta2,
                     const SpaceTimeField& v2) {
    SpaceTimeField d_eta = eta1 - eta2;
    SpaceTimeField d_v = v1 - v2;
    SpaceTimeField abs1(d_eta.grid(), hj_expression(problem, plan, eta1, v1).values().cwiseAbs());
    SpaceTimeField abs2(d_eta.grid(), hj_expression(problem, plan, eta2, v2).values().cwiseAbs());
    SpaceTimeField abs3(d_eta.grid(),
                        transport_expression(problem, plan, eta1, v1).values().cwiseAbs());
    SpaceTimeField abs4(d_eta.grid(),
                        transport_expression(problem, plan, eta2, v2).values().cwiseAbs());
    SpaceTimeField ae(d_eta.grid(), d_eta.values().cwiseAbs());
    SpaceTimeField av(d_v.grid(), d_v.values().cwiseAbs());
    return inner(abs1 + abs2, ae) + inner(abs3 + abs4, av);
}

MintyReport minty_residual(const SpaceTimeField& density, const SpaceTimeField& value_tilde,
                           const MFGProblem& problem, const DiffPlan& plan, int sample_count,
                           std::uint64_t seed) {
    FieldSampler sampler(problem.grid, plan, seed);
    MintyReport rep;
    rep.minimum = std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_count; ++s) {
        SpaceTimeField eta = sampler.unit_mass_density(problem.initial_density,
                                                       problem.test_density_floor(),
                                                       problem.density_cap);
        SpaceTimeField v = sampler.admissible_value(problem.terminal_cost);
        SpaceTimeField w1 = eta - density;
        SpaceTimeField w2 = v - value_tilde;
        const double pairing = operator_pairing(problem, plan, eta, v, w1, w2);
        const double scale =
            1.0 + inner(SpaceTimeField(w1.grid(),
                                       hj_expression(problem, plan, eta, v).values().cwiseAbs()),
                        SpaceTimeField(w1.grid(), w1.values().cwiseAbs())) +
            inner(SpaceTimeField(w2.grid(),
                                 transport_expression(problem, plan, eta, v).values().cwiseAbs()),
                  SpaceTimeField(w2.grid(), w2.values().cwiseAbs()));
        const double value = pairing / scale;
        if (value < rep.minimum) {
            rep.minimum = value;
            rep.argmin_sample = s;
        }
        rep.samples = s + 1;
    }
    return rep;
}

double weak_transport_residual(const SpaceTimeField& density,
                               const std::vector<SpaceTimeField>& current,
                               const MFGProblem& problem, const DiffPlan& plan, int sample_count,
                               std::uint64_t seed) {
    FieldSampler sampler(problem.grid, plan, seed);
    const GridPtr& grid = problem.grid;
    const double wx = grid->torus.site_weight();

    double worst = 0.0;
    for (int s = 0; s < sample_count; ++s) {
        SpaceTimeField v = sampler.terminal_zero_test();
        // -int v(0,.) m0 - int [ (v_t - a : D^2 v) m + J . Dv ]
        double acc = 0.0;
        for (int j = 0; j < grid->cols(); ++j)
            acc -= v(0, j) * problem.initial_density[j] * wx;
        SpaceTimeField vt = plan.time_derivative(v);
        SpaceTimeField adv = plan.diffusion_term(v, problem.diffusion);
        acc -= inner(vt - adv, density);
        std::vector<SpaceTimeField> dv = plan.gradient_x(v);
        for (size_t i = 0; i < dv.size(); ++i) acc -= inner(current[i], dv[i]);
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

HJSubsolutionReport hj_subsolution_check(const SpaceTimeField& density,
                                         const SpaceTimeField& value, const MFGProblem& problem,
                                         const DiffPlan& plan, int sample_count,
                                         std::uint64_t seed, bool allow_power) {
    const auto& ham = problem.hamiltonian;
    const bool quadratic = ham.kind == HamiltonianKind::quadratic;
    const bool power_ok = allow_power && ham.kind == HamiltonianKind::power;
    if (!quadratic && !power_ok)
        throw DomainError("hj_subsolution_check: requires the quadratic Hamiltonian");
    if (problem.coupling.local_exponent > 1.0 + 1e-12)
        throw DomainError("hj_subsolution_check: requires local exponent r <= 1");
    if (problem.coupling.nonlocal == NonlocalKind::power_inside)
        throw DomainError("hj_subsolution_check: nonlocal power variant out of scope");

    FieldSampler sampler(problem.grid, plan, seed);
    const GridPtr& grid = problem.grid;
    const double wx = grid->torus.site_weight();
    const int nt = grid->rows();

    HJSubsolutionReport rep;
    rep.max_value = -std::numeric_limits<double>::infinity();

    SpaceTimeField m = density;
    m.values() = m.values().cwiseMax(0.0);
    SpaceTimeField coupling = problem.coupling.evaluate(m);
    std::vector<SpaceTimeField> du = plan.gradient_x(value);
    SpaceTimeField ham_field = ham.value(du);

    for (int s = 0; s < sample_count; ++s) {
        SpaceTimeField phi = sampler.nonnegative_initial_zero_test();
        double acc = 0.0;
        for (int j = 0; j < grid->cols(); ++j)
            acc -= problem.terminal_cost[j] * phi(nt - 1, j) * wx;
        acc += inner(value, plan.time_derivative(phi));
        // sum_ij u_{x_i} (a_ij phi)_{x_j} via products, exact by parts
        for (size_t i = 0; i < du.size(); ++i) {
            for (size_t j = 0; j < du.size(); ++j) {
                const Eigen::VectorXd& aij =
                    problem.dim() == 1 ? problem.diffusion[0]
                                       : problem.diffusion[i == j ? (i == 0 ? 0 : 2) : 1];
                SpaceTimeField aphi(phi.grid(),
                                    (phi.values().array().rowwise() * aij.transpose().array())
                                        .matrix());
                MultiIndex b{0, 0, 0};
                b[1 + static_cast<int>(j)] = 1;
                acc += inner(du[i], plan.partial(aphi, b));
            }
        }
        acc += inner(ham_field - coupling, phi);
        if (!problem.potential.empty()) acc -= inner(problem.potential, phi);

        double scale = 1.0 + std::abs(inner(ham_field, phi)) + std::abs(inner(coupling, phi)) +
                       norm_l2(value) * norm_l2(phi);
        rep.max_value = std::max(rep.max_value, acc / scale);
        rep.samples = s + 1;
    }
    return rep;
}

PDEResiduals pde_residuals(const SpaceTimeField& density, const SpaceTimeField& value,
                           const MFGProblem& problem, const RegularizationConfig& reg,
                           const DiffPlan& plan, double epsilon_override) {
    const double eps = epsilon_override >= 0.0 ? epsilon_override : reg.epsilon;
    PDEResiduals out;

    SpaceTimeField m_sigma = reg.sigma.empty() ? density : density + reg.sigma;
    SpaceTimeField hj = hj_expression(problem, plan, density, value);
    if (eps != 0.0) {
        SpaceTimeField off = plan.data_offset(m_sigma);
        off *= eps;
        hj += off;
    }

    std::vector<SpaceTimeField> du = plan.gradient_x(value);
    std::vector<SpaceTimeField> dph = problem.hamiltonian.density_dependent()
                                          ? problem.hamiltonian.gradient(du, &density)
                                          : problem.hamiltonian.gradient(du);
    std::vector<SpaceTimeField> flux;
    for (auto& comp : dph) flux.push_back(cwise(m_sigma, comp));
    SpaceTimeField fp = plan.time_derivative(density);
    fp -= plan.diffusion_divergence(m_sigma, problem.diffusion);
    fp -= plan.divergence_x(flux);
    if (eps != 0.0) {
        SpaceTimeField u_xi = reg.xi.empty() ? value : value + reg.xi;
        SpaceTimeField off = plan.data_offset(u_xi);
        off *= eps;
        fp += off;
    }

    // Pointwise optimality holds only where the density is positive.
    const double threshold = 1e-8;
    double l2 = 0.0, linf = 0.0;
    int active = 0;
    const Eigen::VectorXd& wt = density.time().quad_weights();
    const double wx = density.torus().site_weight();
    for (int i = 0; i < density.rows(); ++i)
        for (int j = 0; j < density.cols(); ++j)
            if (density(i, j) > threshold) {
                ++active;
                l2 += wt[i] * wx * hj(i, j) * hj(i, j);
                linf = std::max(linf, std::abs(hj(i, j)));
            }
    out.hj_l2 = std::sqrt(l2);
    out.hj_linf = linf;
    out.active_fraction = static_cast<double>(active) / (density.rows() * density.cols());
    out.transport_l2 = norm_l2(fp);
    out.transport_linf = norm_inf(fp);
    return out;
}

DiagnosticsReport run_diagnostics(const SpaceTimeField& density, const SpaceTimeField& value,
                                  const SpaceTimeField& value_tilde, const MFGProblem& problem,
                                  const RegularizationConfig& reg, const DiffPlan& plan,
                                  const DiagnosticsOptions& opts) {
    DiagnosticsReport rep;
    rep.energy = energy_report(density, value, problem, reg, plan);
    rep.mass_deviation = (mass_per_slice(density).array() - 1.0).abs().maxCoeff();
    rep.monotonicity =
        monotonicity_probe(problem, plan, reg.epsilon, opts.monotonicity_samples, opts.seed);
    rep.minty = minty_residual(density, value_tilde, problem, plan, opts.minty_samples,
                               opts.seed + 1);

    std::vector<SpaceTimeField> du = plan.gradient_x(value);
    std::vector<SpaceTimeField> current;
    for (auto& g : du) current.push_back(cwise(density, g));
    rep.weak_transport_residual = weak_transport_residual(density, current, problem, plan,
                                                          opts.weak_fp_samples, opts.seed + 2);

    rep.hj_subsolution_in_scope =
        (problem.hamiltonian.kind == HamiltonianKind::quadratic ||
         (opts.hj_allow_power && problem.hamiltonian.kind == HamiltonianKind::power)) &&
        problem.coupling.local_exponent <= 1.0 + 1e-12 &&
        problem.coupling.nonlocal != NonlocalKind::power_inside;
    if (rep.hj_subsolution_in_scope)
        rep.hj_subsolution = hj_subsolution_check(density, value, problem, plan,
                                                  opts.hj_samples, opts.seed + 3,
                                                  opts.hj_allow_power);

    rep.pde = pde_residuals(density, value, problem, reg, plan);

    MultiplierSeries mult = recover_multiplier(density, value_tilde, problem, plan);
    rep.mu = mult.mu;
    rep.mu_max_deviation = mult.deviation.size() ? mult.deviation.maxCoeff() : 0.0;
    return rep;
}

}  // namespace mfg
