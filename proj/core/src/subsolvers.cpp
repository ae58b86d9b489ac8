#include "mfg/subsolvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void pin_slice(SpaceTimeField& f, int slice) { f.values().row(slice).setZero(); }

SpaceTimeField clamp_box(const SpaceTimeField& w, const SpaceTimeField& lb,
                         const SpaceTimeField& ub, int pinned) {
    SpaceTimeField out(w.grid(), w.values().cwiseMax(lb.values()).cwiseMin(ub.values()));
    pin_slice(out, pinned);
    return out;
}

// Largest eigenvalue of the metric Gram operator on the masked subspace,
// for the fixed-step fallback.
double power_iteration_bound(const GramOperator& gram, int pinned) {
    SpaceTimeField v = SpaceTimeField::constant(gram.grid(), 1.0);
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < v.cols(); ++j) v(i, j) = std::sin(1.0 + 0.7 * i + 1.3 * j);
    pin_slice(v, pinned);
    double lambda = gram.epsilon();
    for (int it = 0; it < 25; ++it) {
        const double n = norm_l2(v);
        if (n == 0.0) break;
        v *= 1.0 / n;
        SpaceTimeField av = gram.apply_metric(v);
        pin_slice(av, pinned);
        lambda = inner(av, v);
        v = av;
    }
    return std::max(lambda, gram.epsilon());
}

}  // namespace

SpaceTimeField slice_mask(const GridPtr& grid, int pinned_slice) {
    SpaceTimeField f = SpaceTimeField::constant(grid, 1.0);
    f.values().row(pinned_slice).setZero();
    return f;
}

double QuadraticVI::objective(const SpaceTimeField& w) const {
    const double eps = gram->epsilon();
    SpaceTimeField shifted = w + affine_offset;
    double quad = inner(shifted, shifted);
    quad += gram->sobolev_energy(w) - inner(w, w);  // keeps only the derivative part
    return 0.5 * eps * quad + inner(linear_term, w);
}

SpaceTimeField QuadraticVI::gradient(const SpaceTimeField& w) const {
    SpaceTimeField g = gram->apply_metric(w);
    g += linear_term;
    SpaceTimeField scaled = affine_offset;
    scaled *= gram->epsilon();
    g += scaled;
    return g;
}

void QuadraticVI::validate() const {
    if ((lower.values().array() > 0.0).any() || (upper.values().array() < 0.0).any())
        throw DomainError("QuadraticVI: zero must be feasible (lower <= 0 <= upper)");
}

QuadraticVI assemble_variational(const ShiftedProblem& shifted,
                                 std::shared_ptr<const GramOperator> gram,
                                 const SpaceTimeField& m1, const SpaceTimeField& u1) {
    const DiffPlan& plan = shifted.plan();
    const MFGProblem& prob = shifted.base();

    SpaceTimeField lb = shifted.lower_bound();
    if ((m1.values().array() < lb.values().array() - 1e-9).any())
        throw DomainError("assemble_variational: frozen density infeasible");

    std::vector<SpaceTimeField> du1 = plan.gradient_x(u1);
    SpaceTimeField ham;
    if (prob.hamiltonian.density_dependent()) {
        SpaceTimeField density = shifted.unshift_density(m1);
        const double floor = prob.effective_floor();
        density.values() = density.values().cwiseMax(floor);
        ham = shifted.hamiltonian_value(du1, &density);
    } else {
        ham = shifted.hamiltonian_value(du1);
    }

    SpaceTimeField b1 = plan.time_derivative(u1);
    b1 += plan.diffusion_term(u1, prob.diffusion);
    b1 -= ham;
    b1 += shifted.coupling_value(m1);
    b1 += shifted.shifted_potential();
    b1.ensure_finite("assemble_variational");

    SpaceTimeField ub = shifted.upper_bound()
                            ? *shifted.upper_bound()
                            : SpaceTimeField::constant(m1.grid(), kInf);

    QuadraticVI vi{std::move(gram), shifted.sigma_offset(), std::move(b1), std::move(lb),
                   std::move(ub), 0};
    vi.validate();
    return vi;
}

LinearSystem assemble_transport(const ShiftedProblem& shifted,
                                std::shared_ptr<const GramOperator> gram,
                                const SpaceTimeField& m1, const SpaceTimeField& u1) {
    const DiffPlan& plan = shifted.plan();
    const MFGProblem& prob = shifted.base();

    SpaceTimeField flux_density = m1 + shifted.sigma_hat();
    std::vector<SpaceTimeField> du1 = plan.gradient_x(u1);
    std::vector<SpaceTimeField> dph;
    if (prob.hamiltonian.density_dependent()) {
        SpaceTimeField density = shifted.unshift_density(m1);
        density.values() = density.values().cwiseMax(prob.effective_floor());
        dph = shifted.hamiltonian_gradient(du1, &density);
    } else {
        dph = shifted.hamiltonian_gradient(du1);
    }
    // Divergence assembled on the product: exact integration by parts on the
    // torus, never differentiates D_p H.
    std::vector<SpaceTimeField> flux;
    for (auto& comp : dph) flux.push_back(cwise(flux_density, comp));

    SpaceTimeField rhs = plan.divergence_x(flux);
    rhs -= plan.time_derivative(m1);
    rhs += plan.diffusion_divergence(flux_density, prob.diffusion);
    SpaceTimeField xi_term = shifted.xi_offset();
    xi_term *= shifted.epsilon();
    rhs -= xi_term;
    rhs.ensure_finite("assemble_transport");

    const int terminal = m1.grid()->rows() - 1;
    return LinearSystem{std::move(gram), std::move(rhs), terminal};
}

std::pair<SpaceTimeField, SolveCertificate> pcg_masked(const GramOperator& gram,
                                                       const SpaceTimeField& rhs,
                                                       const SpaceTimeField& flags,
                                                       double tol_rel, int max_iter,
                                                       const SpaceTimeField* x0) {
    auto apply = [&](const SpaceTimeField& v) {
        SpaceTimeField out = gram.apply_metric(cwise(flags, v));
        return cwise(flags, out);
    };
    auto prec = [&](const SpaceTimeField& v) {
        SpaceTimeField out = gram.precondition(cwise(flags, v));
        return cwise(flags, out);
    };

    SpaceTimeField b = cwise(flags, rhs);
    const double bnorm = norm_l2(b);
    SolveCertificate cert;
    SpaceTimeField x = x0 ? cwise(flags, *x0) : SpaceTimeField::zeros(rhs.grid());
    if (bnorm == 0.0) {
        cert.converged = true;
        return {SpaceTimeField::zeros(rhs.grid()), cert};
    }

    SpaceTimeField r = b - apply(x);
    SpaceTimeField z = prec(r);
    SpaceTimeField p = z;
    double rz = inner(r, z);
    for (int it = 0; it < max_iter; ++it) {
        SpaceTimeField q = apply(p);
        const double pq = inner(p, q);
        if (!(pq > 0.0)) throw BreakdownError("pcg: operator lost positive definiteness");
        const double alpha = rz / pq;
        x += alpha * p;
        r -= alpha * q;
        cert.iterations = it + 1;
        cert.cg_rel_residual = norm_l2(r) / bnorm;
        if (cert.cg_rel_residual <= tol_rel) {
            cert.converged = true;
            cert.residual = cert.cg_rel_residual;
            return {x, cert};
        }
        z = prec(r);
        const double rz_new = inner(r, z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    cert.converged = false;
    cert.residual = cert.cg_rel_residual;
    return {x, cert};
}

std::pair<SpaceTimeField, SolveCertificate> solve_bilinear(const LinearSystem& sys,
                                                           const SubsolverOptions& opts,
                                                           const SpaceTimeField* warm_start) {
    SpaceTimeField flags = slice_mask(sys.rhs.grid(), sys.pinned_slice);
    auto [u, cert] = pcg_masked(*sys.gram, sys.rhs, flags, opts.cg_tol, opts.cg_max_iter,
                                warm_start);
    if (!cert.converged)
        throw IterationLimitError("solve_bilinear: CG iteration limit", std::move(u), cert);
    return {std::move(u), cert};
}

std::pair<SpaceTimeField, SolveCertificate> solve_variational(const QuadraticVI& vi,
                                                              const SubsolverOptions& opts,
                                                              const SpaceTimeField* warm_start) {
    const GridPtr& grid = vi.linear_term.grid();
    const int pinned = vi.pinned_slice;
    SpaceTimeField flags = slice_mask(grid, pinned);

    const double tol_abs = opts.vi_tol * (1.0 + norm_inf(vi.linear_term));
    SpaceTimeField w = warm_start ? clamp_box(*warm_start, vi.lower, vi.upper, pinned)
                                  : SpaceTimeField::zeros(grid);
    SpaceTimeField g = vi.gradient(w);

    auto natural_residual = [&](const SpaceTimeField& point, const SpaceTimeField& grad) {
        SpaceTimeField step = point - grad;
        return point - clamp_box(step, vi.lower, vi.upper, pinned);
    };

    auto active_flags = [&](const SpaceTimeField& point, const SpaceTimeField& grad) {
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> act(point.rows(), point.cols());
        for (int i = 0; i < point.rows(); ++i)
            for (int j = 0; j < point.cols(); ++j)
                act(i, j) = (i == pinned) ||
                            (point(i, j) <= vi.lower(i, j) && grad(i, j) > 0.0) ||
                            (point(i, j) >= vi.upper(i, j) && grad(i, j) < 0.0);
        return act;
    };

    double lipschitz = 0.0;  // computed on first need
    std::deque<double> recent;
    recent.push_back(vi.objective(w));

    SolveCertificate cert;
    SpaceTimeField s_prev, y_prev;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> last_active;
    int same_active = 0;
    int total_iters = 0;

    for (int outer = 0; outer < opts.vi_max_iter; ++outer) {
        SpaceTimeField rnat = natural_residual(w, g);
        cert.residual = norm_inf(rnat);
        cert.pg_norm = norm_l2(rnat);
        cert.iterations = total_iters;
        if (cert.residual <= tol_abs) {
            cert.converged = true;
            break;
        }

        // Projected gradient step with a BB1 length, nonmonotone safeguard.
        double alpha;
        if (!s_prev.empty()) {
            const double ss = inner(s_prev, s_prev);
            const double sy = inner(s_prev, y_prev);
            alpha = sy > 1e-300 ? ss / sy : 0.0;
        } else {
            alpha = 0.0;
        }
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            if (lipschitz == 0.0) lipschitz = power_iteration_bound(*vi.gram, pinned);
            alpha = 1.0 / lipschitz;
        }

        const double j_ref = *std::max_element(recent.begin(), recent.end());
        SpaceTimeField w_new, g_new;
        bool accepted = false;
        for (int back = 0; back < 40; ++back) {
            w_new = clamp_box(w - alpha * g, vi.lower, vi.upper, pinned);
            const double decrease = inner(g, w - w_new);
            const double j_new = vi.objective(w_new);
            if (j_new <= j_ref - 1e-4 * decrease + 1e-300) {
                recent.push_back(j_new);
                if (recent.size() > 10) recent.pop_front();
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {  // gradient is numerically stationary on the feasible set
            cert.converged = cert.residual <= 10.0 * tol_abs;
            break;
        }
        g_new = vi.gradient(w_new);
        s_prev = w_new - w;
        y_prev = g_new - g;
        w = std::move(w_new);
        g = std::move(g_new);
        ++total_iters;

        // Subspace acceleration once the active set settles.
        auto act = active_flags(w, g);
        if (last_active.size() != 0 && (act.array() == last_active.array()).all())
            ++same_active;
        else
            same_active = 0;
        last_active = act;

        if (same_active >= 2 || total_iters % 10 == 0) {
            SpaceTimeField free_flags = flags;
            for (int i = 0; i < w.rows(); ++i)
                for (int j = 0; j < w.cols(); ++j)
                    if (act(i, j)) free_flags(i, j) = 0.0;

            SpaceTimeField neg_g(grid, (-g.values()).eval());
            const double forcing = std::min(0.25, std::sqrt(cert.residual / (1.0 + tol_abs)));
            auto [d, c2] =
                pcg_masked(*vi.gram, neg_g, free_flags, std::max(forcing, opts.cg_tol),
                           std::min(opts.cg_max_iter, 400), nullptr);
            total_iters += c2.iterations;

            // Longest feasible fraction of the subspace step.
            double tau = 1.0;
            for (int i = 0; i < w.rows(); ++i)
                for (int j = 0; j < w.cols(); ++j) {
                    const double di = d(i, j);
                    if (di > 0.0 && std::isfinite(vi.upper(i, j)))
                        tau = std::min(tau, (vi.upper(i, j) - w(i, j)) / di);
                    else if (di < 0.0)
                        tau = std::min(tau, (vi.lower(i, j) - w(i, j)) / di);
                }
            tau = std::max(0.0, tau);

            SpaceTimeField cand = clamp_box(w + tau * d, vi.lower, vi.upper, pinned);
            double j_now = vi.objective(w);
            for (int back = 0; back < 8; ++back) {
                if (vi.objective(cand) <= j_now + 1e-300) break;
                tau *= 0.5;
                cand = clamp_box(w + tau * d, vi.lower, vi.upper, pinned);
            }
            if (vi.objective(cand) <= j_now + 1e-300) {
                w = std::move(cand);
                g = vi.gradient(w);
                s_prev = SpaceTimeField();  // BB pair no longer matches
                y_prev = SpaceTimeField();
                recent.push_back(vi.objective(w));
                if (recent.size() > 10) recent.pop_front();
            }
        }
    }

    // Complementarity: every site is either (near-)stationary or at a bound.
    double comp = 0.0;
    for (int i = 0; i < w.rows(); ++i) {
        if (i == pinned) continue;
        for (int j = 0; j < w.cols(); ++j) {
            const double dist =
                std::min(w(i, j) - vi.lower(i, j),
                         std::isfinite(vi.upper(i, j)) ? vi.upper(i, j) - w(i, j) : kInf);
            comp = std::max(comp, std::min(std::abs(g(i, j)), dist));
        }
    }
    cert.complementarity = comp;

    if (!cert.converged)
        throw IterationLimitError("solve_variational: iteration limit", std::move(w), cert);
    return {std::move(w), cert};
}

double directional_derivative_check(const QuadraticVI& vi, const SpaceTimeField& w,
                                    const SpaceTimeField& dw) {
    const double analytic = inner(vi.gradient(w), dw);
    const double h = 1e-3 / (1.0 + norm_l2(dw));
    SpaceTimeField plus = w + h * dw;
    SpaceTimeField minus = w - h * dw;
    const double fd = (vi.objective(plus) - vi.objective(minus)) / (2.0 * h);
    return std::abs(fd - analytic) / (1.0 + std::abs(analytic));
}

}  // namespace mfg
