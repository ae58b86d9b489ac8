#include "mfg/problem.hpp"

#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

Eigen::MatrixXd pointwise_norm(const std::vector<SpaceTimeField>& p) {
    Eigen::MatrixXd n2 = p[0].values().cwiseAbs2();
    for (size_t i = 1; i < p.size(); ++i) n2 += p[i].values().cwiseAbs2();
    return n2.cwiseSqrt();
}

}  // namespace

SpaceTimeField HamiltonianSpec::value(const std::vector<SpaceTimeField>& p,
                                      const SpaceTimeField* rho) const {
    const GridPtr& grid = p[0].grid();
    Eigen::MatrixXd out;
    switch (kind) {
        case HamiltonianKind::quadratic: {
            out = 0.5 * p[0].values().cwiseAbs2();
            for (size_t i = 1; i < p.size(); ++i) out += 0.5 * p[i].values().cwiseAbs2();
            break;
        }
        case HamiltonianKind::power: {
            Eigen::MatrixXd norm = pointwise_norm(p);
            out = norm.array().pow(gamma).matrix();
            out.array().rowwise() *= coefficient.transpose().array();
            for (size_t i = 0; i < p.size(); ++i)
                out += (p[i].values().array().rowwise() * drift[i].transpose().array()).matrix();
            break;
        }
        case HamiltonianKind::congestion: {
            if (rho == nullptr) throw DomainError("congestion Hamiltonian needs a density");
            if (rho->values().minCoeff() <= 0.0)
                throw DomainError("congestion Hamiltonian evaluated at nonpositive density");
            Eigen::MatrixXd norm = pointwise_norm(p);
            out = norm.array().pow(gamma).matrix();
            out.array().rowwise() *= coefficient.transpose().array();
            out.array() /= rho->values().array().pow(tau);
            break;
        }
    }
    SpaceTimeField f(grid, std::move(out));
    f.ensure_finite("hamiltonian value");
    return f;
}

std::vector<SpaceTimeField> HamiltonianSpec::gradient(const std::vector<SpaceTimeField>& p,
                                                      const SpaceTimeField* rho) const {
    const GridPtr& grid = p[0].grid();
    std::vector<SpaceTimeField> out;
    switch (kind) {
        case HamiltonianKind::quadratic: {
            out = p;
            break;
        }
        case HamiltonianKind::power:
        case HamiltonianKind::congestion: {
            // D_p H = c gamma |p|^{gamma-2} p [ / m^tau ] (+ b for power)
            Eigen::MatrixXd norm = pointwise_norm(p);
            Eigen::MatrixXd scale =
                gamma * (norm.array() + 1e-300).pow(gamma - 2.0).matrix();  // safe at p = 0, gamma > 1
            if (gamma < 2.0) {
                // |p|^{gamma-2} diverges at 0 but |p|^{gamma-2} p -> 0; clamp explicitly.
                for (int i = 0; i < scale.rows(); ++i)
                    for (int j = 0; j < scale.cols(); ++j)
                        if (norm(i, j) == 0.0) scale(i, j) = 0.0;
            }
            scale.array().rowwise() *= coefficient.transpose().array();
            if (kind == HamiltonianKind::congestion) {
                if (rho == nullptr) throw DomainError("congestion Hamiltonian needs a density");
                if (rho->values().minCoeff() <= 0.0)
                    throw DomainError("congestion Hamiltonian evaluated at nonpositive density");
                scale.array() /= rho->values().array().pow(tau);
            }
            for (size_t i = 0; i < p.size(); ++i) {
                Eigen::MatrixXd c = p[i].values().cwiseProduct(scale);
                if (kind == HamiltonianKind::power)
                    c.array().rowwise() += drift[i].transpose().array();
                out.emplace_back(grid, std::move(c));
            }
            break;
        }
    }
    for (auto& f : out) f.ensure_finite("hamiltonian gradient");
    return out;
}

double HamiltonianSpec::value_at(int site, const Eigen::VectorXd& p, double m) const {
    const double norm = p.norm();
    switch (kind) {
        case HamiltonianKind::quadratic:
            return 0.5 * norm * norm;
        case HamiltonianKind::power: {
            double v = coefficient[site] * std::pow(norm, gamma);
            for (int i = 0; i < p.size(); ++i) v += drift[i][site] * p[i];
            return v;
        }
        case HamiltonianKind::congestion:
            if (m <= 0.0) throw DomainError("congestion Hamiltonian evaluated at nonpositive density");
            return coefficient[site] * std::pow(norm, gamma) / std::pow(m, tau);
    }
    return 0.0;
}

Eigen::VectorXd HamiltonianSpec::gradient_at(int site, const Eigen::VectorXd& p, double m) const {
    const double norm = p.norm();
    switch (kind) {
        case HamiltonianKind::quadratic:
            return p;
        case HamiltonianKind::power: {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(p.size());
            if (norm > 0.0) g = coefficient[site] * gamma * std::pow(norm, gamma - 2.0) * p;
            for (int i = 0; i < p.size(); ++i) g[i] += drift[i][site];
            return g;
        }
        case HamiltonianKind::congestion: {
            if (m <= 0.0) throw DomainError("congestion Hamiltonian evaluated at nonpositive density");
            if (norm == 0.0) return Eigen::VectorXd::Zero(p.size());
            return (coefficient[site] * gamma * std::pow(norm, gamma - 2.0) / std::pow(m, tau)) * p;
        }
    }
    return p;
}

void HamiltonianSpec::validate(int site_count, int dim) const {
    if (kind == HamiltonianKind::quadratic) return;
    if (!(gamma > 1.0)) throw DomainError("Hamiltonian: gamma must exceed 1");
    if (coefficient.size() != site_count)
        throw ShapeError("Hamiltonian: coefficient profile has wrong length");
    if (coefficient.minCoeff() <= 0.0)
        throw DomainError("Hamiltonian: coefficient c(x) must be strictly positive");
    if (kind == HamiltonianKind::power) {
        if (static_cast<int>(drift.size()) != dim)
            throw ShapeError("Hamiltonian: drift needs one profile per dimension");
        for (const auto& b : drift)
            if (b.size() != site_count) throw ShapeError("Hamiltonian: drift profile length mismatch");
    }
    if (kind == HamiltonianKind::congestion && !(tau > 0.0 && tau < 1.0))
        throw DomainError("Hamiltonian: congestion exponent tau must lie in (0,1)");
}

SpaceTimeField CouplingSpec::nonlocal_term(const SpaceTimeField& m) const {
    if (nonlocal == NonlocalKind::off) return SpaceTimeField::zeros(m.grid());
    if (!kernel) throw DomainError("coupling: nonlocal variant needs a kernel");
    SpaceTimeField inner_conv = kernel->convolve(m);
    if (nonlocal == NonlocalKind::power_inside) {
        if (inner_conv.values().minCoeff() < 0.0)
            inner_conv.values() = inner_conv.values().cwiseMax(0.0);
        inner_conv.values() = inner_conv.values().array().pow(nonlocal_exponent).matrix();
    }
    SpaceTimeField out = kernel->convolve(inner_conv);
    out *= nonlocal_scale;
    return out;
}

SpaceTimeField CouplingSpec::evaluate(const SpaceTimeField& m) const {
    if (m.values().minCoeff() < 0.0) throw DomainError("coupling evaluated at negative density");
    SpaceTimeField out(m.grid(),
                       local_scale * m.values().array().pow(local_exponent).matrix());
    if (nonlocal != NonlocalKind::off) out += nonlocal_term(m);
    out.ensure_finite("coupling value");
    return out;
}

void CouplingSpec::validate() const {
    if (!(local_exponent > 0.0)) throw DomainError("coupling: local exponent must be positive");
    if (nonlocal != NonlocalKind::off) {
        if (!kernel) throw DomainError("coupling: nonlocal variant needs a kernel");
        if (nonlocal_scale < 0.0) throw DomainError("coupling: nonlocal scale must be >= 0");
        if (nonlocal == NonlocalKind::power_inside && !(nonlocal_exponent > 0.0))
            throw DomainError("coupling: nonlocal exponent must be positive");
    }
}

double MFGProblem::effective_floor() const {
    return congestion_floor ? *congestion_floor : 0.5 * initial_density.minCoeff();
}

double MFGProblem::test_density_floor() const {
    return hamiltonian.density_dependent() ? effective_floor() : 0.0;
}

void MFGProblem::validate() const {
    const int ns = grid->cols();
    const int d = dim();
    hamiltonian.validate(ns, d);
    coupling.validate();

    if (initial_density.size() != ns) throw ShapeError("m0 profile length mismatch");
    if (initial_density.minCoeff() <= 0.0)
        throw DomainError("initial density must be strictly positive");
    const double mass = initial_density.sum() * grid->torus.site_weight();
    if (std::abs(mass - 1.0) > 1e-10)
        throw DomainError("initial density must have unit mass on the torus");

    if (terminal_cost.size() != ns) throw ShapeError("u_T profile length mismatch");

    const int n_diff = d == 1 ? 1 : 3;
    if (static_cast<int>(diffusion.size()) != n_diff)
        throw ShapeError("diffusion needs a11 (d=1) or a11,a12,a22 (d=2)");
    for (const auto& a : diffusion)
        if (a.size() != ns) throw ShapeError("diffusion profile length mismatch");
    if (d == 1) {
        if (diffusion[0].minCoeff() < 0.0) throw DomainError("diffusion a(x) must be >= 0");
    } else {
        for (int j = 0; j < ns; ++j) {
            const double a11 = diffusion[0][j], a12 = diffusion[1][j], a22 = diffusion[2][j];
            if (a11 < 0.0 || a22 < 0.0 || a11 * a22 - a12 * a12 < -1e-14)
                throw DomainError("diffusion matrix must be positive semi-definite");
        }
    }

    if (!potential.empty() && !potential.grid()->compatible(*grid))
        throw ShapeError("potential grid mismatch");

    if (density_cap) {
        if (!(*density_cap > 1.0)) throw DomainError("density cap M must exceed 1");
        if ((initial_density.array() > *density_cap).any())
            throw DomainError("initial density exceeds the density cap");
    }
    if (congestion_floor) {
        if (!(*congestion_floor > 0.0 && *congestion_floor < 1.0))
            throw DomainError("congestion floor must lie in (0,1)");
        if (initial_density.minCoeff() < *congestion_floor)
            throw DomainError("initial density must dominate the congestion floor");
    }
    if (hamiltonian.kind == HamiltonianKind::congestion && density_cap)
        throw DomainError("congestion and density cap cannot be combined");
}

void RegularizationConfig::validate(const GridPtr& grid) const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
    if (k < 1) throw DomainError("regularity order k must be >= 1");
    if (!sigma.empty()) {
        if (!sigma.grid()->compatible(*grid)) throw ShapeError("sigma grid mismatch");
        if (sigma.values().minCoeff() < 0.0) throw DomainError("sigma must be nonnegative");
    }
    if (!xi.empty() && !xi.grid()->compatible(*grid)) throw ShapeError("xi grid mismatch");
}

ShiftedProblem::ShiftedProblem(const MFGProblem& problem, const RegularizationConfig& reg,
                               std::shared_ptr<const DiffPlan> plan)
    : problem_(&problem), plan_(std::move(plan)), epsilon_(reg.epsilon) {
    const GridPtr& grid = problem.grid;
    m0_field_ = SpaceTimeField::broadcast_space(grid, problem.initial_density);
    ut_field_ = SpaceTimeField::broadcast_space(grid, problem.terminal_cost);

    // Du_T per dimension (spectral; u_T is t-independent so any slice works).
    std::vector<SpaceTimeField> grad_ut = plan_->gradient_x(ut_field_);
    for (const auto& g : grad_ut) du_t_.push_back(g.values().row(0).transpose());

    // V^ = V + sum a_ij (u_T)_{x_i x_j}
    v_hat_ = problem.potential.empty() ? SpaceTimeField::zeros(grid) : problem.potential;
    v_hat_ += plan_->diffusion_term(ut_field_, problem.diffusion);

    // sigma^ = sigma + m0 and its high-order offset
    sigma_hat_ = reg.sigma.empty() ? m0_field_ : reg.sigma + m0_field_;
    sigma_offset_ = plan_->data_offset(sigma_hat_);

    // xi^ = xi + u_T and its offset
    SpaceTimeField xi_hat = reg.xi.empty() ? ut_field_ : reg.xi + ut_field_;
    xi_offset_ = plan_->data_offset(xi_hat);
}

SpaceTimeField ShiftedProblem::hamiltonian_value(const std::vector<SpaceTimeField>& p_shift,
                                                 const SpaceTimeField* rho) const {
    std::vector<SpaceTimeField> p = p_shift;
    for (size_t i = 0; i < p.size(); ++i)
        p[i].values().array().rowwise() += du_t_[i].transpose().array();
    return problem_->hamiltonian.value(p, rho);
}

std::vector<SpaceTimeField> ShiftedProblem::hamiltonian_gradient(
    const std::vector<SpaceTimeField>& p_shift, const SpaceTimeField* rho) const {
    std::vector<SpaceTimeField> p = p_shift;
    for (size_t i = 0; i < p.size(); ++i)
        p[i].values().array().rowwise() += du_t_[i].transpose().array();
    return problem_->hamiltonian.gradient(p, rho);
}

SpaceTimeField ShiftedProblem::coupling_value(const SpaceTimeField& w_shift) const {
    SpaceTimeField m = w_shift + m0_field_;
    if (m.values().minCoeff() < -1e-12) throw DomainError("shifted coupling: density went negative");
    m.values() = m.values().cwiseMax(0.0);
    return problem_->coupling.evaluate(m);
}

SpaceTimeField ShiftedProblem::lower_bound() const {
    SpaceTimeField lb(m0_field_.grid(), (-m0_field_.values()).eval());
    if (problem_->hamiltonian.kind == HamiltonianKind::congestion)
        lb.values().array() += problem_->effective_floor();
    return lb;
}

std::optional<SpaceTimeField> ShiftedProblem::upper_bound() const {
    if (!problem_->density_cap) return std::nullopt;
    SpaceTimeField ub(m0_field_.grid(),
                      (*problem_->density_cap - m0_field_.values().array()).matrix());
    return ub;
}

SpaceTimeField ShiftedProblem::unshift_density(const SpaceTimeField& w_shift) const {
    return w_shift + m0_field_;
}

SpaceTimeField ShiftedProblem::unshift_value(const SpaceTimeField& u_shift) const {
    return u_shift + ut_field_;
}

ShiftedProblem terminal_shift(const MFGProblem& problem, const RegularizationConfig& reg,
                              std::shared_ptr<const DiffPlan> plan) {
    problem.validate();
    reg.validate(problem.grid);
    return ShiftedProblem(problem, reg, std::move(plan));
}

}  // namespace mfg
