#pragma once

#include <optional>
#include <vector>

#include "mfg/subsolvers.hpp"

namespace mfg {

/// Current iterate in shifted variables: density offset w = m - m0 with
/// w(0,.) = 0 and w + m0 within the variant bounds, value offset
/// u = u_full - u_T with u(T,.) = 0.
struct IterState {
    SpaceTimeField density_shift;
    SpaceTimeField value_shift;
    int iteration = 0;
    std::vector<double> residual_history;
};

struct FixedPointOpts {
    double damping = 0.5;     // omega in (0,1]
    double tolerance = 1e-6;  // relative outer residual
    int max_outer = 500;
    // Window of the residual-history least squares mixing; 0 is plain
    // damped iteration.  The map amplifies the spatially-flat, temporally
    // low-degree subspace by about 1/eps, and plain damping then needs
    // omega of order eps; the window deflates that subspace instead.
    int anderson_depth = 20;
    SubsolverOptions subsolver;
};

struct FixedPointResult {
    SpaceTimeField density;  // m_eps, unshifted
    SpaceTimeField value;    // u_eps, unshifted
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool monotone_flagged = false;  // damping shrink budget was exhausted
    std::vector<double> residual_history;
    SolveCertificate vi_certificate;
    SolveCertificate cg_certificate;
};

/// One application of the frozen-coefficient map: the obstacle problem for
/// the density offset, the coercive solve for the value offset.
std::pair<IterState, std::pair<SolveCertificate, SolveCertificate>> apply_fixed_point_map(
    const IterState& state, const ShiftedProblem& shifted,
    const std::shared_ptr<const GramOperator>& gram, const SubsolverOptions& opts);

FixedPointResult fixed_point_solve(const MFGProblem& problem, const RegularizationConfig& reg,
                                   const FixedPointOpts& opts,
                                   const IterState* start = nullptr,
                                   std::shared_ptr<const DiffPlan> plan = nullptr);

struct EpsilonRecord {
    double epsilon = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    double gradient_lgamma = 0.0;    // ||Du_eps||_{L^gamma}
    double sqrt_eps_energy_m = 0.0;  // sqrt(eps * discrete H^2k energy of m_eps)
    double sqrt_eps_energy_u = 0.0;
    double mass_deviation = 0.0;     // max_t |mass(t) - 1|
};

/// Final output of a continuation run: per-epsilon history plus the
/// normalized pair, the recovered time constant, and the rebuilt value.
struct WeakSolution {
    std::vector<EpsilonRecord> history;
    std::vector<std::pair<SpaceTimeField, SpaceTimeField>> fields;  // (m, u) per epsilon
    SpaceTimeField density;        // m at the smallest epsilon reached
    SpaceTimeField value_tilde;    // u minus its slice means
    SpaceTimeField value;          // value_tilde + integral of mu
    Eigen::VectorXd mu;            // recovered time constant
    Eigen::VectorXd mu_deviation;  // per-slice spatial std of the expression
    bool converged = false;
};

WeakSolution epsilon_continuation(const MFGProblem& problem, const RegularizationConfig& reg,
                                  const std::vector<double>& schedule,
                                  const FixedPointOpts& opts);

/// Per-slice spatial mean of the Hamilton-Jacobi expression at (m, u~),
/// with the spatial standard deviation as a consistency indicator and the
/// per-slice minimum density (nonpositive minima flag the slices where the
/// recovery lemma does not apply).
struct MultiplierSeries {
    Eigen::VectorXd mu;
    Eigen::VectorXd deviation;
    Eigen::VectorXd min_density;
};

MultiplierSeries recover_multiplier(const SpaceTimeField& density,
                                    const SpaceTimeField& value_tilde,
                                    const MFGProblem& problem, const DiffPlan& plan);

/// u(t,x) = u~(t,x) + trapezoid integral of mu over [t, T].
SpaceTimeField reconstruct_value(const SpaceTimeField& value_tilde, const Eigen::VectorXd& mu);

/// Geometric default schedule 1e-1 .. 1e-4 with ratio 10^(-1/2).
std::vector<double> default_epsilon_schedule();

}  // namespace mfg
