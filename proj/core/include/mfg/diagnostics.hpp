#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfg/problem.hpp"
#include "mfg/sampling.hpp"

namespace mfg {

/// Raw integrals of the a priori energy identity (constants left out; the
/// bound's constants are existential, so only trends are meaningful).
struct EnergyReport {
    double coupling_integral = 0.0;          // int m g(m, h(m))
    double weighted_gradient_integral = 0.0;  // int (m + sigma) |Du|^gamma
    double initial_weighted_gradient_integral = 0.0;  // int m0 |Du|^gamma
    double eps_energy = 0.0;                  // eps (||m||^2 + ||u||^2 + top derivatives)
    double gradient_l1 = 0.0;
    double gradient_lgamma = 0.0;
    double rhs_driver = 0.0;      // 1 + ||Du||_L1
    double lhs_over_rhs = 0.0;
};

struct MonotonicityPair {
    double base = 0.0;         // <F[z1]-F[z2], z1-z2>
    double regularized = 0.0;  // the eps-augmented pairing
    double quadratic_gap = 0.0;
};

struct MonotonicityProbe {
    double base_min = 0.0;
    double regularized_min = 0.0;
    double gap_min = 0.0;
    int samples = 0;
    bool base_ok = false;
    bool regularized_ok = false;
};

struct MintyReport {
    double minimum = 0.0;
    int argmin_sample = 0;
    int samples = 0;
};

struct HJSubsolutionReport {
    double max_value = 0.0;  // must stay <= tolerance: subsolution margin
    int samples = 0;
};

struct PDEResiduals {
    double hj_l2 = 0.0;    // on the region where the density is positive
    double hj_linf = 0.0;
    double active_fraction = 0.0;
    double transport_l2 = 0.0;
    double transport_linf = 0.0;
};

struct DiagnosticsOptions {
    std::uint64_t seed = 1234;
    int monotonicity_samples = 200;
    int minty_samples = 100;
    int weak_fp_samples = 50;
    int hj_samples = 100;
    bool hj_allow_power = false;
};

struct DiagnosticsReport {
    EnergyReport energy;
    double mass_deviation = 0.0;
    MonotonicityProbe monotonicity;
    MintyReport minty;
    double weak_transport_residual = 0.0;
    bool hj_subsolution_in_scope = false;
    HJSubsolutionReport hj_subsolution;
    PDEResiduals pde;
    Eigen::VectorXd mu;
    double mu_max_deviation = 0.0;
};

EnergyReport energy_report(const SpaceTimeField& density, const SpaceTimeField& value,
                           const MFGProblem& problem, const RegularizationConfig& reg,
                           const DiffPlan& plan);

/// <F[z1]-F[z2], z1-z2> and the eps-augmented pairing for one pair.
MonotonicityPair monotone_pairing(const MFGProblem& problem, const DiffPlan& plan, double epsilon,
                                  const SpaceTimeField& eta1, const SpaceTimeField& v1,
                                  const SpaceTimeField& eta2, const SpaceTimeField& v2);

/// Sum of Cauchy-Schwarz magnitudes of the pairing's constituent terms:
/// the natural yardstick for "zero up to cancellation error".
double pairing_scale(const MFGProblem& problem, const DiffPlan& plan, const SpaceTimeField& eta1,
                     const SpaceTimeField& v1, const SpaceTimeField& eta2,
                     const SpaceTimeField& v2);

MonotonicityProbe monotonicity_probe(const MFGProblem& problem, const DiffPlan& plan,
                                     double epsilon, int sample_count, std::uint64_t seed);

MintyReport minty_residual(const SpaceTimeField& density, const SpaceTimeField& value_tilde,
                           const MFGProblem& problem, const DiffPlan& plan, int sample_count,
                           std::uint64_t seed);

/// Worst |weak continuity-equation pairing| over sampled tests with zero
/// terminal slice; `current` is the flux surrogate (density times Du).
double weak_transport_residual(const SpaceTimeField& density,
                               const std::vector<SpaceTimeField>& current,
                               const MFGProblem& problem, const DiffPlan& plan, int sample_count,
                               std::uint64_t seed);

HJSubsolutionReport hj_subsolution_check(const SpaceTimeField& density,
                                         const SpaceTimeField& value, const MFGProblem& problem,
                                         const DiffPlan& plan, int sample_count,
                                         std::uint64_t seed, bool allow_power = false);

/// Strong-form residuals of the regularized system; pass epsilon_override
/// >= 0 to evaluate at a different epsilon (0 gives the unregularized
/// system).
PDEResiduals pde_residuals(const SpaceTimeField& density, const SpaceTimeField& value,
                           const MFGProblem& problem, const RegularizationConfig& reg,
                           const DiffPlan& plan, double epsilon_override = -1.0);

DiagnosticsReport run_diagnostics(const SpaceTimeField& density, const SpaceTimeField& value,
                                  const SpaceTimeField& value_tilde, const MFGProblem& problem,
                                  const RegularizationConfig& reg, const DiffPlan& plan,
                                  const DiagnosticsOptions& opts);

}  // namespace mfg
