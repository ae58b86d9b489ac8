#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "mfg/diff_plan.hpp"
#include "mfg/field.hpp"
#include "mfg/kernel.hpp"

namespace mfg {

enum class HamiltonianKind { quadratic, power, congestion };

/// Closed-form Hamiltonian families.
///
///   quadratic:  H = |p|^2 / 2
///   power:      H = c(x) |p|^gamma + b(x) . p
///   congestion: H = c(x) |p|^gamma / m^tau,  tau in (0,1)
struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::quadratic;
    double gamma = 2.0;
    double tau = 0.5;                     // congestion only
    Eigen::VectorXd coefficient;          // c(x) > 0, per site
    std::vector<Eigen::VectorXd> drift;   // b(x), one profile per dimension

    bool density_dependent() const { return kind == HamiltonianKind::congestion; }

    /// Pointwise H at gradient components p (and density rho for congestion).
    SpaceTimeField value(const std::vector<SpaceTimeField>& p,
                         const SpaceTimeField* rho = nullptr) const;
    /// Analytic gradient in p, one field per dimension.
    std::vector<SpaceTimeField> gradient(const std::vector<SpaceTimeField>& p,
                                         const SpaceTimeField* rho = nullptr) const;

    /// Scalar evaluations used by the assumption probes.
    double value_at(int site, const Eigen::VectorXd& p, double m = 1.0) const;
    Eigen::VectorXd gradient_at(int site, const Eigen::VectorXd& p, double m = 1.0) const;

    void validate(int site_count, int dim) const;
};

enum class NonlocalKind { off, linear, power_inside };

/// Coupling g(m, h(m)) = s_loc * m^r + nonlocal term.
///
///   linear:       s_nl * zeta * (zeta * m)
///   power_inside: s_nl * zeta * (zeta * m)^tau_nl
struct CouplingSpec {
    double local_exponent = 1.0;  // r > 0
    double local_scale = 1.0;
    NonlocalKind nonlocal = NonlocalKind::off;
    double nonlocal_scale = 1.0;
    double nonlocal_exponent = 0.5;  // power_inside only
    std::shared_ptr<const PeriodicKernel> kernel;

    /// The nonlocal part h(m); zero field when off.
    SpaceTimeField nonlocal_term(const SpaceTimeField& m) const;
    /// g(m, h(m)) pointwise; requires m >= 0.
    SpaceTimeField evaluate(const SpaceTimeField& m) const;

    void validate() const;
};

/// Complete data for one mean-field game on [0,T] x T^d.
struct MFGProblem {
    GridPtr grid;
    HamiltonianSpec hamiltonian;
    CouplingSpec coupling;
    std::vector<Eigen::VectorXd> diffusion;  // a11 (d=1); a11, a12, a22 (d=2)
    SpaceTimeField potential;                // V(t,x)
    Eigen::VectorXd initial_density;         // m0 > 0, unit mass
    Eigen::VectorXd terminal_cost;           // u_T
    std::optional<double> density_cap;       // M > 1
    std::optional<double> congestion_floor;  // delta0 in (0,1), m0 >= delta0

    int dim() const { return grid->torus.dim(); }
    double horizon() const { return grid->time.horizon(); }
    /// Effective congestion floor: the stored value or min(m0)/2.
    double effective_floor() const;
    /// Floor for admissible test densities: the congestion floor when the
    /// Hamiltonian is density-dependent, else zero.
    double test_density_floor() const;

    void validate() const;
};

struct RegularizationConfig {
    double epsilon = 1e-3;  // in (0,1)
    int k = 3;
    SpaceTimeField sigma;  // >= 0; empty means zero
    SpaceTimeField xi;     // empty means zero

    void validate(const GridPtr& grid) const;
};

/// Problem rewritten so both pinned slices are homogeneous:
/// the value unknown is u - u_T (terminal shift H^(x,p) = H(x, p + Du_T),
/// V^ = V + a : D^2 u_T, xi^ = xi + u_T), and the density unknown is
/// m - m0 (sigma^ = sigma + m0, g^(w) = g(w + m0, h(w + m0))).
class ShiftedProblem {
  public:
    ShiftedProblem(const MFGProblem& problem, const RegularizationConfig& reg,
                   std::shared_ptr<const DiffPlan> plan);

    const MFGProblem& base() const { return *problem_; }
    const DiffPlan& plan() const { return *plan_; }
    std::shared_ptr<const DiffPlan> plan_ptr() const { return plan_; }
    double epsilon() const { return epsilon_; }

    /// Gradient of the terminal cost, one profile per dimension.
    const std::vector<Eigen::VectorXd>& terminal_gradient() const { return du_t_; }
    const SpaceTimeField& shifted_potential() const { return v_hat_; }
    const SpaceTimeField& sigma_hat() const { return sigma_hat_; }
    /// sigma^ + sum_{|beta|=2k} d^(2 beta) sigma^.
    const SpaceTimeField& sigma_offset() const { return sigma_offset_; }
    /// xi^ + sum_{|beta|=2k} d^(2 beta) xi^.
    const SpaceTimeField& xi_offset() const { return xi_offset_; }

    /// H^(x, p[, rho]) = H(x, p + Du_T[, rho]) on shifted gradient fields.
    SpaceTimeField hamiltonian_value(const std::vector<SpaceTimeField>& p_shift,
                                     const SpaceTimeField* rho = nullptr) const;
    std::vector<SpaceTimeField> hamiltonian_gradient(const std::vector<SpaceTimeField>& p_shift,
                                                     const SpaceTimeField* rho = nullptr) const;

    /// g^(w) = g(w + m0, h(w + m0)); requires w + m0 >= 0.
    SpaceTimeField coupling_value(const SpaceTimeField& w_shift) const;

    /// Bounds of the shifted density box (lower always present).
    SpaceTimeField lower_bound() const;
    std::optional<SpaceTimeField> upper_bound() const;

    /// Unshifted density m = w + m0 (as a field).
    SpaceTimeField unshift_density(const SpaceTimeField& w_shift) const;
    /// Unshifted value u = u_shift + u_T.
    SpaceTimeField unshift_value(const SpaceTimeField& u_shift) const;

  private:
    const MFGProblem* problem_;
    std::shared_ptr<const DiffPlan> plan_;
    double epsilon_;
    std::vector<Eigen::VectorXd> du_t_;
    SpaceTimeField v_hat_;
    SpaceTimeField sigma_hat_;
    SpaceTimeField sigma_offset_;
    SpaceTimeField xi_offset_;
    SpaceTimeField m0_field_;
    SpaceTimeField ut_field_;
};

/// Build the shifted problem (validates inputs first).
ShiftedProblem terminal_shift(const MFGProblem& problem, const RegularizationConfig& reg,
                              std::shared_ptr<const DiffPlan> plan);

}  // namespace mfg
