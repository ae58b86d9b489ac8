#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "mfg/diff_plan.hpp"

namespace mfg {

/// Seeded generator of smooth random test fields.
///
/// Fields are band-limited in x (|kappa| <= N_x/4) with mode amplitudes
/// decayed like (1 + |2 pi kappa|^q)^-1, and polynomial in t (low Legendre
/// degree).  The decay mimics membership in a bounded H^2k ball so that the
/// eps-weighted energies of test fields stay comparable with those of
/// solver outputs; the polynomial t-dependence keeps the quadrature exact
/// on the products the probes integrate.
class FieldSampler {
  public:
    FieldSampler(GridPtr grid, const DiffPlan& plan, std::uint64_t seed);

    SpaceTimeField smooth(double amplitude, int t_degree);

    /// eta with eta(0,.) = m0 and eta >= floor (optionally eta <= cap),
    /// built by squaring a pinned smooth field.
    SpaceTimeField admissible_density(const Eigen::VectorXd& m0, double floor,
                                      std::optional<double> cap = std::nullopt);
    /// admissible_density with every slice normalized to unit mass.
    SpaceTimeField unit_mass_density(const Eigen::VectorXd& m0, double floor,
                                     std::optional<double> cap = std::nullopt);
    /// v with v(T,.) = u_T.
    SpaceTimeField admissible_value(const Eigen::VectorXd& terminal);
    /// v with v(T,.) = 0.
    SpaceTimeField terminal_zero_test();
    /// phi >= 0 with phi(0,.) = 0.
    SpaceTimeField nonnegative_initial_zero_test();

  private:
    GridPtr grid_;
    int k_;
    double decay_;
    std::mt19937_64 rng_;
};

}  // namespace mfg
