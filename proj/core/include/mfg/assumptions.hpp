#pragma once

#include <cstdint>

#include "mfg/problem.hpp"

namespace mfg {

/// Sampled numeric checks of the standing structural hypotheses.
/// Probes never abort; they report values and pass/fail flags.
struct AssumptionReport {
    // Midpoint convexity gap of p -> H(x,p); must be >= -1e-10.
    double convexity_gap_min = 0.0;
    bool convexity_ok = false;

    // Monotonicity of p -> D_p H: (DpH(p)-DpH(q)).(p-q); must be >= -1e-10.
    double gradient_monotonicity_min = 0.0;
    bool gradient_monotonicity_ok = false;

    // Smallest sampled-valid constants in the coercivity / growth bounds
    //   -H + DpH.p >= |p|^gamma / C - C
    //    H         >= |p|^gamma / C - C
    //   |DpH|      <= C |p|^{gamma-1} + C
    double coercivity_constant = 0.0;
    double lower_growth_constant = 0.0;
    double gradient_growth_constant = 0.0;
    bool growth_ok = false;

    // Max relative error of DpH against central differences of H.
    double gradient_fd_error = 0.0;
    bool gradient_fd_ok = false;

    // Minimum of <g(m1,h(m1)) - g(m2,h(m2)), m1 - m2> over random pairs,
    // relative to the pair scale; must be >= -1e-10.
    double coupling_monotonicity_min = 0.0;
    bool coupling_monotonicity_ok = false;

    bool all_ok() const {
        return convexity_ok && gradient_monotonicity_ok && growth_ok && gradient_fd_ok &&
               coupling_monotonicity_ok;
    }
};

AssumptionReport probe_assumptions(const MFGProblem& problem, int sample_count = 100,
                                   std::uint64_t seed = 7);

}  // namespace mfg
