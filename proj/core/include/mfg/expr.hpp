#pragma once

#include <memory>
#include <string>

#include "mfg/field.hpp"

namespace mfg {

/// Closed-form grammar for config-supplied data fields.
///
/// expr   := term (('+'|'-') term)*
/// term   := unary (('*'|'/') unary)*
/// unary  := '-'? power
/// power  := atom ('^' integer)?
/// atom   := number | 't' | 'pi' | mode '(' integer ')' | '(' expr ')'
/// mode   := sinx | cosx            (d = 1, argument n means 2 pi n x)
///         | sinx1|cosx1|sinx2|cosx2 (d = 2)
///
/// x enters only through the periodic modes, so every expression is
/// torus-periodic by construction.
class Expression {
  public:
    static Expression parse(const std::string& text, int dim);

    double eval(double t, double x1, double x2 = 0.0) const;
    bool time_dependent() const;

    /// Sample on the spatial grid at fixed t = 0 (for x-only data).
    Eigen::VectorXd profile(const TorusGrid& grid) const;
    SpaceTimeField sample(const GridPtr& grid) const;

    struct Node;

  private:
    std::shared_ptr<const Node> root_;
};

}  // namespace mfg
