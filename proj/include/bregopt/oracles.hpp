#pragma once

#include "bregopt/problems.hpp"

#include <functional>

namespace bregopt::oracles {

/// Central differences with step h_j = step_rel * max(1, |x_j|).
Vector central_difference_gradient(const std::function<double(const Vector&)>& fn,
                                   const Vector& x, double step_rel = 1e-6);

/// Relative error |a - b| / max(1, |b|) used by gradient checks.
double relative_error(const Vector& approx, const Vector& exact);

/// u -> g(u) + <grad, u - y> + D_h(u, y) / lambda; +inf outside int dom h.
double prox_subproblem_value(const CompositeObjective& obj, const Vector& u, const Vector& y,
                             const Vector& grad, double lambda);

struct SubproblemMinimum {
    Vector argmin;
    double value = 0.0;
    int evaluations = 0;
};

/// Dense grid over a box around y (grown until the minimiser is interior)
/// followed by compass-search refinement. Only meant for d <= 3.
SubproblemMinimum brute_force_prox(const CompositeObjective& obj, const Vector& y,
                                   const Vector& grad, double lambda);

} // namespace bregopt::oracles
