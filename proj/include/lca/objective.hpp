#pragma once

#include "lca/activation.hpp"
#include "lca/model.hpp"

namespace lca {

/// V(a) = 1/2 ||y - Phi a||^2 + lambda * sum_n C(a_n).
inline double objective(const Problem& problem, const ActivationSpec& spec, const Vector& a) {
    detail::require(a.size() == problem.n(), "objective: coefficient length must equal n");
    Vector residual = problem.y();
    for (Index j = 0; j < a.size(); ++j)
        if (a[j] != 0.0) residual.noalias() -= a[j] * problem.phi().col(j);
    double cost = 0.0;
    if (spec.is_soft()) {
        cost = a.lpNorm<1>();
    } else {
        for (Index j = 0; j < a.size(); ++j) cost += penalty(spec, a[j]);
    }
    return 0.5 * residual.squaredNorm() + problem.lambda() * cost;
}

}  // namespace lca
