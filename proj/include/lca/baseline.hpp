#pragma once

#include "lca/activation.hpp"
#include "lca/model.hpp"
#include "lca/objective.hpp"
#include "lca/random.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace lca {

/// Largest eigenvalue of Phi^T Phi (= sigma_max(Phi)^2) by power iteration,
/// stopped at 1e-6 relative change of the Rayleigh quotient.
inline double spectral_norm_estimate(const Dictionary& dictionary) {
    const Matrix& phi = dictionary.matrix();
    // Fixed pseudo-random start; a constant vector can be orthogonal to the
    // top eigenvector.
    Rng rng(0x5eed);
    Vector v(phi.cols());
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(0.5, 1.5);
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Vector w = phi.transpose() * (phi * v);
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        if (it > 0 && std::abs(next - estimate) <= 1e-6 * std::abs(next)) return std::max(next, norm);
        estimate = next;
    }
    return estimate;
}

struct IstaConfig {
    /// Gradient step; 0 selects 0.9 / sigma_max^2.
    double step_size = 0.0;
    int max_iters = 100000;
    /// Stop when ||a_{k+1} - a_k||_inf < tol.
    double tol = 1e-10;
    bool accelerated = false;
};

struct IstaResult {
    Vector a;
    /// Index of the first iterate that is stationary to tolerance.
    int iters = 0;
    bool converged = false;
    double step_size = 0.0;
    std::vector<double> objective_history;
};

/// Proximal gradient (ISTA, or FISTA when accelerated) for
/// 1/2 ||y - Phi a||^2 + lambda ||a||_1, started from a = 0.
inline IstaResult ista_solve(const Problem& problem, const IstaConfig& config = {}) {
    detail::require(config.max_iters >= 1, "max_iters must be positive");
    detail::require(config.tol > 0.0, "tol must be positive");
    detail::require(config.step_size >= 0.0, "step_size must be nonnegative");
    const double lipschitz = spectral_norm_estimate(problem.dictionary());
    double eta = config.step_size;
    if (eta == 0.0) {
        eta = lipschitz > 0.0 ? 0.9 / lipschitz : 1.0;
    } else if (eta * lipschitz > 1.0 + 1e-6) {
        throw StepTooLarge("step size " + std::to_string(eta) + " exceeds 1/sigma_max^2 = " +
                           std::to_string(1.0 / lipschitz));
    }

    const Matrix& phi = problem.phi();
    const Vector drive = phi.transpose() * problem.y();
    const ActivationSpec shrink = ActivationSpec::soft_threshold(problem.lambda() * eta);
    const ActivationSpec l1 = ActivationSpec::soft_threshold(problem.lambda());

    IstaResult res;
    res.step_size = eta;
    Vector a = Vector::Zero(problem.n());
    Vector z = a;
    double momentum = 1.0;
    res.objective_history.push_back(objective(problem, l1, a));

    for (int k = 1; k <= config.max_iters; ++k) {
        const Vector& base = config.accelerated ? z : a;
        const Vector grad = phi.transpose() * (phi * base) - drive;
        Vector next = apply(shrink, base - eta * grad);
        const double change = (next - a).lpNorm<Eigen::Infinity>();
        if (config.accelerated) {
            const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            z = next + ((momentum - 1.0) / m_next) * (next - a);
            momentum = m_next;
        }
        a = std::move(next);
        res.objective_history.push_back(objective(problem, l1, a));
        if (change < config.tol) {
            res.converged = true;
            res.iters = k - 1;
            break;
        }
        res.iters = k;
    }
    res.a = std::move(a);
    return res;
}

}  // namespace lca
