#pragma once

// Self-check suite behind `lca validate`.

#include "lca/activation.hpp"
#include "lca/baseline.hpp"
#include "lca/diagnostics.hpp"
#include "lca/dynamics.hpp"
#include "lca/experiments.hpp"
#include "lca/io.hpp"
#include "lca/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lca {

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

struct ValidateOptions {
    bool quick = false;
    /// Replaces the soft threshold's derivative bound (for fault injection).
    std::optional<double> soft_alpha;
    std::uint64_t seed = 2024;
};

struct ErrorBoundTally {
    int trials = 0;
    int sign_fail = 0;
    int slope_fail = 0;
    int quadratic_fail = 0;
    int integral_fail = 0;

    int failures() const { return sign_fail + slope_fail + quadratic_fail + integral_fail; }
};

/// Random (u*, u~) pairs with entries uniform in [-spread, spread] * lambda;
/// every third trial is scalar, the rest have length `dim`.
inline ErrorBoundTally error_bounds_randomized(const ActivationSpec& spec, int trials, std::uint64_t seed, Index dim = 8,
                                               double spread = 6.0) {
    Rng rng(seed);
    ErrorBoundTally t;
    const double w = spread * spec.lambda();
    for (int k = 0; k < trials; ++k) {
        const Index len = k % 3 == 0 ? 1 : dim;
        Vector u_star(len), u_tilde(len);
        for (Index i = 0; i < len; ++i) {
            u_star[i] = rng.uniform(-w, w);
            u_tilde[i] = rng.uniform(-w, w);
        }
        const ErrorBoundReport r = lemma1_check(spec, u_star, u_tilde, 64);
        ++t.trials;
        t.sign_fail += !r.sign_agreement;
        t.slope_fail += !r.slope_bound;
        t.quadratic_fail += !r.quadratic_bound;
        t.integral_fail += !r.integral_bound;
    }
    return t;
}

inline std::string describe(const ErrorBoundTally& t) {
    return std::to_string(t.trials) + " trials; failures sign=" + std::to_string(t.sign_fail) +
           " slope=" + std::to_string(t.slope_fail) + " quadratic=" + std::to_string(t.quadratic_fail) +
           " integral=" + std::to_string(t.integral_fail);
}

/// Largest relative objective increase between consecutive samples, in
/// units of 1 + |V|.
inline double worst_objective_increase(const Trajectory& traj) {
    double worst = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double prev = traj.samples[i - 1].objective;
        worst = std::max(worst, (traj.samples[i].objective - prev) / (1.0 + std::abs(prev)));
    }
    return worst;
}

inline std::vector<CheckResult> run_validation(const ValidateOptions& opt = {}) {
    std::vector<CheckResult> out;
    const double lambda = 0.025;
    const int bound_trials = opt.quick ? 1000 : 10000;
    ActivationSpec soft = ActivationSpec::soft_threshold(lambda);
    if (opt.soft_alpha) soft = soft.with_alpha(*opt.soft_alpha);
    const std::vector<ActivationSpec> specs{soft, smooth_shrink(lambda), tapered_threshold(lambda)};

    for (const auto& spec : specs) {
        const ConditionReport c = validate_conditions(spec, lambda, 50.0 * lambda, 2001);
        out.push_back({"activation conditions (" + spec.name() + ")", c.all_ok(),
                       "worst violation " + format_double(c.worst_violation)});
    }

    for (const auto& spec : specs) {
        const ErrorBoundTally t = error_bounds_randomized(spec, bound_trials, opt.seed);
        out.push_back({"error-variable properties (" + spec.name() + ")", t.failures() == 0, describe(t)});
    }

    // Monotone objective and critical point on a small sinusoid instance.
    {
        InstanceParams p;
        p.m = 32;
        p.n = 64;
        p.s = 3;
        p.seed = opt.seed;
        const Instance inst = make_instance(p);
        SolverConfig cfg = SolverConfig::for_tau(0.01);
        cfg.residual_tol = 1e-8;
        const ActivationSpec l1 = ActivationSpec::soft_threshold(p.lambda);
        const Trajectory tr = simulate(inst.problem, l1, cfg);
        const double inc = worst_objective_increase(tr);
        out.push_back({"objective non-increasing", tr.converged && inc <= 1e-8,
                       "converged=" + std::string(tr.converged ? "yes" : "no") + " worst increase " + format_double(inc)});
        const auto cp = critical_point_slack(inst.problem, tr.final_state.a);
        out.push_back({"critical point at convergence", cp.within(1e-4),
                       "active " + format_double(cp.active_slack) + " inactive " + format_double(cp.inactive_slack)});

        Rng rng(opt.seed + 1);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            Vector u(inst.problem.n());
            for (Index i = 0; i < u.size(); ++i) u[i] = rng.uniform(-0.2, 0.2);
            const Vector full = udot(inst.problem, l1, u, cfg.tau);
            const PartitionedRhs part = rhs_partitioned(inst.problem, l1, u, cfg.tau);
            const Vector slope = jacobian_diag(l1, u);
            for (std::size_t i = 0; i < part.active.size(); ++i) {
                const Index j = part.active[i];
                worst = std::max(worst, std::abs(part.a_dot_active[static_cast<Index>(i)] - slope[j] * full[j]) / (1.0 + std::abs(full[j])));
            }
            for (std::size_t i = 0; i < part.inactive.size(); ++i) {
                const Index j = part.inactive[i];
                worst = std::max(worst, std::abs(part.u_dot_inactive[static_cast<Index>(i)] - full[j]) / (1.0 + std::abs(full[j])));
            }
        }
        out.push_back({"partitioned dynamics identity", worst <= 1e-12, "worst relative gap " + format_double(worst)});
    }

    // LCA and ISTA reach the same minimizer.
    {
        const int runs = opt.quick ? 2 : 5;
        double worst = 0.0;
        bool all_converged = true;
        for (int k = 0; k < runs; ++k) {
            InstanceParams p;
            p.m = 32;
            p.n = 64;
            p.s = 3;
            p.dictionary = "gaussian";
            p.seed = opt.seed + 100 + static_cast<std::uint64_t>(k);
            const Instance inst = make_instance(p);
            SolverConfig cfg = SolverConfig::for_tau(0.01);
            cfg.residual_tol = 1e-8;
            cfg.max_time = 10.0;
            const Trajectory tr = simulate(inst.problem, ActivationSpec::soft_threshold(p.lambda), cfg);
            const IstaResult is = ista_solve(inst.problem);
            all_converged = all_converged && tr.converged && is.converged;
            worst = std::max(worst, (tr.final_state.a - is.a).lpNorm<Eigen::Infinity>());
        }
        out.push_back({"LCA/ISTA agreement", all_converged && worst <= 1e-3, "max |a_lca - a_ista| " + format_double(worst)});
    }
    return out;
}

}  // namespace lca
