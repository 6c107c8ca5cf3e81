#pragma once

// Reproducible experiment drivers shared by the command-line tool and the
// acceptance suite. Every routine is a pure function of its parameters.

#include "lca/activation.hpp"
#include "lca/baseline.hpp"
#include "lca/diagnostics.hpp"
#include "lca/dynamics.hpp"
#include "lca/model.hpp"
#include "lca/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lca {

struct InstanceParams {
    Index m = 256;
    Index n = 512;
    Index s = 5;
    double noise_std = 0.0062;
    double lambda = 0.025;
    std::uint64_t seed = 1;
    /// sinusoid (identity + DCT, n = 2m), identity (n = m) or gaussian.
    std::string dictionary = "sinusoid";
};

/// Gaussian matrix with normalized columns, from its own seeded stream.
inline Dictionary gaussian_dictionary(Index m, Index n, std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    Matrix phi(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) phi(i, j) = rng.normal();
    return normalize_columns(phi);
}

inline Dictionary make_dictionary(const std::string& kind, Index m, Index n, std::uint64_t seed) {
    if (kind == "sinusoid") {
        detail::require(n == 2 * m, "sinusoid dictionary requires n = 2m");
        return build_canonical_sinusoid_dictionary(m);
    }
    if (kind == "identity") {
        detail::require(n == m, "identity dictionary requires n = m");
        return Dictionary(Matrix::Identity(m, m));
    }
    if (kind == "gaussian") return gaussian_dictionary(m, n, seed);
    throw InvalidArgument("unknown dictionary '" + kind + "' (expected sinusoid, identity or gaussian)");
}

inline Instance make_instance(const InstanceParams& p) {
    detail::require(p.m >= 1 && p.n >= 1 && p.s >= 1, "m, n and s must be positive");
    detail::require(p.lambda > 0.0, "lambda must be positive");
    return generate_instance(p.seed, make_dictionary(p.dictionary, p.m, p.n, p.seed), p.s, p.noise_std, p.lambda);
}

// ---------------------------------------------------------------------------

struct ReferencePoint {
    Vector a_star;
    Vector u_star;
    /// ||a_lca - a_ista||_inf between the two candidate solutions.
    double candidate_gap = 0.0;
    double residual = 0.0;
    std::string source;
};

/// Reference fixed point: map_output_to_state of whichever of a long LCA
/// run and a tight ISTA solve has the smaller fixed-point residual.
inline ReferencePoint reference_fixed_point(const Problem& problem, const ActivationSpec& spec, SolverConfig config,
                                            double tol = 1e-10) {
    config.residual_tol = tol;
    config.max_time = std::max(config.max_time, 1000.0 * config.tau);
    config.record_stride = 1 << 30;
    const Trajectory long_run = simulate(problem, spec, config);
    const Vector u_lca = map_output_to_state(problem, long_run.final_state.a);
    const double r_lca = fixed_point_residual(problem, spec, u_lca, config.tau);

    ReferencePoint ref;
    if (spec.is_soft()) {
        IstaConfig ic;
        ic.tol = tol;
        ic.max_iters = 1000000;
        const IstaResult ista = ista_solve(problem, ic);
        const Vector u_ista = map_output_to_state(problem, ista.a);
        const double r_ista = fixed_point_residual(problem, spec, u_ista, config.tau);
        ref.candidate_gap = (ista.a - long_run.final_state.a).lpNorm<Eigen::Infinity>();
        if (r_ista < r_lca) {
            ref.a_star = ista.a;
            ref.u_star = u_ista;
            ref.residual = r_ista;
            ref.source = "ista";
            return ref;
        }
    }
    ref.a_star = long_run.final_state.a;
    ref.u_star = u_lca;
    ref.residual = r_lca;
    ref.source = "lca";
    return ref;
}

// ---------------------------------------------------------------------------
// Node trajectories, solution comparison and multi-start convergence

struct NodeTrace {
    Index node;
    bool active_at_solution;
};

struct ComparisonRow {
    Index index;
    double a0;
    double lca;
    double ista;
};

struct StartTrace {
    int start;
    double t;
    double u_first;
    double u_second;
};

struct ConvergenceResult {
    Instance instance;
    Trajectory main_run;
    IstaResult ista;
    std::vector<NodeTrace> nodes;
    std::vector<ComparisonRow> comparison;
    Index plane_first = 0;
    Index plane_second = 0;
    std::vector<StartTrace> starts;
    std::vector<Vector> start_finals;
    std::vector<bool> start_converged;
    /// Largest pairwise l_inf distance between multi-start final states.
    double final_spread = 0.0;
};

inline double max_pairwise_distance(const std::vector<Vector>& states) {
    double worst = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j)
            worst = std::max(worst, (states[i] - states[j]).lpNorm<Eigen::Infinity>());
    return worst;
}

inline std::vector<Index> sample_without_replacement(Rng& rng, std::vector<Index> pool, std::size_t k) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// `init_scale` is the half-width of the uniform box random starts are drawn from.
inline ConvergenceResult run_convergence_experiment(const InstanceParams& params, const ActivationSpec& spec,
                                                    const SolverConfig& config, int num_nodes, int num_starts,
                                                    double init_scale = 1.0) {
    ConvergenceResult r{make_instance(params), {}, {}, {}, {}, 0, 0, {}, {}, {}, 0.0};
    const Problem& problem = r.instance.problem;
    r.main_run = simulate(problem, spec, config);
    IstaConfig ic;
    ic.tol = 1e-10;
    r.ista = ista_solve(problem, ic);

    const IndexSet final_active = r.main_run.final_state.active;
    const IndexSet final_inactive = detail::complement(final_active, problem.n());
    Rng rng(params.seed * 7919 + 17);
    const auto half = static_cast<std::size_t>(num_nodes / 2);
    const auto pick_active = sample_without_replacement(rng, final_active, half);
    const auto pick_inactive =
        sample_without_replacement(rng, final_inactive, static_cast<std::size_t>(num_nodes) - pick_active.size());
    for (Index j : pick_active) r.nodes.push_back({j, true});
    for (Index j : pick_inactive) r.nodes.push_back({j, false});

    const IndexSet joint = detail::set_union(
        detail::set_union(r.instance.truth.support, detail::nonzeros(r.main_run.final_state.a)), detail::nonzeros(r.ista.a));
    for (Index j : joint) r.comparison.push_back({j, r.instance.truth.a0[j], r.main_run.final_state.a[j], r.ista.a[j]});

    // Two nodes of the final active set span the plane of the multi-start plot.
    std::vector<Index> plane = sample_without_replacement(rng, final_active, 2);
    for (Index j : final_inactive) {
        if (plane.size() >= 2) break;
        plane.push_back(j);
    }
    std::sort(plane.begin(), plane.end());
    r.plane_first = plane.at(0);
    r.plane_second = plane.at(1);

    for (int s = 0; s < num_starts; ++s) {
        Vector u0(problem.n());
        for (Index i = 0; i < u0.size(); ++i) u0[i] = rng.uniform(-init_scale, init_scale);
        const Trajectory tr = simulate(problem, spec, config, u0);
        for (const auto& smp : tr.samples) r.starts.push_back({s, smp.t, smp.u[r.plane_first], smp.u[r.plane_second]});
        r.start_finals.push_back(tr.final_state.u);
        r.start_converged.push_back(tr.converged);
    }
    r.final_spread = max_pairwise_distance(r.start_finals);
    return r;
}

// ---------------------------------------------------------------------------
// Switch counts over many seeded trials

struct SwitchTrial {
    std::uint64_t seed;
    std::size_t switches;
    bool converged;
    double final_time;
    bool support_recovered;
};

struct HistogramBin {
    std::size_t lower;
    std::size_t count;
    double percentage;
};

/// Runs one trial per seed (first_seed, first_seed+1, ...) on a worker pool.
/// Results are returned in seed order regardless of scheduling.
inline std::vector<SwitchTrial> run_switch_trials(InstanceParams params, const ActivationSpec& spec,
                                                  const SolverConfig& config, int trials, unsigned threads = 0) {
    detail::require(trials >= 1, "trials must be positive");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(trials));
    const std::uint64_t first_seed = params.seed;
    std::vector<SwitchTrial> out(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (int i = next++; i < trials; i = next++) {
            try {
                InstanceParams p = params;
                p.seed = first_seed + static_cast<std::uint64_t>(i);
                const Instance inst = make_instance(p);
                const ActivationSpec trial_spec =
                    spec.is_soft() ? ActivationSpec::soft_threshold(p.lambda) : spec;
                const Trajectory tr = simulate(inst.problem, trial_spec, config);
                out[static_cast<std::size_t>(i)] = SwitchTrial{p.seed, count_switches(tr).count, tr.converged,
                                                               tr.final_state.t,
                                                               detail::nonzeros(tr.final_state.a) == inst.truth.support};
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = trials;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// Histogram of switch counts with bins [lower, lower + width), from the
/// smallest to the largest observed count.
inline std::vector<HistogramBin> switch_histogram(const std::vector<SwitchTrial>& trials, std::size_t width = 1) {
    detail::require(width >= 1, "bin width must be positive");
    detail::require(!trials.empty(), "no trials");
    std::map<std::size_t, std::size_t> counts;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& t : trials) {
        const std::size_t bin = t.switches / width * width;
        ++counts[bin];
        lo = std::min(lo, bin);
        hi = std::max(hi, bin);
    }
    std::vector<HistogramBin> out;
    for (std::size_t b = lo; b <= hi; b += width) {
        const std::size_t c = counts.count(b) ? counts[b] : 0;
        out.push_back({b, c, 100.0 * static_cast<double>(c) / static_cast<double>(trials.size())});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exponential decay rate

struct RateRow {
    double t;
    double normalized_error;
    double bound_final;
    double bound_max;
};

struct RateResult {
    Instance instance;
    Trajectory trajectory;
    ReferencePoint reference;
    IndexSet final_support;
    DeltaPair deltas;
    RateEstimate rate_final;
    RateEstimate rate_max;
    std::vector<RateRow> rows;
    SlopeFit fit;
    double fit_from = 0.0;
    /// Slopes of the two exponential bounds, -(1 - alpha delta)/tau.
    double slope_final = 0.0;
    double slope_max = 0.0;
    bool below_final_bound = true;
    bool below_max_bound = true;
};

/// Decay of ||u(t) - u*|| and the two exponential bounds built from delta on
/// the final support and on the worst visited support. The log-slope is
/// fitted from the last switch onwards, above `floor`.
inline RateResult run_rate_experiment(const InstanceParams& params, const ActivationSpec& spec, SolverConfig config,
                                      double floor = 1e-8) {
    config.record_stride = 1;
    RateResult r{make_instance(params), {}, {}, {}, {}, {}, {}, {}, {}, 0.0, 0.0, 0.0, true, true};
    const Problem& problem = r.instance.problem;
    r.trajectory = simulate(problem, spec, config);
    r.reference = reference_fixed_point(problem, spec, config);
    r.final_support = active_set(r.reference.u_star, spec.lambda());
    if (r.final_support.empty()) throw InvalidArgument("rate experiment: the solution is zero, lower lambda");
    r.deltas = delta_over_trajectory(problem.dictionary(), r.trajectory, r.final_support);
    r.rate_final = rate_bound(spec.alpha(), r.deltas.delta_final, config.tau);
    r.rate_max = rate_bound(spec.alpha(), r.deltas.delta_max, config.tau);
    r.slope_final = -r.rate_final.speed;
    r.slope_max = -r.rate_max.speed;

    const auto curve = decay_curve(r.trajectory, r.reference.u_star);
    for (const auto& p : curve) {
        RateRow row{p.t, p.value, std::exp(r.slope_final * p.t), std::exp(r.slope_max * p.t)};
        if (row.normalized_error > row.bound_final * (1.0 + 1e-9)) r.below_final_bound = false;
        if (row.normalized_error > row.bound_max * (1.0 + 1e-9)) r.below_max_bound = false;
        r.rows.push_back(row);
    }
    r.fit_from = r.trajectory.switch_events.empty() ? 0.0 : r.trajectory.switch_events.back().t;
    r.fit = fit_log_slope(curve, r.fit_from, floor);
    return r;
}

}  // namespace lca
