#pragma once

#include "lca/activation.hpp"
#include "lca/model.hpp"
#include "lca/objective.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace lca {

enum class Method { Euler, RK4 };

inline const char* to_string(Method m) { return m == Method::Euler ? "euler" : "rk4"; }

inline Method method_by_name(const std::string& name) {
    if (name == "euler") return Method::Euler;
    if (name == "rk4") return Method::RK4;
    throw InvalidArgument("unknown integrator '" + name + "' (expected euler or rk4)");
}

struct SolverConfig {
    double tau = 0.01;
    double dt = 0.001;
    double max_time = 1.0;
    /// Stop once ||du/dt||_inf drops below this.
    double residual_tol = 1e-6;
    int record_stride = 1;
    Method method = Method::Euler;

    /// dt = tau/10 and max_time = 100 tau.
    static SolverConfig for_tau(double tau) {
        SolverConfig c;
        c.tau = tau;
        c.dt = tau / 10.0;
        c.max_time = 100.0 * tau;
        return c;
    }

    void validate() const {
        detail::require(tau > 0.0, "tau must be positive");
        detail::require(dt > 0.0, "dt must be positive");
        detail::require(dt <= tau, "dt must not exceed tau");
        detail::require(max_time > 0.0, "max_time must be positive");
        detail::require(residual_tol > 0.0, "residual_tol must be positive");
        detail::require(record_stride >= 1, "record_stride must be at least 1");
    }
};

struct LcaState {
    double t = 0.0;
    Vector u;
    Vector a;
    IndexSet active;
};

struct Sample {
    double t;
    Vector u;
    Vector a;
    double objective;
};

struct SwitchEvent {
    double t;
    IndexSet entered;
    IndexSet left;
    /// Active set after the switch.
    IndexSet active;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<SwitchEvent> switch_events;
    IndexSet initial_active;
    bool converged = false;
    LcaState final_state;
    std::size_t steps = 0;
    double final_residual = 0.0;
    /// Largest |f'(u_n)| over active nodes at every integration step.
    double max_slope_seen = 0.0;
};

/// Gamma = {n : |u_n| > lambda}.
inline IndexSet active_set(const Vector& u, double lambda) {
    IndexSet out;
    for (Index i = 0; i < u.size(); ++i)
        if (std::abs(u[i]) > lambda) out.push_back(i);
    return out;
}

/// Right-hand side of the LCA state equation for one problem, with the
/// driving inputs cached.
class LcaSystem {
public:
    LcaSystem(const Problem& problem, const ActivationSpec& spec, double tau)
        : problem_(&problem), spec_(&spec), tau_(tau), drive_(driving_input(problem)) {
        detail::require(tau > 0.0, "tau must be positive");
    }

    const Problem& problem() const { return *problem_; }
    const ActivationSpec& spec() const { return *spec_; }
    double tau() const { return tau_; }
    const Vector& drive() const { return drive_; }

    /// -u - (Phi^T Phi - I) a + Phi^T y, before dividing by tau.
    Vector scaled_rhs(const Vector& u, const Vector& a) const {
        const Matrix& phi = problem_->phi();
        Vector recon = Vector::Zero(phi.rows());
        for (Index j = 0; j < a.size(); ++j)
            if (a[j] != 0.0) recon.noalias() += a[j] * phi.col(j);
        Vector r = drive_ - u + a;
        r.noalias() -= phi.transpose() * recon;
        return r;
    }

    Vector udot(const Vector& u) const { return scaled_rhs(u, apply(*spec_, u)) / tau_; }

private:
    const Problem* problem_;
    const ActivationSpec* spec_;
    double tau_;
    Vector drive_;
};

/// du/dt = (-u - (Phi^T Phi - I) T(u) + Phi^T y) / tau.
inline Vector udot(const Problem& problem, const ActivationSpec& spec, const Vector& u, double tau) {
    detail::require(u.size() == problem.n(), "udot: state length must equal n");
    return LcaSystem(problem, spec, tau).udot(u);
}

struct PartitionedRhs {
    IndexSet active;
    IndexSet inactive;
    /// da/dt on the active set.
    Vector a_dot_active;
    /// du/dt on the inactive set.
    Vector u_dot_inactive;
};

/// Active/inactive split of the dynamics, assembled from the column blocks
/// Phi_Gamma and Phi_Gamma^c rather than from the full interconnection.
inline PartitionedRhs rhs_partitioned(const Problem& problem, const ActivationSpec& spec, const Vector& u, double tau) {
    detail::require(u.size() == problem.n(), "rhs_partitioned: state length must equal n");
    PartitionedRhs out;
    out.active = active_set(u, spec.lambda());
    out.inactive = detail::complement(out.active, problem.n());

    const Matrix phi_a = detail::gather_columns(problem.phi(), out.active);
    const Matrix phi_i = detail::gather_columns(problem.phi(), out.inactive);
    const Vector u_a = detail::gather(u, out.active);
    const Vector u_i = detail::gather(u, out.inactive);
    Vector a_a(u_a.size());
    Vector slope(u_a.size());
    for (Index k = 0; k < u_a.size(); ++k) {
        a_a[k] = spec(u_a[k]);
        slope[k] = spec.f_deriv(u_a[k]);
    }
    const Vector recon = phi_a * a_a;

    const Vector inner = -u_a + a_a - phi_a.transpose() * recon + phi_a.transpose() * problem.y();
    out.a_dot_active = slope.cwiseProduct(inner) / tau;
    out.u_dot_inactive = (-u_i - phi_i.transpose() * recon + phi_i.transpose() * problem.y()) / tau;
    return out;
}

namespace detail {

inline LcaState make_state(double t, Vector u, const ActivationSpec& spec) {
    LcaState s;
    s.t = t;
    s.a = apply(spec, u);
    s.active = active_set(u, spec.lambda());
    s.u = std::move(u);
    return s;
}

/// Integrator increment u_{k+1} - u_k. `k1` is du/dt at u_k.
inline Vector increment(const LcaSystem& sys, const Vector& u, const Vector& k1, double dt, Method method) {
    if (method == Method::Euler) return dt * k1;
    const Vector k2 = sys.udot(u + 0.5 * dt * k1);
    const Vector k3 = sys.udot(u + 0.5 * dt * k2);
    const Vector k4 = sys.udot(u + dt * k3);
    return (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Advances the state by one step of config.dt.
inline LcaState step(const LcaState& state, const Problem& problem, const ActivationSpec& spec,
                     const SolverConfig& config) {
    config.validate();
    detail::require(state.u.size() == problem.n(), "step: state length must equal n");
    const LcaSystem sys(problem, spec, config.tau);
    Vector u = state.u + detail::increment(sys, state.u, sys.udot(state.u), config.dt, config.method);
    if (!u.allFinite()) throw NonFiniteState(state.t + config.dt);
    return detail::make_state(state.t + config.dt, std::move(u), spec);
}

/// Integrates from u0 until ||du/dt||_inf < residual_tol or max_time.
///
/// Samples are kept every record_stride steps, plus the initial and final
/// states. A switch event is logged whenever the active set differs between
/// consecutive steps; a node that crosses and returns inside one step is
/// not seen.
inline Trajectory simulate(const Problem& problem, const ActivationSpec& spec, const SolverConfig& config,
                           const Vector& u0) {
    config.validate();
    detail::require(u0.size() == problem.n(), "simulate: initial state length must equal n");
    if (!u0.allFinite()) throw NonFiniteState(0.0);

    const LcaSystem sys(problem, spec, config.tau);
    Trajectory traj;
    LcaState state = detail::make_state(0.0, u0, spec);
    traj.initial_active = state.active;

    auto record = [&](const LcaState& s) {
        traj.samples.push_back(Sample{s.t, s.u, s.a, objective(problem, spec, s.a)});
    };
    auto track_slope = [&](const LcaState& s) {
        for (Index j : s.active) traj.max_slope_seen = std::max(traj.max_slope_seen, std::abs(spec.f_deriv(s.u[j])));
    };

    record(state);
    track_slope(state);
    Vector k1 = sys.udot(state.u);
    double residual = k1.lpNorm<Eigen::Infinity>();
    const auto max_steps = static_cast<std::size_t>(std::ceil(config.max_time / config.dt - 1e-9));

    std::size_t k = 0;
    while (!(residual < config.residual_tol) && k < max_steps) {
        Vector u = state.u + detail::increment(sys, state.u, k1, config.dt, config.method);
        ++k;
        const double t = static_cast<double>(k) * config.dt;
        if (!u.allFinite()) throw NonFiniteState(t);
        LcaState next = detail::make_state(t, std::move(u), spec);

        if (next.active != state.active) {
            traj.switch_events.push_back(SwitchEvent{t, detail::set_difference(next.active, state.active),
                                                     detail::set_difference(state.active, next.active), next.active});
        }
        state = std::move(next);
        track_slope(state);
        k1 = sys.udot(state.u);
        residual = k1.lpNorm<Eigen::Infinity>();
        if (k % static_cast<std::size_t>(config.record_stride) == 0) record(state);
    }
    if (traj.samples.back().t != state.t) record(state);

    traj.converged = residual < config.residual_tol;
    traj.final_residual = residual;
    traj.steps = k;
    traj.final_state = std::move(state);
    return traj;
}

inline Trajectory simulate(const Problem& problem, const ActivationSpec& spec, const SolverConfig& config) {
    return simulate(problem, spec, config, Vector::Zero(problem.n()));
}

/// True when every active-node slope seen along the run is within alpha.
inline bool alpha_respected(const Trajectory& traj, const ActivationSpec& spec) {
    return traj.max_slope_seen <= spec.alpha() * (1.0 + 1e-12);
}

}  // namespace lca
