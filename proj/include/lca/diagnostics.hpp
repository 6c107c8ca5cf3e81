#pragma once

#include "lca/activation.hpp"
#include "lca/dynamics.hpp"
#include "lca/model.hpp"
#include "lca/objective.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>
#include <vector>

namespace lca {

// ---------------------------------------------------------------------------
// Critical points and fixed points

struct CriticalPointReport {
    /// max over a_n != 0 of |rho_n - lambda sign(a_n)|, rho = Phi^T (y - Phi a).
    double active_slack = 0.0;
    /// max(0, max over a_n == 0 of |rho_n| - lambda).
    double inactive_slack = 0.0;
    IndexSet active_set;

    bool within(double tol) const { return active_slack <= tol && inactive_slack <= tol; }
};

/// Subgradient optimality slack of `a` for the l1-penalized objective.
inline CriticalPointReport critical_point_slack(const Problem& problem, const Vector& a) {
    detail::require(a.size() == problem.n(), "critical_point_slack: coefficient length must equal n");
    const Vector rho = problem.phi().transpose() * (problem.y() - problem.phi() * a);
    const double lam = problem.lambda();
    CriticalPointReport r;
    for (Index i = 0; i < a.size(); ++i) {
        if (a[i] != 0.0) {
            r.active_set.push_back(i);
            r.active_slack = std::max(r.active_slack, std::abs(rho[i] - lam * detail::sign(a[i])));
        } else {
            r.inactive_slack = std::max(r.inactive_slack, std::abs(rho[i]) - lam);
        }
    }
    return r;
}

/// Throws UnsupportedCost unless `spec` is the soft threshold.
inline CriticalPointReport critical_point_slack(const Problem& problem, const ActivationSpec& spec, const Vector& a) {
    if (!spec.is_soft())
        throw UnsupportedCost("critical-point certification is only available for the l1 cost (soft threshold)");
    return critical_point_slack(problem, a);
}

/// ||tau * du/dt||_inf, i.e. the size of the right-hand side of the state equation.
inline double fixed_point_residual(const Problem& problem, const ActivationSpec& spec, const Vector& u, double tau) {
    return (tau * udot(problem, spec, u, tau)).lpNorm<Eigen::Infinity>();
}

/// u* = a* - Phi^T Phi a* + Phi^T y, the state whose output is a*.
inline Vector map_output_to_state(const Problem& problem, const Vector& a_star) {
    detail::require(a_star.size() == problem.n(), "map_output_to_state: coefficient length must equal n");
    const Matrix& phi = problem.phi();
    return a_star - phi.transpose() * (phi * a_star) + phi.transpose() * problem.y();
}

// ---------------------------------------------------------------------------
// Switching

struct SwitchCount {
    std::size_t count = 0;
    std::vector<SwitchEvent> events;
};

inline SwitchCount count_switches(const Trajectory& traj) { return SwitchCount{traj.switch_events.size(), traj.switch_events}; }

// ---------------------------------------------------------------------------
// Isometry constant and rate

/// delta(S) = max(sigma_max^2 - 1, 1 - sigma_min^2) of the column block Phi_S.
///
/// Singular values come from the eigenvalues of the |S| x |S| Gram matrix.
/// |S| > m gives sigma_min = 0 and hence delta >= 1.
inline double estimate_delta(const Dictionary& dictionary, const IndexSet& support) {
    if (support.empty()) throw EmptySupport();
    for (Index j : support) detail::require(j >= 0 && j < dictionary.n(), "estimate_delta: support index out of range");
    const Matrix sub = detail::gather_columns(dictionary.matrix(), support);
    const Matrix gram = sub.transpose() * sub;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const Vector& ev = eig.eigenvalues();
    const double lo = std::max(0.0, ev.minCoeff());
    const double hi = ev.maxCoeff();
    return std::max({hi - 1.0, 1.0 - lo, 0.0});
}

struct DeltaPair {
    double delta_final = 0.0;
    double delta_max = 0.0;
};

/// delta on the final support, and the worst delta over every active set the
/// trajectory visited, each joined with the final support.
inline DeltaPair delta_over_trajectory(const Dictionary& dictionary, const Trajectory& traj, const IndexSet& gamma_star) {
    detail::require(!traj.samples.empty(), "delta_over_trajectory: empty trajectory");
    DeltaPair out;
    out.delta_final = estimate_delta(dictionary, gamma_star);
    out.delta_max = out.delta_final;
    auto visit = [&](const IndexSet& gamma) {
        const IndexSet joined = detail::set_union(gamma, gamma_star);
        if (!joined.empty()) out.delta_max = std::max(out.delta_max, estimate_delta(dictionary, joined));
    };
    visit(traj.initial_active);
    for (const auto& ev : traj.switch_events) visit(ev.active);
    return out;
}

struct RateEstimate {
    double alpha = 1.0;
    double delta = 0.0;
    double tau = 1.0;
    /// (1 - alpha delta) / tau
    double speed = 1.0;
    /// alpha * delta < 1
    bool valid = true;
};

inline RateEstimate rate_bound(double alpha, double delta, double tau) {
    detail::require(alpha > 0.0, "alpha must be positive");
    detail::require(delta >= 0.0, "delta must be nonnegative");
    detail::require(tau > 0.0, "tau must be positive");
    return RateEstimate{alpha, delta, tau, (1.0 - alpha * delta) / tau, alpha * delta < 1.0};
}

// ---------------------------------------------------------------------------
// Decay towards a fixed point

struct DecayPoint {
    double t;
    double value;
};

/// ||u(t) - u*|| / ||u(0) - u*|| at every recorded sample.
inline std::vector<DecayPoint> decay_curve(const Trajectory& traj, const Vector& u_star) {
    detail::require(!traj.samples.empty(), "decay_curve: empty trajectory");
    detail::require(u_star.size() == traj.samples.front().u.size(), "decay_curve: u_star has the wrong length");
    const double start = (traj.samples.front().u - u_star).norm();
    if (!(start >= 1e-14)) throw DegenerateStart();
    std::vector<DecayPoint> out;
    out.reserve(traj.samples.size());
    for (const auto& s : traj.samples) out.push_back(DecayPoint{s.t, (s.u - u_star).norm() / start});
    out.front().value = 1.0;
    return out;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log(value) against t over points with
/// t >= t_from and value >= floor.
inline SlopeFit fit_log_slope(const std::vector<DecayPoint>& curve, double t_from, double floor) {
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t n = 0;
    for (const auto& p : curve) {
        if (p.t < t_from || !(p.value >= floor)) continue;
        const double ly = std::log(p.value);
        st += p.t;
        sy += ly;
        stt += p.t * p.t;
        sty += p.t * ly;
        ++n;
    }
    if (n < 3) throw InvalidArgument("fit_log_slope: fewer than three points in the fitting window");
    const double dn = static_cast<double>(n);
    const double denom = dn * stt - st * st;
    if (!(std::abs(denom) > 0.0)) throw InvalidArgument("fit_log_slope: degenerate time window");
    SlopeFit f;
    f.slope = (dn * sty - st * sy) / denom;
    f.intercept = (sy - f.slope * st) / dn;
    f.points = n;
    return f;
}

// ---------------------------------------------------------------------------
// Properties of the error variables (u~, a~) around a fixed point

struct ErrorVariables {
    Vector u_tilde;
    Vector a_tilde;
};

inline ErrorVariables error_variables(const ActivationSpec& spec, const Vector& u_star, const Vector& u_tilde) {
    detail::require(u_star.size() == u_tilde.size(), "error_variables: length mismatch");
    Vector a_tilde(u_tilde.size());
    for (Index i = 0; i < u_tilde.size(); ++i) a_tilde[i] = spec(u_tilde[i] + u_star[i]) - spec(u_star[i]);
    return ErrorVariables{u_tilde, std::move(a_tilde)};
}

struct ErrorBoundReport {
    /// sign(a~_n) == sign(u~_n) or a~_n == 0
    bool sign_agreement = true;
    /// |a~_n| <= alpha |u~_n|
    bool slope_bound = true;
    /// a~'a~ <= alpha u~'a~ <= alpha^2 u~'u~ on every index subset
    bool quadratic_bound = true;
    /// sum_n int_0^{u~_n} g_n <= u~'a~
    bool integral_bound = true;

    bool all() const { return sign_agreement && slope_bound && quadratic_bound && integral_bound; }
};

/// Checks the four inequalities relating u~ = u - u* and a~ = T(u) - T(u*).
///
/// The subset form of the quadratic bound is checked term by term, which
/// implies it for every index subset, and also on the full sums.
inline ErrorBoundReport lemma1_check(const ActivationSpec& spec, const Vector& u_star, const Vector& u_tilde,
                                     int panels = 256) {
    const ErrorVariables ev = error_variables(spec, u_star, u_tilde);
    const Vector& ut = ev.u_tilde;
    const Vector& at = ev.a_tilde;
    const double alpha = spec.alpha();
    constexpr double tol = 1e-12;
    ErrorBoundReport r;

    double aa = 0.0, ua = 0.0, uu = 0.0, integral = 0.0;
    for (Index i = 0; i < ut.size(); ++i) {
        if (at[i] != 0.0 && detail::sign(at[i]) != detail::sign(ut[i])) r.sign_agreement = false;
        if (std::abs(at[i]) > alpha * std::abs(ut[i]) + tol) r.slope_bound = false;

        const double t_aa = at[i] * at[i];
        const double t_ua = ut[i] * at[i];
        const double t_uu = ut[i] * ut[i];
        if (t_aa > alpha * t_ua + tol || alpha * t_ua > alpha * alpha * t_uu + tol) r.quadratic_bound = false;
        aa += t_aa;
        ua += t_ua;
        uu += t_uu;

        // Composite trapezoid of g(s) = T(s + u*) - T(u*) over [0, u~].
        const double base = spec(u_star[i]);
        const double h = ut[i] / panels;
        double acc = 0.0;
        for (int k = 0; k <= panels; ++k) {
            const double g = spec(k * h + u_star[i]) - base;
            acc += (k == 0 || k == panels) ? 0.5 * g : g;
        }
        integral += acc * h;
    }
    if (aa > alpha * ua + tol || alpha * ua > alpha * alpha * uu + tol) r.quadratic_bound = false;
    if (integral > ua + 1e-9) r.integral_bound = false;
    return r;
}

}  // namespace lca
