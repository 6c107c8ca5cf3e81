#pragma once

#include "lca/types.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>

namespace lca {

enum class ActivationKind { SoftThreshold, Generic };

/// Thresholding activation T_lambda: zero for |u| <= lambda, f(u) above.
///
/// `f` must be odd, vanish at lambda, be strictly increasing and satisfy
/// f(u) <= u for u >= lambda. `alpha` bounds |f'| over the states visited.
/// The soft threshold f(u) = u - lambda*sign(u) is evaluated in closed form;
/// generic activations go through the stored callables.
class ActivationSpec {
public:
    using ScalarFn = std::function<double(double)>;

    static ActivationSpec soft_threshold(double lambda) {
        detail::require(lambda > 0.0, "lambda must be positive");
        ActivationSpec s;
        s.kind_ = ActivationKind::SoftThreshold;
        s.lambda_ = lambda;
        s.alpha_ = 1.0;
        s.name_ = "soft";
        return s;
    }

    /// `f_inverse` may be empty, in which case inversion uses bisection.
    static ActivationSpec generic(double lambda, ScalarFn f, ScalarFn f_deriv, double alpha, ScalarFn f_inverse = {},
                                  std::string name = "generic") {
        detail::require(lambda > 0.0, "lambda must be positive");
        detail::require(alpha > 0.0, "alpha must be positive");
        detail::require(static_cast<bool>(f) && static_cast<bool>(f_deriv), "generic activation needs f and f'");
        ActivationSpec s;
        s.kind_ = ActivationKind::Generic;
        s.lambda_ = lambda;
        s.alpha_ = alpha;
        s.f_ = std::move(f);
        s.f_deriv_ = std::move(f_deriv);
        s.f_inverse_ = std::move(f_inverse);
        s.name_ = std::move(name);
        return s;
    }

    /// Copy with a different declared derivative bound.
    ActivationSpec with_alpha(double alpha) const {
        detail::require(alpha > 0.0, "alpha must be positive");
        ActivationSpec s = *this;
        s.alpha_ = alpha;
        return s;
    }

    ActivationKind kind() const noexcept { return kind_; }
    bool is_soft() const noexcept { return kind_ == ActivationKind::SoftThreshold; }
    double lambda() const noexcept { return lambda_; }
    double alpha() const noexcept { return alpha_; }
    const std::string& name() const noexcept { return name_; }
    bool has_closed_form_inverse() const noexcept { return is_soft() || static_cast<bool>(f_inverse_); }

    /// Above-threshold branch f, meaningful for |u| >= lambda.
    double f(double u) const { return is_soft() ? u - lambda_ * detail::sign(u) : f_(u); }

    double f_deriv(double u) const { return is_soft() ? 1.0 : f_deriv_(u); }

    /// Closed-form inverse of f; only valid when has_closed_form_inverse().
    double f_inverse(double a) const { return is_soft() ? a + lambda_ * detail::sign(a) : f_inverse_(a); }

    /// T_lambda(u). |u| == lambda is inactive.
    double operator()(double u) const { return std::abs(u) > lambda_ ? f(u) : 0.0; }

    /// dT_lambda/du: zero on the inactive set, f'(u) on the active set.
    double slope(double u) const { return std::abs(u) > lambda_ ? f_deriv(u) : 0.0; }

private:
    ActivationSpec() = default;

    ActivationKind kind_ = ActivationKind::SoftThreshold;
    double lambda_ = 1.0;
    double alpha_ = 1.0;
    ScalarFn f_;
    ScalarFn f_deriv_;
    ScalarFn f_inverse_;
    std::string name_;
};

/// Smooth shrinkage f(u) = sign(u) (x + g tanh x) / (1 + g), x = |u| - lambda.
/// Slope lies in (1/(1+g), 1], so alpha = 1.
inline ActivationSpec smooth_shrink(double lambda, double gamma = 1.0) {
    detail::require(gamma >= 0.0, "gamma must be nonnegative");
    auto f = [lambda, gamma](double u) {
        const double x = std::abs(u) - lambda;
        return detail::sign(u) * (x + gamma * std::tanh(x)) / (1.0 + gamma);
    };
    auto df = [lambda, gamma](double u) {
        const double c = std::cosh(std::abs(u) - lambda);
        return (1.0 + gamma / (c * c)) / (1.0 + gamma);
    };
    return ActivationSpec::generic(lambda, f, df, 1.0, {}, "smooth");
}

/// f(u) = sign(u) (x + lambda (1 - exp(-x / lambda))), x = |u| - lambda.
/// Shrinks less than the soft threshold far from the threshold; the slope
/// falls from 2 at the threshold towards 1, so alpha = 2.
inline ActivationSpec tapered_threshold(double lambda) {
    auto f = [lambda](double u) {
        const double x = std::abs(u) - lambda;
        return detail::sign(u) * (x + lambda * (1.0 - std::exp(-x / lambda)));
    };
    auto df = [lambda](double u) { return 1.0 + std::exp(-(std::abs(u) - lambda) / lambda); };
    return ActivationSpec::generic(lambda, f, df, 2.0, {}, "tapered");
}

/// Looks up an activation by CLI name: soft, smooth, tapered.
inline ActivationSpec activation_by_name(const std::string& name, double lambda) {
    if (name == "soft") return ActivationSpec::soft_threshold(lambda);
    if (name == "smooth") return smooth_shrink(lambda);
    if (name == "tapered") return tapered_threshold(lambda);
    throw InvalidArgument("unknown activation '" + name + "' (expected soft, smooth or tapered)");
}

inline Vector apply(const ActivationSpec& spec, const Vector& u) {
    Vector a(u.size());
    if (spec.is_soft()) {
        const double lam = spec.lambda();
        for (Index i = 0; i < u.size(); ++i) {
            const double x = u[i];
            a[i] = x > lam ? x - lam : (x < -lam ? x + lam : 0.0);
        }
    } else {
        for (Index i = 0; i < u.size(); ++i) a[i] = spec(u[i]);
    }
    return a;
}

inline Vector jacobian_diag(const ActivationSpec& spec, const Vector& u) {
    Vector d(u.size());
    for (Index i = 0; i < u.size(); ++i) d[i] = spec.slope(u[i]);
    return d;
}

struct ConditionReport {
    bool odd_symmetry_ok = true;
    bool boundary_zero_ok = true;
    bool monotone_ok = true;
    bool dominated_ok = true;
    double worst_violation = 0.0;
    int samples_checked = 0;
    double tolerance = 0.0;

    bool all_ok() const { return odd_symmetry_ok && boundary_zero_ok && monotone_ok && dominated_ok; }
};

/// Samples f on [lo, hi] and its mirror image and checks oddness, f(lambda)=0,
/// strict monotonicity and f(u) <= u.
inline ConditionReport validate_conditions(const ActivationSpec& spec, double lo, double hi, int num_samples) {
    const double lam = spec.lambda();
    detail::require(lo >= lam, "sample range must start at or above lambda");
    detail::require(hi > lo, "sample range must be nonempty");
    detail::require(num_samples >= 2, "need at least two samples");

    ConditionReport r;
    r.tolerance = 1e-12;
    auto tol_at = [&](double u) { return r.tolerance * (1.0 + std::abs(u)); };
    auto note = [&](bool& flag, double violation, double u) {
        if (violation > tol_at(u)) flag = false;
        r.worst_violation = std::max(r.worst_violation, violation);
    };

    note(r.boundary_zero_ok, std::abs(spec.f(lam)), lam);
    note(r.boundary_zero_ok, std::abs(spec.f(-lam)), lam);

    double prev_pos = 0.0;
    double prev_neg = 0.0;
    for (int i = 0; i < num_samples; ++i) {
        const double u = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(num_samples - 1);
        const double fp = spec.f(u);
        const double fn = spec.f(-u);
        note(r.odd_symmetry_ok, std::abs(fp + fn), u);
        note(r.dominated_ok, std::max(0.0, fp - u), u);
        if (u > lam) {
            // Derivative must be positive on the interior of the domain.
            const double d = std::min(spec.f_deriv(u), spec.f_deriv(-u));
            if (!(d > 0.0)) r.monotone_ok = false;
            r.worst_violation = std::max(r.worst_violation, std::max(0.0, -d));
        }
        if (i > 0) {
            const double inc_pos = fp - prev_pos;
            const double inc_neg = prev_neg - fn;
            if (!(inc_pos > 0.0) || !(inc_neg > 0.0)) r.monotone_ok = false;
            r.worst_violation = std::max({r.worst_violation, -inc_pos, -inc_neg});
        }
        prev_pos = fp;
        prev_neg = fn;
        r.samples_checked += 2;
    }
    return r;
}

/// Solves f(u) = a for u in the active domain, with sign(u) = sign(a).
/// Uses the closed form when available, otherwise bisection on [lambda, hi]
/// with a geometrically expanded bracket, to 1e-12 in u.
inline double invert(const ActivationSpec& spec, double a) {
    detail::require(a != 0.0, "cannot invert the activation at a = 0");
    if (spec.has_closed_form_inverse()) return spec.f_inverse(a);

    const double target = std::abs(a);
    const double lam = spec.lambda();
    double lo = lam;
    double width = std::max(target, lam);
    double hi = lam + width;
    int expansions = 0;
    while (!(spec.f(hi) >= target)) {
        lo = hi;
        width *= 2.0;
        hi = lam + width;
        if (++expansions > 200 || !std::isfinite(hi)) throw InversionFailure("failed to bracket f(u) = " + std::to_string(a));
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (spec.f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return detail::sign(a) * 0.5 * (lo + hi);
}

/// lambda * C'(a) = f^{-1}(a) - a, for a != 0.
inline double cost_gradient(const ActivationSpec& spec, double a) {
    if (spec.is_soft()) {
        detail::require(a != 0.0, "cost_gradient: a must be nonzero");
        return spec.lambda() * detail::sign(a);
    }
    return invert(spec, a) - a;
}

namespace detail {

template <class F>
double adaptive_trapezoid(const F& g, double a, double b, double ga, double gb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    const double left = 0.5 * (m - a) * (ga + gm);
    const double right = 0.5 * (b - m) * (gm + gb);
    const double refined = left + right;
    if (depth <= 0 || std::abs(refined - whole) <= 3.0 * tol) return refined + (refined - whole) / 3.0;
    return adaptive_trapezoid(g, a, m, ga, gm, left, 0.5 * tol, depth - 1) +
           adaptive_trapezoid(g, m, b, gm, gb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Penalty C(a) with C(0) = 0. |a| for the soft threshold; otherwise the
/// integral of cost_gradient / lambda from 0 to |a| by adaptive trapezoid
/// quadrature (target accuracy 1e-9).
inline double penalty(const ActivationSpec& spec, double a) {
    if (a == 0.0) return 0.0;
    if (spec.is_soft()) return std::abs(a);
    const double lam = spec.lambda();
    // f^{-1}(0+) = lambda, so the integrand tends to 1 at the origin.
    auto g = [&](double s) { return s > 0.0 ? cost_gradient(spec, s) / lam : 1.0; };
    const double b = std::abs(a);
    const double g0 = g(0.0);
    const double gb = g(b);
    return detail::adaptive_trapezoid(g, 0.0, b, g0, gb, 0.5 * b * (g0 + gb), 1e-9, 40);
}

}  // namespace lca
