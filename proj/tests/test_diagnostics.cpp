#include "lca/baseline.hpp"
#include "lca/diagnostics.hpp"
#include "lca/experiments.hpp"
#include "lca/validate.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace lca;

namespace {

Problem orthonormal_problem(const Vector& y, double lam) {
    // Rotation by 30 degrees: orthonormal but not the identity.
    Matrix q(2, 2);
    const double c = std::cos(0.5235987755982988), s = std::sin(0.5235987755982988);
    q << c, -s, s, c;
    return Problem(Dictionary(q), y, lam);
}

}  // namespace

TEST(Objective, ZeroCoefficients) {
    const Instance inst = generate_instance(1, 8, 16, 2, 0.01, 0.05);
    const auto spec = ActivationSpec::soft_threshold(0.05);
    EXPECT_DOUBLE_EQ(objective(inst.problem, spec, Vector::Zero(16)), 0.5 * inst.problem.y().squaredNorm());
    EXPECT_DOUBLE_EQ(objective(inst.problem, tapered_threshold(0.05), Vector::Zero(16)), 0.5 * inst.problem.y().squaredNorm());
}

TEST(Objective, ExactFitIsPenaltyOnly) {
    Vector y(2);
    y << 1, 0;
    const Problem p(Dictionary(Matrix::Identity(2, 2)), y, 0.1);
    EXPECT_NEAR(objective(p, ActivationSpec::soft_threshold(0.1), y), 0.1, 1e-15);
}

TEST(Objective, LcaMatchesIstaOnDefaultInstance) {
    const Instance inst = generate_instance(1, 256, 512, 5, 0.0062, 0.025);
    const auto spec = ActivationSpec::soft_threshold(0.025);
    SolverConfig cfg = SolverConfig::for_tau(0.01);
    cfg.residual_tol = 1e-8;
    const auto traj = simulate(inst.problem, spec, cfg);
    const auto ista = ista_solve(inst.problem);
    ASSERT_TRUE(traj.converged);
    EXPECT_NEAR(objective(inst.problem, spec, traj.final_state.a), objective(inst.problem, spec, ista.a), 1e-6);
}

TEST(CriticalPointSlack, OrthonormalClosedForm) {
    Vector y(2);
    y << 0.7, -0.2;
    const Problem p = orthonormal_problem(y, 0.15);
    const Vector b = p.phi().transpose() * y;
    Vector a(2);
    for (Index i = 0; i < 2; ++i) a[i] = oracle::soft(b[i], 0.15);
    const auto r = critical_point_slack(p, a);
    EXPECT_LE(r.active_slack, 1e-12);
    EXPECT_LE(r.inactive_slack, 1e-12);
}

TEST(CriticalPointSlack, ZeroIsOptimalBelowThreshold) {
    Vector y(2);
    y << 0.05, 0.03;
    const Problem p = orthonormal_problem(y, 0.1);
    const auto r = critical_point_slack(p, Vector::Zero(2));
    EXPECT_EQ(r.active_slack, 0.0);
    EXPECT_EQ(r.inactive_slack, 0.0);
    EXPECT_TRUE(r.active_set.empty());
}

TEST(CriticalPointSlack, DetectsSuboptimalPoint) {
    Vector y(2);
    y << 0.7, -0.2;
    const Problem p = orthonormal_problem(y, 0.15);
    Vector a(2);
    a << 0.3, 0.0;
    EXPECT_FALSE(critical_point_slack(p, a).within(1e-3));
}

TEST(CriticalPointSlack, GenericCostUnsupported) {
    const Problem p = orthonormal_problem(Vector::Ones(2), 0.1);
    EXPECT_THROW(critical_point_slack(p, smooth_shrink(0.1), Vector::Zero(2)), UnsupportedCost);
    EXPECT_NO_THROW(critical_point_slack(p, ActivationSpec::soft_threshold(0.1), Vector::Zero(2)));
}

TEST(CriticalPointSlack, LcaOnDefaultInstance) {
    const Instance inst = generate_instance(2, 256, 512, 5, 0.0062, 0.025);
    SolverConfig cfg = SolverConfig::for_tau(0.01);
    const auto traj = simulate(inst.problem, ActivationSpec::soft_threshold(0.025), cfg);
    ASSERT_TRUE(traj.converged);
    const auto r = critical_point_slack(inst.problem, traj.final_state.a);
    EXPECT_LE(r.active_slack, 1e-4);
    EXPECT_LE(r.inactive_slack, 1e-4);
}

TEST(FixedPointResidual, Cases) {
    const Instance inst = generate_instance(3, 16, 32, 2, 0.0, 0.05);
    const auto spec = ActivationSpec::soft_threshold(0.05);
    const Vector b = driving_input(inst.problem);
    EXPECT_NEAR(fixed_point_residual(inst.problem, spec, Vector::Zero(32), 0.01), b.lpNorm<Eigen::Infinity>(), 1e-14);

    IstaConfig ic;
    ic.tol = 1e-15;
    const Vector u_star = map_output_to_state(inst.problem, ista_solve(inst.problem, ic).a);
    EXPECT_LE(fixed_point_residual(inst.problem, spec, u_star, 0.01), 1e-10);
}

TEST(MapOutputToState, ZeroAndOrthonormal) {
    Vector y(2);
    y << 0.7, -0.05;
    const Problem p = orthonormal_problem(y, 0.1);
    const Vector b = p.phi().transpose() * y;
    EXPECT_LE((map_output_to_state(p, Vector::Zero(2)) - b).norm(), 1e-15);
    Vector a(2);
    for (Index i = 0; i < 2; ++i) a[i] = oracle::soft(b[i], 0.1);
    EXPECT_LE((map_output_to_state(p, a) - b).norm(), 1e-15);
}

TEST(MapOutputToState, IstaSolutionIsFixedPoint) {
    const Instance inst = generate_instance(4, 256, 512, 5, 0.0062, 0.025);
    IstaConfig ic;
    ic.tol = 1e-8;
    const auto ista = ista_solve(inst.problem, ic);
    ASSERT_TRUE(ista.converged);
    const Vector u_star = map_output_to_state(inst.problem, ista.a);
    EXPECT_LE(udot(inst.problem, ActivationSpec::soft_threshold(0.025), u_star, 1.0).lpNorm<Eigen::Infinity>(), 1e-6);
    // Exact-minimizer composition bound, relative to the drive.
    ic.tol = 1e-14;
    const Vector u_tight = map_output_to_state(inst.problem, ista_solve(inst.problem, ic).a);
    EXPECT_LE(fixed_point_residual(inst.problem, ActivationSpec::soft_threshold(0.025), u_tight, 1.0),
              1e-8 * (1.0 + driving_input(inst.problem).lpNorm<Eigen::Infinity>()));
}

TEST(CountSwitches, ConstantAndSingleCrossing) {
    // Identity dictionary, one node above threshold in y: it crosses once.
    Vector y = Vector::Zero(3);
    y[1] = 1.0;
    const Problem p(Dictionary(Matrix::Identity(3, 3)), y, 0.1);
    SolverConfig cfg = SolverConfig::for_tau(0.01);
    cfg.residual_tol = 1e-8;
    const auto traj = simulate(p, ActivationSpec::soft_threshold(0.1), cfg);
    const auto sc = count_switches(traj);
    ASSERT_EQ(sc.count, 1u);
    EXPECT_EQ(sc.events[0].entered, IndexSet{1});
    EXPECT_TRUE(sc.events[0].left.empty());

    const auto still = simulate(p, ActivationSpec::soft_threshold(0.1), cfg, traj.final_state.u);
    EXPECT_EQ(count_switches(still).count, 0u);
}

TEST(EstimateDelta, OrthonormalAndRepeated) {
    const Dictionary eye(Matrix::Identity(4, 4));
    EXPECT_NEAR(estimate_delta(eye, {0, 2, 3}), 0.0, 1e-15);
    Matrix m(2, 2);
    m << 1, 1, 0, 0;
    EXPECT_NEAR(estimate_delta(Dictionary(m), {0, 1}), 1.0, 1e-12);
    EXPECT_THROW(estimate_delta(eye, {}), EmptySupport);
}

TEST(EstimateDelta, MatchesSvdOracle) {
    const Dictionary d = build_canonical_sinusoid_dictionary(256);
    Rng rng(77);
    for (int k = 0; k < 20; ++k) {
        IndexSet s;
        while (s.size() < 5) {
            const auto j = static_cast<Index>(rng.index(512));
            if (std::find(s.begin(), s.end(), j) == s.end()) s.push_back(j);
        }
        std::sort(s.begin(), s.end());
        const double delta = estimate_delta(d, s);
        EXPECT_NEAR(delta, oracle::delta_svd(d.matrix(), s), 1e-10);
        EXPECT_LT(delta, 1.0);
    }
}

TEST(EstimateDelta, OversizedSupportGivesAtLeastOne) {
    const Dictionary d = build_canonical_sinusoid_dictionary(4);
    EXPECT_GE(estimate_delta(d, {0, 1, 2, 3, 4}), 1.0 - 1e-12);
}

TEST(EstimateDelta, MonotoneUnderInclusion) {
    const Dictionary d = gaussian_dictionary(20, 40, 5);
    Rng rng(13);
    for (int k = 0; k < 50; ++k) {
        IndexSet big;
        for (Index j = 0; j < 40; ++j)
            if (rng.uniform() < 0.2) big.push_back(j);
        if (big.size() < 2) continue;
        IndexSet small;
        for (Index j : big)
            if (rng.uniform() < 0.5) small.push_back(j);
        if (small.empty()) small.push_back(big.front());
        EXPECT_LE(estimate_delta(d, small), estimate_delta(d, big) + 1e-12);
    }
}

TEST(DeltaOverTrajectory, ConstantActiveSetAndOrthonormal) {
    Vector y = Vector::Zero(4);
    y[0] = 0.5;
    y[3] = -0.7;
    const Problem p(Dictionary(Matrix::Identity(4, 4)), y, 0.1);
    const auto spec = ActivationSpec::soft_threshold(0.1);
    const auto traj = simulate(p, spec, SolverConfig::for_tau(0.01));
    const auto d = delta_over_trajectory(p.dictionary(), traj, traj.final_state.active);
    EXPECT_EQ(d.delta_final, 0.0);
    EXPECT_EQ(d.delta_max, 0.0);

    // Starting at the solution, the active set never changes.
    const Instance inst = generate_instance(1, 16, 32, 3, 0.0, 0.05);
    const auto spec2 = ActivationSpec::soft_threshold(0.05);
    SolverConfig cfg = SolverConfig::for_tau(0.01);
    cfg.residual_tol = 1e-10;
    const auto settled = simulate(inst.problem, spec2, cfg);
    const auto again = simulate(inst.problem, spec2, cfg, settled.final_state.u);
    const auto d2 = delta_over_trajectory(inst.problem.dictionary(), again, settled.final_state.active);
    EXPECT_EQ(d2.delta_final, d2.delta_max);
}

TEST(DeltaOverTrajectory, MaxDominatesFinal) {
    const Instance inst = generate_instance(6, 256, 512, 5, 0.0062, 0.025);
    const auto traj = simulate(inst.problem, ActivationSpec::soft_threshold(0.025), SolverConfig::for_tau(0.01));
    const auto d = delta_over_trajectory(inst.problem.dictionary(), traj, traj.final_state.active);
    EXPECT_GE(d.delta_max, d.delta_final);
    EXPECT_NEAR(d.delta_final, oracle::delta_svd(inst.problem.phi(), traj.final_state.active), 1e-10);
}

TEST(RateBound, Arithmetic) {
    auto r = rate_bound(1.0, 0.0, 1.0);
    EXPECT_DOUBLE_EQ(r.speed, 1.0);
    EXPECT_TRUE(r.valid);
    r = rate_bound(1.0, 0.5, 0.01);
    EXPECT_NEAR(r.speed, 50.0, 1e-12);
    EXPECT_TRUE(r.valid);
    EXPECT_FALSE(rate_bound(1.0, 1.0, 1.0).valid);
    EXPECT_THROW(rate_bound(0.0, 0.1, 1.0), InvalidArgument);
}

TEST(RateBound, MonotoneInEachArgument) {
    for (double tau : {0.01, 0.1, 1.0}) {
        for (double alpha = 0.5; alpha <= 2.0; alpha += 0.25) {
            for (double delta = 0.0; delta < 0.9; delta += 0.1) {
                const double c = rate_bound(alpha, delta, tau).speed;
                EXPECT_GT(c, rate_bound(alpha, delta + 0.05, tau).speed);
                EXPECT_GT(c, rate_bound(alpha + 0.1, delta + 1e-3, tau).speed);
                EXPECT_NEAR(rate_bound(alpha, delta, tau / 2).speed, 2.0 * c, 1e-9 * std::abs(c) + 1e-12);
            }
        }
    }
}

TEST(DecayCurve, NormalizationAndDegenerateStart) {
    Vector y = Vector::Zero(3);
    y[0] = 1.0;
    const Problem p(Dictionary(Matrix::Identity(3, 3)), y, 0.1);
    const auto traj = simulate(p, ActivationSpec::soft_threshold(0.1), SolverConfig::for_tau(0.01));
    const Vector u_star = driving_input(p);
    const auto curve = decay_curve(traj, u_star);
    EXPECT_EQ(curve.front().value, 1.0);
    EXPECT_EQ(curve.front().t, 0.0);
    EXPECT_THROW(decay_curve(traj, traj.samples.front().u), DegenerateStart);
}

// Orthonormal case: every node relaxes at exactly 1/tau, so the fitted slope
// is the Euler decay log(1 - dt/tau)/dt.
TEST(DecayCurve, OrthonormalSlope) {
    Vector y = Vector::Zero(4);
    y << 0.5, -0.2, 0.05, 0.0;
    const Problem p(Dictionary(Matrix::Identity(4, 4)), y, 0.1);
    SolverConfig cfg = SolverConfig::for_tau(0.01);
    cfg.residual_tol = 1e-9;
    const auto traj = simulate(p, ActivationSpec::soft_threshold(0.1), cfg);
    const auto fit = fit_log_slope(decay_curve(traj, driving_input(p)), 0.0, 1e-9);
    EXPECT_NEAR(fit.slope, std::log(1.0 - 0.1) / 0.001, 1e-6);
}

TEST(ErrorBounds, ZeroPerturbation) {
    const auto spec = ActivationSpec::soft_threshold(0.1);
    Vector u_star(3);
    u_star << 0.5, -0.05, 0.2;
    EXPECT_TRUE(lemma1_check(spec, u_star, Vector::Zero(3)).all());
}

TEST(ErrorBounds, ScalarFromZero) {
    const double lam = 0.1;
    const auto spec = ActivationSpec::soft_threshold(lam);
    Vector u_star = Vector::Zero(1);
    Vector u_tilde = Vector::Constant(1, 2 * lam);
    const auto ev = error_variables(spec, u_star, u_tilde);
    EXPECT_NEAR(ev.a_tilde[0], lam, 1e-15);
    EXPECT_TRUE(lemma1_check(spec, u_star, u_tilde).all());
}

TEST(ErrorBounds, ViolatedByTooSmallAlpha) {
    const auto spec = ActivationSpec::soft_threshold(0.1).with_alpha(0.5);
    Vector u_star = Vector::Constant(1, 1.0);
    Vector u_tilde = Vector::Constant(1, 0.3);
    const auto r = lemma1_check(spec, u_star, u_tilde);
    EXPECT_FALSE(r.slope_bound);
    EXPECT_TRUE(r.sign_agreement);
}

TEST(ErrorBounds, RandomizedSoftAndGeneric) {
    for (const auto& spec : {ActivationSpec::soft_threshold(0.05), smooth_shrink(0.05), tapered_threshold(0.05)}) {
        const ErrorBoundTally t = error_bounds_randomized(spec, 10000, 99);
        EXPECT_EQ(t.failures(), 0) << spec.name() << ": " << describe(t);
    }
}

TEST(FitLogSlope, NeedsPoints) {
    std::vector<DecayPoint> curve{{0.0, 1.0}, {1.0, 0.5}};
    EXPECT_THROW(fit_log_slope(curve, 0.0, 1e-9), InvalidArgument);
    curve.push_back({2.0, 0.25});
    EXPECT_NEAR(fit_log_slope(curve, 0.0, 1e-9).slope, std::log(0.5), 1e-12);
}
