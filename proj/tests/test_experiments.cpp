#include "lca/experiments.hpp"

#include <gtest/gtest.h>

using namespace lca;

namespace {

InstanceParams small_params() {
    InstanceParams p;
    p.m = 32;
    p.n = 64;
    p.s = 3;
    p.lambda = 0.05;
    p.noise_std = 0.01;
    return p;
}

}  // namespace

TEST(Histogram, SingleTrial) {
    const std::vector<SwitchTrial> one{{1, 7, true, 0.1, true}};
    const auto h = switch_histogram(one);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(h[0].lower, 7u);
    EXPECT_EQ(h[0].count, 1u);
    EXPECT_DOUBLE_EQ(h[0].percentage, 100.0);
}

TEST(Histogram, BinsAndGaps) {
    std::vector<SwitchTrial> t;
    for (std::size_t s : {3, 3, 4, 8}) t.push_back({0, s, true, 0.0, true});
    const auto h = switch_histogram(t);
    ASSERT_EQ(h.size(), 6u);
    EXPECT_EQ(h[0].count, 2u);
    EXPECT_EQ(h[2].count, 0u);
    EXPECT_DOUBLE_EQ(h[0].percentage, 50.0);
    const auto wide = switch_histogram(t, 5);
    ASSERT_EQ(wide.size(), 2u);
    EXPECT_EQ(wide[0].count, 3u);
    EXPECT_EQ(wide[1].lower, 5u);
    EXPECT_THROW(switch_histogram({}), InvalidArgument);
}

TEST(SwitchTrials, DeterministicAcrossThreadCounts) {
    const auto spec = ActivationSpec::soft_threshold(0.05);
    const SolverConfig cfg = SolverConfig::for_tau(0.01);
    const auto serial = run_switch_trials(small_params(), spec, cfg, 12, 1);
    const auto parallel = run_switch_trials(small_params(), spec, cfg, 12, 4);
    ASSERT_EQ(serial.size(), 12u);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(serial[i].seed, 1 + i);
        EXPECT_EQ(serial[i].switches, parallel[i].switches);
        EXPECT_EQ(serial[i].final_time, parallel[i].final_time);
        EXPECT_TRUE(serial[i].converged);
    }
}

TEST(Convergence, MultiStartAgrees) {
    const auto spec = ActivationSpec::soft_threshold(0.05);
    SolverConfig cfg = SolverConfig::for_tau(0.01);
    cfg.residual_tol = 1e-8;
    cfg.max_time = 5.0;
    const auto r = run_convergence_experiment(small_params(), spec, cfg, 6, 4);
    EXPECT_EQ(r.nodes.size(), 6u);
    EXPECT_EQ(r.start_finals.size(), 4u);
    for (bool c : r.start_converged) EXPECT_TRUE(c);
    EXPECT_LE(r.final_spread, 1e-4);
    EXPECT_NE(r.plane_first, r.plane_second);
    for (const auto& row : r.comparison) EXPECT_NEAR(row.lca, row.ista, 1e-3);
}

TEST(MaxPairwiseDistance, Basic) {
    Vector a = Vector::Zero(2), b = Vector::Zero(2), c = Vector::Zero(2);
    b[0] = 1.0;
    c[1] = -3.0;
    EXPECT_EQ(max_pairwise_distance({a}), 0.0);
    EXPECT_EQ(max_pairwise_distance({a, b, c}), 3.0);
}

// Identity dictionary: no interconnection, so delta = 0 and the decay rate is
// exactly the Euler factor of 1/tau.
TEST(RateExperiment, OrthonormalRate) {
    InstanceParams p;
    p.m = 16;
    p.n = 16;
    p.s = 3;
    p.lambda = 0.05;
    p.dictionary = "identity";
    for (double tau : {0.01, 0.005}) {
        SolverConfig cfg = SolverConfig::for_tau(tau);
        cfg.dt = tau / 100;
        cfg.residual_tol = 1e-9;
        const auto r = run_rate_experiment(p, ActivationSpec::soft_threshold(0.05), cfg);
        EXPECT_EQ(r.deltas.delta_final, 0.0);
        EXPECT_EQ(r.deltas.delta_max, 0.0);
        EXPECT_NEAR(r.slope_final, -1.0 / tau, 1e-9 / tau);
        EXPECT_NEAR(r.fit.slope, -1.0 / tau, 0.01 / tau);
        EXPECT_TRUE(r.below_max_bound);
    }
}

TEST(RateExperiment, DefaultInstanceBeatsWorstCaseBound) {
    const auto r = run_rate_experiment(InstanceParams{}, ActivationSpec::soft_threshold(0.025), SolverConfig::for_tau(0.01));
    EXPECT_GE(r.deltas.delta_max, r.deltas.delta_final);
    EXPECT_TRUE(r.rate_max.valid);
    EXPECT_LE(r.fit.slope, r.slope_max);
    EXPECT_TRUE(r.below_max_bound);
}

TEST(ReferencePoint, SmallResidual) {
    const Instance inst = make_instance(small_params());
    SolverConfig cfg = SolverConfig::for_tau(0.01);
    const auto ref = reference_fixed_point(inst.problem, ActivationSpec::soft_threshold(0.05), cfg);
    EXPECT_LE(ref.residual, 1e-9);
    EXPECT_FALSE(ref.source.empty());
}

TEST(MakeDictionary, Kinds) {
    EXPECT_EQ(make_dictionary("sinusoid", 8, 16, 1).kind(), DictionaryKind::CanonicalSinusoid);
    EXPECT_EQ(make_dictionary("identity", 8, 8, 1).matrix(), Matrix::Identity(8, 8));
    EXPECT_EQ(make_dictionary("gaussian", 8, 20, 1).n(), 20);
    EXPECT_THROW(make_dictionary("sinusoid", 8, 12, 1), InvalidArgument);
    EXPECT_THROW(make_dictionary("wavelet", 8, 16, 1), InvalidArgument);
}
