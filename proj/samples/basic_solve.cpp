// Recover a 5-sparse vector from noisy measurements with the LCA and compare
// against ISTA.

#include "lca/lca.hpp"

#include <iostream>

int main() {
    const lca::Instance inst = lca::generate_instance(/*seed=*/1, /*m=*/256, /*n=*/512, /*s=*/5,
                                                      /*noise_std=*/0.0062, /*lambda=*/0.025);
    const auto spec = lca::ActivationSpec::soft_threshold(inst.problem.lambda());

    lca::SolverConfig config = lca::SolverConfig::for_tau(0.01);
    config.residual_tol = 1e-8;
    const lca::Trajectory traj = lca::simulate(inst.problem, spec, config);
    const lca::IstaResult ista = lca::ista_solve(inst.problem);

    std::cout << "converged after t=" << traj.final_state.t << " with " << traj.switch_events.size()
              << " switches\n";
    std::cout << "index      a0        lca       ista\n";
    for (lca::Index j : traj.final_state.active)
        std::cout << j << "  " << inst.truth.a0[j] << "  " << traj.final_state.a[j] << "  " << ista.a[j] << '\n';
    const auto slack = lca::critical_point_slack(inst.problem, traj.final_state.a);
    std::cout << "critical-point slack: active " << slack.active_slack << ", inactive " << slack.inactive_slack
              << '\n';
}
