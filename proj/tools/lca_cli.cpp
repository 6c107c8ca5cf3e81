// lca: command-line harness for the locally competitive algorithm.
//
// Exit codes: 0 success, 1 failed invariant, 2 usage or I/O error.

#include "lca/lca.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using lca::Json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeneratorArgs {
    lca::InstanceParams params;
    bool n_given = false;

    void add(CLI::App* app) {
        app->add_option("--m", params.m, "Signal dimension M")->check(CLI::PositiveNumber);
        app->add_option("--n", params.n, "Dictionary size N (default 2M)")->check(CLI::PositiveNumber);
        app->add_option("--s", params.s, "Number of nonzeros in a0")->check(CLI::PositiveNumber);
        app->add_option("--noise", params.noise_std, "Noise standard deviation")->check(CLI::NonNegativeNumber);
        app->add_option("--seed", params.seed, "Random seed");
        app->add_option("--lambda", params.lambda, "Threshold lambda")->check(CLI::PositiveNumber);
        app->add_option("--dictionary", params.dictionary, "sinusoid | identity | gaussian");
    }

    lca::InstanceParams resolved(const CLI::App* app) const {
        lca::InstanceParams p = params;
        if (app->count("--n") == 0) p.n = p.dictionary == "identity" ? p.m : 2 * p.m;
        return p;
    }
};

struct SolverArgs {
    double tau = 0.01;
    std::optional<double> dt;
    std::optional<double> max_time;
    double residual_tol = 1e-6;
    std::string method = "euler";
    std::string activation = "soft";

    void add(CLI::App* app) {
        app->add_option("--tau", tau, "Time constant tau")->check(CLI::PositiveNumber);
        app->add_option("--dt", dt, "Integration step (default tau/10)")->check(CLI::PositiveNumber);
        app->add_option("--max-time", max_time, "Simulated time limit (default 100 tau)")->check(CLI::PositiveNumber);
        app->add_option("--residual-tol", residual_tol, "Stop when max |du/dt| falls below this")->check(CLI::PositiveNumber);
        app->add_option("--method", method, "euler | rk4");
        app->add_option("--activation", activation, "soft | smooth | tapered");
    }

    lca::SolverConfig config() const {
        lca::SolverConfig c = lca::SolverConfig::for_tau(tau);
        if (dt) c.dt = *dt;
        if (max_time) c.max_time = *max_time;
        c.residual_tol = residual_tol;
        c.method = lca::method_by_name(method);
        c.validate();
        return c;
    }
};

std::vector<std::pair<std::string, std::string>> describe(const lca::InstanceParams& p, const SolverArgs& s,
                                                          const lca::SolverConfig& c) {
    return {{"m", std::to_string(p.m)},
            {"n", std::to_string(p.n)},
            {"s", std::to_string(p.s)},
            {"noise", lca::format_double(p.noise_std)},
            {"lambda", lca::format_double(p.lambda)},
            {"seed", std::to_string(p.seed)},
            {"dictionary", p.dictionary},
            {"activation", s.activation},
            {"tau", lca::format_double(c.tau)},
            {"dt", lca::format_double(c.dt)},
            {"max_time", lca::format_double(c.max_time)},
            {"residual_tol", lca::format_double(c.residual_tol)},
            {"method", lca::to_string(c.method)}};
}

/// Parses "m=256,n=512,s=5,noise=0.0062,seed=1[,dictionary=...]".
lca::InstanceParams parse_generator(const std::string& text, lca::InstanceParams p) {
    bool n_given = false;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--gen: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            if (key == "m") {
                p.m = std::stol(value);
            } else if (key == "n") {
                p.n = std::stol(value);
                n_given = true;
            } else if (key == "s") {
                p.s = std::stol(value);
            } else if (key == "noise") {
                p.noise_std = std::stod(value);
            } else if (key == "seed") {
                p.seed = std::stoull(value);
            } else if (key == "lambda") {
                p.lambda = std::stod(value);
            } else if (key == "dictionary") {
                p.dictionary = value;
            } else {
                throw UsageError("--gen: unknown key '" + key + "'");
            }
        } catch (const std::logic_error&) {
            throw UsageError("--gen: bad value for '" + key + "': '" + value + "'");
        }
    }
    if (!n_given) p.n = p.dictionary == "identity" ? p.m : 2 * p.m;
    return p;
}

fs::path output_dir(const std::string& flag) {
    fs::path dir = flag;
    if (flag.empty()) {
        const char* env = std::getenv("LCA_OUT_DIR");
        dir = env ? fs::path(env) : fs::path(".");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw lca::FormatError(dir.string() + ": cannot create output directory");
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw lca::FormatError(path.string() + ": cannot open for writing");
    return out;
}

void emit_json(const Json& j, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << j.dump(2) << '\n';
    } else {
        auto out = open_out(out_path);
        out << j.dump(2) << '\n';
    }
}

// ---------------------------------------------------------------------------

struct SolveCmd {
    std::string problem_path;
    std::string gen;
    GeneratorArgs generator;
    SolverArgs solver;
    std::string solver_name = "lca";
    std::string out;
    std::string trajectory_json;
    std::string trajectory_csv;
    bool csv_vectors = false;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("solve", "Solve one instance with the LCA or ISTA and print a JSON report");
        auto* src = cmd->add_option("--problem", problem_path, "Problem JSON file");
        auto* g = cmd->add_option("--gen", gen, "Generate: m=..,n=..,s=..,noise=..,seed=..[,dictionary=..]");
        src->excludes(g);
        cmd->add_option("--lambda", generator.params.lambda, "Threshold lambda (overrides the problem file)")
            ->check(CLI::PositiveNumber);
        solver.add(cmd);
        cmd->add_option("--solver", solver_name, "lca | ista");
        cmd->add_option("--out", out, "Write the report here instead of stdout");
        cmd->add_option("--trajectory", trajectory_json, "Also write the full trajectory as JSON");
        cmd->add_option("--trajectory-csv", trajectory_csv, "Also write per-sample t,V,nnz as CSV");
        cmd->add_flag("--csv-vectors", csv_vectors, "Append u and a columns to the trajectory CSV");
        cmd->footer(
            "Report fields: solver, converged, a, support, nnz, objective, critical_point{active_slack,\n"
            "inactive_slack}, fixed_point_residual, iterations (ISTA) or steps/time/switches (LCA).");
        cmd->callback([this, cmd] { run(cmd); });
    }

    void run(CLI::App* cmd) {
        if (problem_path.empty() && gen.empty()) throw UsageError("solve: supply --problem or --gen");
        std::optional<lca::GroundTruth> truth;
        std::optional<lca::Problem> problem;
        lca::InstanceParams p = generator.params;
        if (!problem_path.empty()) {
            lca::ProblemFile file = lca::read_problem_file(problem_path);
            truth = file.truth;
            double lambda = file.problem.lambda();
            if (cmd->count("--lambda")) lambda = generator.params.lambda;
            problem.emplace(file.problem.dictionary(), file.problem.y(), lambda);
        } else {
            p = parse_generator(gen, p);
            lca::Instance inst = lca::make_instance(p);
            truth = inst.truth;
            problem.emplace(std::move(inst.problem));
        }

        Json report;
        const lca::ActivationSpec spec = lca::activation_by_name(solver.activation, problem->lambda());
        Eigen::VectorXd a;
        if (solver_name == "ista") {
            if (!spec.is_soft()) throw UsageError("solve: ISTA only supports the soft threshold");
            const lca::IstaResult res = lca::ista_solve(*problem);
            a = res.a;
            report["solver"] = "ista";
            report["converged"] = res.converged;
            report["iterations"] = res.iters;
            report["step_size"] = res.step_size;
        } else if (solver_name == "lca") {
            const lca::SolverConfig cfg = solver.config();
            const lca::Trajectory tr = lca::simulate(*problem, spec, cfg);
            a = tr.final_state.a;
            report["solver"] = "lca";
            report["converged"] = tr.converged;
            report["steps"] = tr.steps;
            report["time"] = tr.final_state.t;
            report["switches"] = lca::count_switches(tr).count;
            report["fixed_point_residual"] = lca::fixed_point_residual(*problem, spec, tr.final_state.u, cfg.tau);
            if (!lca::alpha_respected(tr, spec)) {
                std::cerr << "warning: activation slope " << tr.max_slope_seen << " exceeded alpha=" << spec.alpha()
                          << " along the trajectory\n";
            }
            report["max_slope_seen"] = tr.max_slope_seen;
            if (!trajectory_json.empty()) {
                auto out_file = open_out(trajectory_json);
                out_file << lca::trajectory_to_json(tr).dump() << '\n';
            }
            if (!trajectory_csv.empty()) {
                auto out_file = open_out(trajectory_csv);
                lca::write_trajectory_csv(out_file, tr, lca::parameter_comment(describe(p, solver, cfg)), csv_vectors);
            }
        } else {
            throw UsageError("solve: --solver must be lca or ista");
        }

        const lca::IndexSet support = lca::detail::nonzeros(a);
        report["a"] = lca::to_json(a);
        report["support"] = lca::to_json(support);
        report["nnz"] = support.size();
        report["objective"] = lca::objective(*problem, spec, a);
        if (spec.is_soft()) report["critical_point"] = lca::to_json(lca::critical_point_slack(*problem, a));
        if (truth) report["support_matches_truth"] = support == truth->support;
        report["lambda"] = problem->lambda();
        emit_json(report, out);
    }
};

struct GenerateCmd {
    GeneratorArgs generator;
    std::string out;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("generate", "Write a random sparse instance as a problem JSON file");
        generator.add(cmd);
        cmd->add_option("--out", out, "Output path (default stdout)");
        cmd->callback([this, cmd] {
            const lca::Instance inst = lca::make_instance(generator.resolved(cmd));
            emit_json(lca::problem_to_json(inst.problem, inst.truth), out);
        });
    }
};

struct ConvergenceCmd {
    GeneratorArgs generator;
    SolverArgs solver;
    std::string out_dir;
    int nodes = 8;
    int starts = 30;
    double init_scale = 1.0;

    void add(CLI::App* parent) {
        auto* cmd = parent->add_subcommand("convergence", "Node trajectories, solution comparison and multi-start runs");
        generator.add(cmd);
        solver.residual_tol = 1e-8;
        solver.add(cmd);
        cmd->add_option("--out-dir", out_dir, "Output directory (default $LCA_OUT_DIR or .)");
        cmd->add_option("--nodes", nodes, "Nodes traced in convergence_nodes.csv")->check(CLI::Range(2, 100000));
        cmd->add_option("--starts", starts, "Random initial states")->check(CLI::Range(2, 100000));
        cmd->add_option("--init-scale", init_scale, "Random starts are uniform in [-scale, scale]")
            ->check(CLI::PositiveNumber);
        cmd->footer(
            "Files:\n"
            "  convergence_nodes.csv     node,active_at_solution,t,u,a\n"
            "  convergence_solution.csv  index,a0,lca,ista   (joint support)\n"
            "  convergence_starts.csv    start,t,u_first,u_second   (plane of two final active nodes)\n"
            "A JSON summary is printed on stdout.");
        cmd->callback([this, cmd] { run(cmd); });
    }

    void run(CLI::App* cmd) {
        const lca::InstanceParams p = generator.resolved(cmd);
        const lca::SolverConfig cfg = solver.config();
        const lca::ActivationSpec spec = lca::activation_by_name(solver.activation, p.lambda);
        const lca::ConvergenceResult r = lca::run_convergence_experiment(p, spec, cfg, nodes, starts, init_scale);
        const fs::path dir = output_dir(out_dir);
        auto params = describe(p, solver, cfg);
        params.emplace_back("starts", std::to_string(starts));
        const std::string comment = lca::parameter_comment(params);

        {
            auto out = open_out(dir / "convergence_nodes.csv");
            lca::CsvWriter csv(out, comment, {"node", "active_at_solution", "t", "u", "a"});
            for (const auto& node : r.nodes)
                for (const auto& s : r.main_run.samples)
                    csv.cell(static_cast<long long>(node.node)).cell(node.active_at_solution).cell(s.t).cell(s.u[node.node]).cell(s.a[node.node]).end_row();
        }
        {
            auto out = open_out(dir / "convergence_solution.csv");
            lca::CsvWriter csv(out, comment, {"index", "a0", "lca", "ista"});
            for (const auto& row : r.comparison)
                csv.cell(static_cast<long long>(row.index)).cell(row.a0).cell(row.lca).cell(row.ista).end_row();
        }
        {
            auto out = open_out(dir / "convergence_starts.csv");
            lca::CsvWriter csv(out, comment + " plane=" + std::to_string(r.plane_first) + "," + std::to_string(r.plane_second),
                               {"start", "t", "u_first", "u_second"});
            for (const auto& s : r.starts) csv.cell(s.start).cell(s.t).cell(s.u_first).cell(s.u_second).end_row();
        }

        const bool all_converged = std::all_of(r.start_converged.begin(), r.start_converged.end(), [](bool b) { return b; });
        Json summary{{"converged", r.main_run.converged},
                     {"support", lca::to_json(r.main_run.final_state.active)},
                     {"true_support", lca::to_json(r.instance.truth.support)},
                     {"lca_ista_gap", (r.main_run.final_state.a - r.ista.a).lpNorm<Eigen::Infinity>()},
                     {"starts", starts},
                     {"starts_converged", all_converged},
                     {"final_spread", r.final_spread},
                     {"plane", {r.plane_first, r.plane_second}}};
        std::cout << summary.dump(2) << '\n';
    }
};

struct SwitchesCmd {
    GeneratorArgs generator;
    SolverArgs solver;
    std::string out_dir;
    int trials = 1000;
    unsigned threads = 0;
    std::size_t bin_width = 1;

    void add(CLI::App* parent) {
        auto* cmd = parent->add_subcommand("switches", "Histogram of active-set switches over seeded trials");
        generator.add(cmd);
        solver.residual_tol = 1e-8;
        solver.add(cmd);
        cmd->add_option("--out-dir", out_dir, "Output directory (default $LCA_OUT_DIR or .)");
        cmd->add_option("--trials", trials, "Number of trials; seeds are seed, seed+1, ...")->check(CLI::PositiveNumber);
        cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
        cmd->add_option("--bin-width", bin_width, "Histogram bin width")->check(CLI::PositiveNumber);
        cmd->footer(
            "Files:\n"
            "  switches_histogram.csv  switch_count_bin,count,percentage\n"
            "  switches_trials.csv     seed,switches,converged,final_time,support_recovered\n"
            "A JSON summary (min/median/max) is printed on stdout.");
        cmd->callback([this, cmd] { run(cmd); });
    }

    void run(CLI::App* cmd) {
        const lca::InstanceParams p = generator.resolved(cmd);
        const lca::SolverConfig cfg = solver.config();
        const lca::ActivationSpec spec = lca::activation_by_name(solver.activation, p.lambda);
        const auto results = lca::run_switch_trials(p, spec, cfg, trials, threads);
        const auto hist = lca::switch_histogram(results, bin_width);
        const fs::path dir = output_dir(out_dir);
        auto params = describe(p, solver, cfg);
        params.emplace_back("trials", std::to_string(trials));
        const std::string comment = lca::parameter_comment(params);
        {
            auto out = open_out(dir / "switches_histogram.csv");
            lca::CsvWriter csv(out, comment, {"switch_count_bin", "count", "percentage"});
            for (const auto& b : hist) csv.cell(b.lower).cell(b.count).cell(b.percentage).end_row();
        }
        {
            auto out = open_out(dir / "switches_trials.csv");
            lca::CsvWriter csv(out, comment, {"seed", "switches", "converged", "final_time", "support_recovered"});
            for (const auto& t : results)
                csv.cell(static_cast<long long>(t.seed)).cell(t.switches).cell(t.converged).cell(t.final_time).cell(t.support_recovered).end_row();
        }
        std::vector<std::size_t> counts;
        std::size_t converged = 0;
        for (const auto& t : results) {
            counts.push_back(t.switches);
            converged += t.converged;
        }
        std::sort(counts.begin(), counts.end());
        const std::size_t mid = counts.size() / 2;
        const double median = counts.size() % 2 ? static_cast<double>(counts[mid])
                                                : 0.5 * static_cast<double>(counts[mid - 1] + counts[mid]);
        Json summary{{"trials", trials},   {"converged", converged},   {"min", counts.front()},
                     {"median", median},   {"max", counts.back()},     {"n", p.n}};
        std::cout << summary.dump(2) << '\n';
    }
};

struct RateCmd {
    GeneratorArgs generator;
    SolverArgs solver;
    std::string out_dir;
    double floor = 1e-8;

    void add(CLI::App* parent) {
        auto* cmd = parent->add_subcommand("rate", "Decay of ||u(t)-u*|| against the exponential rate bounds");
        generator.add(cmd);
        solver.residual_tol = 1e-9;
        solver.add(cmd);
        cmd->add_option("--out-dir", out_dir, "Output directory (default $LCA_OUT_DIR or .)");
        cmd->add_option("--floor", floor, "Ignore normalized errors below this when fitting the slope")
            ->check(CLI::PositiveNumber);
        cmd->footer(
            "Files:\n"
            "  rate_decay.csv     t,normalized_error,bound_final,bound_max\n"
            "  rate_summary.json  fitted slope, theoretical slopes, deltas (also printed on stdout)\n"
            "bound_final = exp(-(1 - alpha delta_final) t / tau), delta_final on the solution support;\n"
            "bound_max uses the worst support visited joined with the solution support.");
        cmd->callback([this, cmd] { run(cmd); });
    }

    void run(CLI::App* cmd) {
        const lca::InstanceParams p = generator.resolved(cmd);
        const lca::SolverConfig cfg = solver.config();
        const lca::ActivationSpec spec = lca::activation_by_name(solver.activation, p.lambda);
        const lca::RateResult r = lca::run_rate_experiment(p, spec, cfg, floor);
        const fs::path dir = output_dir(out_dir);
        const std::string comment = lca::parameter_comment(describe(p, solver, cfg));
        {
            auto out = open_out(dir / "rate_decay.csv");
            lca::CsvWriter csv(out, comment, {"t", "normalized_error", "bound_final", "bound_max"});
            for (const auto& row : r.rows) csv.cell(row.t).cell(row.normalized_error).cell(row.bound_final).cell(row.bound_max).end_row();
        }
        Json summary{{"fitted_slope", r.fit.slope},
                     {"fit_points", r.fit.points},
                     {"fit_from", r.fit_from},
                     {"slope_final", r.slope_final},
                     {"slope_max", r.slope_max},
                     {"delta_final", r.deltas.delta_final},
                     {"delta_max", r.deltas.delta_max},
                     {"rate_final", lca::to_json(r.rate_final)},
                     {"rate_max", lca::to_json(r.rate_max)},
                     {"below_final_bound", r.below_final_bound},
                     {"below_max_bound", r.below_max_bound},
                     {"reference", r.reference.source},
                     {"reference_residual", r.reference.residual},
                     {"final_support", lca::to_json(r.final_support)},
                     {"switches", r.trajectory.switch_events.size()}};
        auto out = open_out(dir / "rate_summary.json");
        out << summary.dump(2) << '\n';
        std::cout << summary.dump(2) << '\n';
    }
};

struct ValidateCmd {
    bool quick = false;
    std::optional<double> alpha;
    int status = exit_ok;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("validate", "Run the invariant suite and print a pass/fail table");
        cmd->add_flag("--quick", quick, "Reduced trial counts");
        cmd->add_option("--alpha", alpha, "Override the soft threshold's derivative bound alpha")->check(CLI::PositiveNumber);
        cmd->callback([this] {
            lca::ValidateOptions opt;
            opt.quick = quick;
            opt.soft_alpha = alpha;
            const auto results = lca::run_validation(opt);
            for (const auto& r : results)
                std::cout << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  [" << r.detail << "]\n";
            const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
            std::cout << (ok ? "all checks passed" : "some checks FAILED") << '\n';
            status = ok ? exit_ok : exit_failed;
        });
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Locally competitive algorithm: sparse approximation by a continuous-time network"};
    app.set_version_flag("--version", std::string(lca::version));
    app.require_subcommand(1);

    SolveCmd solve;
    GenerateCmd generate;
    ConvergenceCmd convergence;
    SwitchesCmd switches;
    RateCmd rate;
    ValidateCmd validate;
    solve.add(app);
    generate.add(app);
    auto* experiment = app.add_subcommand("experiment", "Reproduce the simulation studies as CSV/JSON data");
    experiment->require_subcommand(1);
    convergence.add(experiment);
    switches.add(experiment);
    rate.add(experiment);
    validate.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const lca::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return validate.status;
}
