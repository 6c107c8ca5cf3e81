#include <json.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {

struct CliResult {
    int code;
    std::string out;
};

CliResult run(const std::string& args) {
    const std::string cmd = std::string(LCA_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("lca_cli_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, SolveGeneratedInstance) {
    const CliResult r = run("solve --gen m=256,n=512,s=5,noise=0.0062,seed=1 --lambda 0.025");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["nnz"], 5);
    EXPECT_TRUE(j["support_matches_truth"].get<bool>());
    EXPECT_LE(j["critical_point"]["active_slack"].get<double>(), 1e-4);
}

TEST(Cli, IstaSolver) {
    const CliResult r = run("solve --gen m=32,n=64,s=2,noise=0,seed=3 --lambda 0.05 --solver ista");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["nnz"], 2);
}

TEST(Cli, GenerateThenSolveFile) {
    const auto dir = scratch("generate");
    ASSERT_EQ(run("generate --m 16 --s 2 --seed 4 --lambda 0.05 --out " + (dir / "p.json").string()).code, 0);
    const CliResult r = run("solve --problem " + (dir / "p.json").string());
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["nnz"].get<int>(), 2);
}

TEST(Cli, MalformedProblemExitsTwo) {
    const auto dir = scratch("malformed");
    std::ofstream(dir / "bad.json") << R"({"m": 2, "n": 4, "lambda": 0.1, "y": "oops"})";
    EXPECT_EQ(run("solve --problem " + (dir / "bad.json").string()).code, 2);
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(run("solve --problem " + (dir / "broken.json").string()).code, 2);
    EXPECT_EQ(run("solve --problem " + (dir / "missing.json").string()).code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("solve --tau -1 --gen m=8,n=16,s=1").code, 2);
    EXPECT_EQ(run("no-such-command").code, 2);
}

TEST(Cli, ValidateQuickPasses) {
    const CliResult r = run("validate --quick");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
}

TEST(Cli, ValidateDetectsWrongAlpha) {
    const CliResult r = run("validate --quick --alpha 0.5");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, ExperimentOutputIsReproducible) {
    const auto a = scratch("rate_a");
    const auto b = scratch("rate_b");
    const std::string args = "experiment rate --m 32 --s 3 --lambda 0.05 --seed 2 --out-dir ";
    ASSERT_EQ(run(args + a.string()).code, 0);
    ASSERT_EQ(run(args + b.string()).code, 0);
    const std::string csv = slurp(a / "rate_decay.csv");
    EXPECT_FALSE(csv.empty());
    EXPECT_EQ(csv, slurp(b / "rate_decay.csv"));
    EXPECT_EQ(slurp(a / "rate_summary.json"), slurp(b / "rate_summary.json"));
}

TEST(Cli, SwitchHistogramFiles) {
    const auto dir = scratch("switches");
    const CliResult r = run("experiment switches --m 16 --s 2 --lambda 0.05 --trials 8 --out-dir " + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(slurp(dir / "switches_histogram.csv").rfind("# lca ", 0), 0u);
    EXPECT_NE(slurp(dir / "switches_trials.csv").find("seed,switches,converged,final_time,support_recovered"),
              std::string::npos);
}
