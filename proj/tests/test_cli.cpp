#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("fractel_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct RunResult {
    int status = -1;
    std::string out;
};

// runs the tool with `args` (and optional environment prefix), capturing stdout
RunResult run(const std::string& args, const std::string& env = {}) {
    const std::string cmd = env + (env.empty() ? "" : " ") + FRACTEL_CLI_PATH + std::string(" ") + args + " 2>/dev/null";
    RunResult r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    const int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = work_dir() / name;
    std::ofstream(p) << text;
    return p;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

const std::string kSmall = "rho: 0.6\nalpha: 2\nK: 16\nN_t: 32\nM_x: 64\nphi1: parabola\n"
                           "verify: {sweep_count: 0}\ntolerances: {tail: 1.0e-2}\n";

}  // namespace

TEST(Cli, MittagLeffler) {
    const RunResult r = run("ml --rho 1 --mu 1 --re 1");
    ASSERT_EQ(r.status, 0);
    double re = 0, im = 1, err = -1;
    ASSERT_EQ(std::sscanf(r.out.c_str(), "%lf,%lf,%lf", &re, &im, &err), 3) << r.out;
    EXPECT_NEAR(re, std::exp(1.0), 1e-13);
    EXPECT_EQ(im, 0.0);
    EXPECT_GE(err, 0.0);
    // erfc form of E_{1/2,1}(-1)
    const RunResult h = run("ml --rho 0.5 --mu 1 --re -1");
    ASSERT_EQ(std::sscanf(h.out.c_str(), "%lf", &re), 1);
    EXPECT_NEAR(re, std::exp(1.0) * std::erfc(1.0), 1e-14);
    EXPECT_EQ(run("ml --rho 0.5 --mu 1 --gamma 3").status, 2);
    EXPECT_EQ(run("ml --rho 1.5 --mu 1").status, 2);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("frobnicate").status, 2);
    EXPECT_EQ(run("solve").status, 2);  // no config
    const fs::path bad = write_config("bad_rho.yaml", "rho: 1.5\nalpha: 1\n");
    EXPECT_EQ(run("solve --config " + bad.string()).status, 2);
    const fs::path unk = write_config("bad_key.yaml", "rho: 0.5\nalpha: 1\nalhpa: 1\n");
    EXPECT_EQ(run("solve --config " + unk.string()).status, 2);
    EXPECT_EQ(run("solve --config /nonexistent.yaml").status, 2);
    const fs::path ok = write_config("ok.yaml", kSmall);
    EXPECT_EQ(run("solve --config " + ok.string() + " --threads 0").status, 2);
    EXPECT_EQ(run("solve --config " + ok.string() + " --tolerance-scale -1").status, 2);
    EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, SolveZeroData) {
    const fs::path cfg = write_config("zero.yaml", "rho: 0.4\nalpha: 1\nK: 8\nN_t: 16\nM_x: 32\n");
    const fs::path out = work_dir() / "zero_out";
    ASSERT_EQ(run("solve --config " + cfg.string() + " --out " + out.string()).status, 0);
    std::string header;
    const auto rows = read_csv(out / "solution.csv", &header);
    EXPECT_EQ(header, "x,t,w,u,dxx,drho,drho2,residual");
    ASSERT_EQ(rows.size(), 33u * 16u);
    for (const auto& r : rows) {
        ASSERT_EQ(r.size(), 8u);
        for (std::size_t c = 2; c < 8; ++c) EXPECT_EQ(r[c], 0.0);
    }
    const auto rep = nlohmann::json::parse(slurp(out / "solution.json"));
    EXPECT_EQ(rep["schema_version"], 1);
    EXPECT_EQ(rep["passed"], true);
    EXPECT_TRUE(fs::exists(out / "config.yaml"));
}

TEST(Cli, SolveIsDeterministic) {
    const fs::path cfg = write_config("det.yaml", kSmall);
    const fs::path a = work_dir() / "det_a", b = work_dir() / "det_b";
    ASSERT_EQ(run("solve --config " + cfg.string() + " --out " + a.string()).status, 0);
    ASSERT_EQ(run("solve --config " + cfg.string() + " --out " + b.string()).status, 0);
    EXPECT_EQ(slurp(a / "solution.csv"), slurp(b / "solution.csv"));
    EXPECT_EQ(slurp(a / "solution.json"), slurp(b / "solution.json"));
    EXPECT_FALSE(slurp(a / "solution.csv").empty());
}

TEST(Cli, EnvironmentOverrides) {
    const fs::path cfg = write_config("env.yaml", kSmall);
    const fs::path out = work_dir() / "env_out";
    const RunResult r = run("solve", "FRACTEL_CONFIG=" + cfg.string() + " FRACTEL_OUT=" + out.string() + " FRACTEL_THREADS=2");
    EXPECT_EQ(r.status, 0);
    EXPECT_TRUE(fs::exists(out / "solution.csv"));
    // a flag beats the environment
    const fs::path flag_out = work_dir() / "env_flag";
    EXPECT_EQ(run("solve --out " + flag_out.string(), "FRACTEL_CONFIG=" + cfg.string() + " FRACTEL_OUT=" + out.string())
                  .status,
              0);
    EXPECT_TRUE(fs::exists(flag_out / "solution.csv"));
    // tightened tolerances make the run fail its checks
    EXPECT_EQ(run("solve --out " + flag_out.string(), "FRACTEL_CONFIG=" + cfg.string() + " FRACTEL_TOLERANCE_SCALE=1e-20")
                  .status,
              1);
}

TEST(Cli, OracleDefaultCase) {
    const fs::path cfg = write_config("oracle.yaml", "rho: 0.5\nalpha: 2\nphi1: parabola\nK: 8\n");
    const fs::path out = work_dir() / "oracle_out";
    ASSERT_EQ(run("oracle --config " + cfg.string() + " --out " + out.string()).status, 0);
    std::string header;
    const auto rows = read_csv(out / "oracle.csv", &header);
    EXPECT_EQ(header, "t,y_solver,y_oracle,relerr");
    ASSERT_EQ(rows.size(), 19u);
    EXPECT_EQ(rows.front()[0], 0.1);
    for (const auto& r : rows) EXPECT_LE(r[3], 1e-6);

    // the degenerate mode for alpha = 2
    const fs::path deg = write_config("oracle2.yaml", "rho: 0.5\nalpha: 2\nphi1: parabola\nphi0: sin:2\noracle: {mode: 2}\n");
    ASSERT_EQ(run("oracle --config " + deg.string() + " --out " + out.string()).status, 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(out / "oracle.json"))["degenerate"], true);
}

TEST(Cli, VerifyDetectsCorruption) {
    const fs::path cfg = write_config("verify.yaml", kSmall);
    const fs::path clean = work_dir() / "verify_clean", bad = work_dir() / "verify_bad";
    EXPECT_EQ(run("verify --config " + cfg.string() + " --out " + clean.string()).status, 0);
    const RunResult r = run("verify --config " + cfg.string() + " --out " + bad.string() + " --inject-corruption");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("residual: fail"), std::string::npos) << r.out;
    const auto rep = nlohmann::json::parse(slurp(bad / "verify.json"));
    EXPECT_EQ(rep["passed"], false);
    bool named = false;
    for (const auto& c : rep["checks"])
        if (c["name"] == "residual") named = c["verdict"] == "fail";
    EXPECT_TRUE(named);
    EXPECT_TRUE(rep["fitted_constants"].contains("sector"));
}

TEST(Cli, Converge) {
    const fs::path cfg = write_config("conv.yaml", kSmall + "converge: {K: [4, 8, 16], N_t: [16, 32]}\n");
    const fs::path out = work_dir() / "conv_out";
    ASSERT_EQ(run("converge --config " + cfg.string() + " --out " + out.string()).status, 0);
    std::string header;
    const auto rows = read_csv(out / "converge.csv", &header);
    EXPECT_EQ(header, "K,N_t,w_sup,residual_sup,residual_l2,data_residual,tail_bound,cross_residual");
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_LT(rows[4][5], rows[0][5]);
    const auto rep = nlohmann::json::parse(slurp(out / "converge.json"));
    EXPECT_GT(rep["tail_decay_exponent"].get<double>(), 1.0);
}

TEST(Cli, AbortedRunIsFlagged) {
    const fs::path cfg = write_config("short.yaml", "rho: 0.5\nalpha: 1\nT: 0.05\nphi1: sin:1\n");
    const fs::path out = work_dir() / "short_out";
    EXPECT_EQ(run("oracle --config " + cfg.string() + " --out " + out.string()).status, 1);
    const auto rep = nlohmann::json::parse(slurp(out / "oracle.partial.json"));
    EXPECT_EQ(rep["complete"], false);
}
