#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "scope/csv.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = SCOPE_TEST_TMP;

int run(const std::string& args) {
    const std::string cmd = std::string(SCOPE_CLI_PATH) + " " + args + " > " + (kTmp / "stdout.txt").string() +
                            " 2> " + (kTmp / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override { fs::create_directories(kTmp); }
};

const char* kSim = "model = A\nN_list = 20, 50\nalpha = 0.1\nreps = 100\nseed = 5\n"
                   "methods = oracle, storey, log_kappa(3), scb(0.9)\n";

} // namespace

TEST_F(Cli, SimulateShapeAndDeterminism) {
    write(kTmp / "sim.cfg", kSim);
    ASSERT_EQ(run("simulate --config " + (kTmp / "sim.cfg").string() + " --out " + (kTmp / "s1").string()), 0);
    ASSERT_EQ(run("simulate --config " + (kTmp / "sim.cfg").string() + " --out " + (kTmp / "s2").string()), 0);
    const auto t1 = slurp(kTmp / "s1" / "A_table.csv");
    EXPECT_EQ(t1, slurp(kTmp / "s2" / "A_table.csv"));
    EXPECT_EQ(slurp(kTmp / "s1" / "A_plot.csv"), slurp(kTmp / "s2" / "A_plot.csv"));
    std::istringstream in(t1);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "method,N,cov,fd,td");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 6 * 2);  // 4 methods + 2 baselines per N
}

TEST_F(Cli, ResolvedConfigReruns) {
    write(kTmp / "sim.cfg", kSim);
    ASSERT_EQ(run("simulate --config " + (kTmp / "sim.cfg").string() + " --out " + (kTmp / "r1").string()), 0);
    ASSERT_EQ(run("simulate --config " + (kTmp / "r1" / "resolved_config.txt").string() + " --out " +
                  (kTmp / "r2").string()),
              0);
    EXPECT_EQ(slurp(kTmp / "r1" / "A_table.csv"), slurp(kTmp / "r2" / "A_table.csv"));
    EXPECT_EQ(slurp(kTmp / "r1" / "resolved_config.txt"), slurp(kTmp / "r2" / "resolved_config.txt"));
}

TEST_F(Cli, SeedOverrideChangesOutput) {
    write(kTmp / "sim.cfg", kSim);
    ASSERT_EQ(run("simulate --config " + (kTmp / "sim.cfg").string() + " --out " + (kTmp / "o1").string()), 0);
    ASSERT_EQ(run("simulate --config " + (kTmp / "sim.cfg").string() + " --seed 99 --out " + (kTmp / "o2").string()),
              0);
    EXPECT_NE(slurp(kTmp / "o1" / "A_table.csv"), slurp(kTmp / "o2" / "A_table.csv"));
}

TEST_F(Cli, MissingKeyExitsTwo) {
    write(kTmp / "bad.cfg", "model = A\nN_list = 20\nreps = 10\nseed = 1\n");
    EXPECT_EQ(run("simulate --config " + (kTmp / "bad.cfg").string() + " --out " + kTmp.string()), 2);
    EXPECT_NE(slurp(kTmp / "stderr.txt").find("alpha"), std::string::npos);
}

TEST_F(Cli, ParseErrorReportsPosition) {
    write(kTmp / "bad2.cfg", "model = A\nN_list = 20\nalpha 0.1\n");
    EXPECT_EQ(run("simulate --config " + (kTmp / "bad2.cfg").string()), 2);
    EXPECT_NE(slurp(kTmp / "stderr.txt").find("bad2.cfg:3:1"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("simulate"), 2);
    EXPECT_EQ(run("tests --kind xyz --data nowhere.csv"), 2);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, ScopeZeroVarianceColumn) {
    write(kTmp / "flat.csv", "a,b,c\n1,2,3\n2,2,1\n3,2,5\n");
    EXPECT_EQ(run("scope --data " + (kTmp / "flat.csv").string() + " --out " + kTmp.string()), 1);
    EXPECT_NE(slurp(kTmp / "stderr.txt").find("column 1"), std::string::npos);
}

TEST_F(Cli, ScopeShapeMismatch) {
    write(kTmp / "thr.csv", "c_minus,c_plus\n0,0\n0,0\n");
    EXPECT_EQ(run("scope --data " + std::string(SCOPE_DEMO_DATA) + " --thresholds " + (kTmp / "thr.csv").string() +
                  " --out " + kTmp.string()),
              2);
}

TEST_F(Cli, ScopeDeterministicWithMetadata) {
    const std::string base = "scope --data " + std::string(SCOPE_DEMO_DATA) + " --quantile bootstrap --seed 3 --out ";
    ASSERT_EQ(run(base + (kTmp / "c1").string()), 0);
    ASSERT_EQ(run(base + (kTmp / "c2").string()), 0);
    const auto a = slurp(kTmp / "c1" / "scope.csv");
    EXPECT_EQ(a, slurp(kTmp / "c2" / "scope.csv"));
    EXPECT_NE(a.find("# q_hat="), std::string::npos);
    EXPECT_NE(a.find("# k_N="), std::string::npos);
    EXPECT_NE(a.find("index,mu_hat,sigma_hat,c_minus,c_plus,class"), std::string::npos);
}

TEST_F(Cli, InsigTableRow) {
    ASSERT_EQ(run("insig --data " + std::string(SCOPE_DEMO_DATA) + " --kappa 3 --out " + kTmp.string()), 0);
    const auto text = slurp(kTmp / "insig.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "N,J,k_N,q_hat,iv_obs_J,iv_qhat_J,iv_qhat_J_minus_m1,iv_qhat_m0,m0_hat,scope_lower,scope_upper,hommel,bh");
    EXPECT_EQ(text.rfind("100,80,", text.find('\n') + 1), text.find('\n') + 1);
}

TEST_F(Cli, ScheffeBetaZero) {
    ASSERT_EQ(run("scheffe --K 4 --alpha 0.05 --beta-zero"), 0);
    const auto out = slurp(kTmp / "stdout.txt");
    const auto row = out.substr(out.find('\n') + 1);
    const double p = std::stod(row.substr(row.rfind(',') + 1));
    EXPECT_NEAR(p, 0.1, 0.005);
}

TEST_F(Cli, TestsLetMatchesInterval) {
    // N = 4, one column: mean 0.25, sd sqrt(1/12 * 4 / 3)
    write(kTmp / "scalar.csv", "y\n0.1\n0.2\n0.3\n0.4\n");
    ASSERT_EQ(run("tests --kind leT --data " + (kTmp / "scalar.csv").string() +
                  " --b-minus -1 --b-plus 1 --q 1.5 --out " + kTmp.string()),
              0);
    const double mean = 0.25, sd = std::sqrt((0.0225 + 0.0025 + 0.0025 + 0.0225) / 3.0), half = 1.5 * sd / 2.0;
    const bool expected = mean > -1 + half && mean < 1 - half;
    const auto text = slurp(kTmp / "tests.csv");
    const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
    EXPECT_EQ(last.substr(last.rfind(',') + 1, 1), expected ? "1" : "0");
    ASSERT_EQ(run("tests --kind leT --data " + (kTmp / "scalar.csv").string() +
                  " --b-minus 0.2 --b-plus 0.3 --q 1.5 --out " + kTmp.string()),
              0);
    const auto t2 = slurp(kTmp / "tests.csv");
    EXPECT_EQ(t2.substr(t2.size() - 2), "0\n");
}

TEST_F(Cli, TestsNeedsOneQuantileSource) {
    write(kTmp / "scalar.csv", "y\n0.1\n0.2\n0.3\n0.4\n");
    EXPECT_EQ(run("tests --kind lrT --data " + (kTmp / "scalar.csv").string() + " --b-minus -1 --b-plus 1"), 2);
}
