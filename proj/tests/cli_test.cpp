#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ccc/spaces.hpp"

#ifndef CCCT_BINARY
#error "CCCT_BINARY must point at the command line tool"
#endif

namespace {

namespace fs = std::filesystem;
using ccc::Json;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ccct_test_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()
                                               ->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    void TearDown() override { fs::remove_all(dir_); }

    fs::path file(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        spit(p, text);
        return p;
    }

    RunResult run(const std::string& args) const {
        const fs::path out = dir_ / "stdout.txt";
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = std::string(CCCT_BINARY) + " " + args + " > " +
                                out.string() + " 2> " + err.string();
        const int rc = std::system(cmd.c_str());
        RunResult res;
        res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
        res.out = slurp(out);
        res.err = slurp(err);
        return res;
    }

    fs::path dir_;
};

TEST_F(CliTest, FactorizeConvexScaleHasIdentityInnerFactor) {
    const RunResult r = run("factorize --fn power:2");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json doc = Json::parse(r.out);
    EXPECT_EQ(doc.at("command"), "factorize");
    EXPECT_EQ(doc.at("config").at("fn"), "power:2");
    EXPECT_TRUE(doc.at("invariants").at("ok").get<bool>());
    EXPECT_NEAR(doc.at("phi_check_inv_at_1").get<double>(), 1.0, 1e-9);
    const auto& grid = doc.at("psi_hat").at("grid");
    const auto& vals = doc.at("psi_hat").at("values");
    ASSERT_EQ(grid.size(), vals.size());
    double sup = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        sup = std::max(sup, std::abs(grid[k].get<double>() -
                                     vals[k].get<double>()));
    EXPECT_LE(sup, 1e-6);
}

TEST_F(CliTest, FactorizeCsvTables) {
    const RunResult r = run("factorize --fn exp_sqrt --format csv");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string header;
    ASSERT_TRUE(std::getline(lines, header));
    EXPECT_EQ(header, "r,psi_hat,s,phi_check");
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    EXPECT_GE(rows, 2048u);
}

TEST_F(CliTest, ByteIdenticalReruns) {
    const std::string args = "factorize --fn exp_sqrt --grid-points 256";
    const RunResult a = run(args);
    const RunResult b = run(args);
    ASSERT_EQ(a.exit_code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(a.out.empty());
}

TEST_F(CliTest, OrliczSinglePointConcaveClosedForm) {
    const fs::path f = file("f.json", R"({"values": [4.0]})");
    const fs::path g = file("g.json", R"({"values": [0.0]})");
    const fs::path w = file("w.json", R"({"weights": [1.0]})");
    const RunResult r = run("orlicz --fn power:0.5 --f " + f.string() +
                            " --g " + g.string() + " --space " + w.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json doc = Json::parse(r.out);
    EXPECT_EQ(doc.at("command"), "orlicz");
    EXPECT_NEAR(doc.at("result").at("distance").get<double>(), 2.0, 1e-6);
    EXPECT_GE(doc.at("result").at("bisection_iterations").get<int>(), 1);
    const auto& bracket = doc.at("result").at("bracket");
    ASSERT_EQ(bracket.size(), 2u);
    EXPECT_LE(bracket[0].get<double>(), bracket[1].get<double>());
}

TEST_F(CliTest, WassersteinPointMassesWithCsvMetric) {
    const fs::path metric = file("d.csv", "0,3\n3,0\n");
    const fs::path mu = file("mu.json", R"({"weights": [1.0, 0.0]})");
    const fs::path nu = file("nu.json", R"({"weights": [0.0, 1.0]})");
    const RunResult r = run("wasserstein --fn power:2 --mu " + mu.string() +
                            " --nu " + nu.string() + " --metric " +
                            metric.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json doc = Json::parse(r.out);
    EXPECT_NEAR(doc.at("result").at("distance").get<double>(), 3.0, 1e-5);
    EXPECT_LE(doc.at("result").at("transport_modular_at_w").get<double>(),
              1.0 + 1e-6);
    const auto& plan = doc.at("result").at("plan");
    EXPECT_DOUBLE_EQ(plan[0][1].get<double>(), 1.0);
    // Config echo carries the resolved tolerances.
    EXPECT_DOUBLE_EQ(doc.at("config").at("tol").get<double>(), 1e-6);
    EXPECT_EQ(doc.at("config").at("grid_points").get<int>(), 2048);
}

TEST_F(CliTest, WassersteinBatchManifest) {
    const fs::path metric = file("d.csv", "0,1\n1,0\n");
    const fs::path a = file("a.json", R"({"weights": [1.0, 0.0]})");
    const fs::path b = file("b.json", R"({"weights": [0.0, 1.0]})");
    const fs::path c = file("c.json", R"({"weights": [0.5, 0.5]})");
    const fs::path pairs = file(
        "pairs.json", std::string("{\"pairs\": [{\"mu\": \"") + a.string() +
                          "\", \"nu\": \"" + b.string() + "\"}, {\"mu\": \"" +
                          a.string() + "\", \"nu\": \"" + c.string() +
                          "\"}]}");
    const RunResult r = run("wasserstein --fn power:2 --pairs " +
                            pairs.string() + " --metric " + metric.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json doc = Json::parse(r.out);
    const auto& results = doc.at("results");
    ASSERT_EQ(results.size(), 2u);
    EXPECT_NEAR(results[0].at("distance").get<double>(), 1.0, 1e-5);
    EXPECT_FALSE(results[0].contains("plan"));
    EXPECT_GT(results[1].at("distance").get<double>(), 0.0);
}

TEST_F(CliTest, VerifyExactResidualSplitting) {
    const RunResult r =
        run("verify --fn exp_sqrt --phi exp_minus_one --psi power:0.5");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json doc = Json::parse(r.out);
    EXPECT_EQ(doc.at("mode"), "residual");
    EXPECT_LE(doc.at("result").at("sup").get<double>(), 1e-12);
}

TEST_F(CliTest, VerifyMinimalityGapIsNonPositive) {
    const RunResult r =
        run("verify --fn power:2 --candidate-psi power:0.5");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json doc = Json::parse(r.out);
    EXPECT_EQ(doc.at("mode"), "minimality");
    EXPECT_LT(doc.at("result").at("max_gap").get<double>(), 0.0);
}

TEST_F(CliTest, WritesToFileInsteadOfStdout) {
    const fs::path out = dir_ / "report.json";
    const RunResult r =
        run("factorize --fn power:1 --grid-points 128 --out " + out.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    const Json doc = Json::parse(slurp(out));
    EXPECT_EQ(doc.at("command"), "factorize");
}

TEST_F(CliTest, ValidationFailuresExitTwo) {
    const RunResult bad_fn = run("factorize --fn powerr:2");
    EXPECT_EQ(bad_fn.exit_code, 2);
    EXPECT_EQ(Json::parse(bad_fn.err).at("error").at("type"), "validation");

    const RunResult missing = run("orlicz --fn power:2 --f /no/such.json "
                                  "--g /no/such.json --space /no/such.json");
    EXPECT_EQ(missing.exit_code, 2);

    const RunResult bad_flag = run("factorize --fn power:2 --nonsense 1");
    EXPECT_EQ(bad_flag.exit_code, 2);

    const RunResult bad_grid = run("factorize --fn power:2 --grid-points 8");
    EXPECT_EQ(bad_grid.exit_code, 2);
}

TEST_F(CliTest, NumericalFailuresExitThree) {
    const RunResult r = run("factorize --fn power:0.0005");
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(Json::parse(r.err).at("error").at("type"), "numerical");
}

TEST_F(CliTest, HelpExitsZero) {
    const RunResult r = run("--help");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("factorize"), std::string::npos);
}

}  // namespace
