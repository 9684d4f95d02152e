#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

Outcome run(const std::string& args) {
    const std::string cmd = std::string(EMFLOW_BIN) + " " + args + " 2>&1";
    Outcome r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.out += buf.data();
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string scene(const std::string& name) { return std::string(SCENE_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("emflow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string out() const { return "--out-dir " + dir_.string(); }
    fs::path dir_;
};

// numeric cells of the final CSV row
std::vector<double> last_row(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    std::vector<double> v;
    std::stringstream ss(last);
    for (std::string c; std::getline(ss, c, ',');) v.push_back(std::stod(c));
    return v;
}

} // namespace

TEST_F(Cli, IntegrateHyperbolicEndpoint) {
    const Outcome r = run("integrate --scene " + scene("minkowski_E.toml") + " --system lfe --qm 1 --span 1 " + out());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto row = last_row(dir_ / "minkowski_E_integrate.csv");
    ASSERT_EQ(row.size(), 10u);
    EXPECT_NEAR(row[1], std::sinh(1.0), 1e-7);
    EXPECT_NEAR(row[2], std::cosh(1.0) - 1.0, 1e-7);
    EXPECT_NEAR(row[9], 1.0, 1e-8);

    const auto j = nlohmann::json::parse(slurp(dir_ / "minkowski_E_integrate.json"));
    EXPECT_EQ(j["system"], "lfe");
    EXPECT_EQ(j["parametrization"]["kind"], "proper_time");
    EXPECT_FALSE(j["samples"].empty());
}

TEST_F(Cli, CsvHeader) {
    ASSERT_EQ(run("integrate --scene " + scene("minkowski_free.toml") + " " + out()).code, 0);
    std::ifstream in(dir_ / "minkowski_free_integrate.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "lambda,x0,x1,x2,x3,v0,v1,v2,v3,norm");
}

TEST_F(Cli, FreeParticleHasNoDrift) {
    const Outcome r = run("integrate --scene " + scene("minkowski_free.toml") + " " + out());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto row = last_row(dir_ / "minkowski_free_integrate.csv");
    EXPECT_NEAR(row[0], 2.0, 1e-12);
    EXPECT_NEAR(row[1], 2.0, 1e-9);
    EXPECT_NEAR(row[9], 1.0, 1e-12);
}

TEST_F(Cli, TwistedFlowReportsHamiltonianDrift) {
    const Outcome r = run("integrate --scene " + scene("schwarzschild_coulomb.toml") + " " + out());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("H drift"), std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir_ / "schwarzschild_coulomb_integrate.json"));
    EXPECT_LT(j["diagnostics"]["hamiltonian_drift"].get<double>(), 1e-8);
}

TEST_F(Cli, CyclotronReturnsToStart) {
    ASSERT_EQ(run("integrate --scene " + scene("cyclotron.toml") + " " + out()).code, 0);
    const auto row = last_row(dir_ / "cyclotron_integrate.csv");
    EXPECT_NEAR(row[1], 0.0, 1e-7);
    EXPECT_NEAR(row[2], 0.0, 1e-7);
    EXPECT_NEAR(row[4], 1.0, 1e-7);
}

TEST_F(Cli, ConnectConverges) {
    const Outcome r = run("connect --scene " + scene("minkowski_E.toml") + " " + out());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto row = last_row(dir_ / "minkowski_E_connect.csv");
    EXPECT_NEAR(row[1], 2.0, 1e-6);
    EXPECT_NEAR(row[2], 0.5, 1e-6);
    EXPECT_NEAR(row[3], 0.3, 1e-6);
}

TEST_F(Cli, ConnectEfeReportsRatio) {
    const Outcome r = run("connect --scene " + scene("minkowski_E.toml") + " --kind efe --eps 1 " + out());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("ratio_Q_over_C"), std::string::npos);
}

TEST_F(Cli, SpacelikeConnectionIsNumericalFailure) {
    const fs::path s = dir_ / "spacelike.toml";
    std::ofstream(s) << "dimension = 4\n[metric]\nname = \"minkowski\"\n[field]\nname = \"none\"\n"
                        "[events]\nx0 = [0.0, 0.0, 0.0, 0.0]\nx1 = [1.0, 3.0, 0.0, 0.0]\n[run]\nqm = 1.0\nrestarts = 1\n";
    const Outcome r = run("connect --scene " + s.string() + " " + out());
    EXPECT_EQ(r.code, 3) << r.out;
}

TEST_F(Cli, ScanIsCompleteAndDeterministic) {
    const Outcome a = run("scan --scene " + scene("minkowski_E.toml") + " --qm-grid 0.1:1.0:10 --name a " + out());
    ASSERT_EQ(a.code, 0) << a.out;
    EXPECT_NE(a.out.find("10/10 converged"), std::string::npos);
    const Outcome b = run("scan --scene " + scene("minkowski_E.toml") + " --qm-grid 0.1:1.0:10 --workers 1 --name b " + out());
    ASSERT_EQ(b.code, 0) << b.out;
    const std::string ca = slurp(dir_ / "a.csv");
    EXPECT_EQ(ca, slurp(dir_ / "b.csv"));
    EXPECT_EQ(ca.substr(0, ca.find('\n')), "qm,converged,miss_norm,proper_length,action_I");
    EXPECT_EQ(std::count(ca.begin(), ca.end(), '\n'), 11);
}

TEST_F(Cli, BadGridIsConfigurationError) {
    EXPECT_EQ(run("scan --scene " + scene("minkowski_E.toml") + " --qm-grid 0.1:1.0 " + out()).code, 2);
}

TEST_F(Cli, ActionOnRestSegment) {
    const Outcome r = run("action --scene " + scene("minkowski_B.toml") + " --which I " + out());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(slurp(dir_ / "minkowski_B_action.json"));
    EXPECT_NEAR(j["value"].get<double>(), 3.0, 1e-12);
}

TEST_F(Cli, ExtremizeJReportsConstraint) {
    const Outcome r = run("action --scene " + scene("minkowski_E.toml") + " --which J --extremize --Q 1 " + out());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("relative error"), std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir_ / "minkowski_E_action.json"));
    EXPECT_LT(j["report"]["neo"]["relative_error"].get<double>(), 1e-3);
    EXPECT_TRUE(j["report"]["neo"]["bound_satisfied"].get<bool>());
}

TEST_F(Cli, UnknownKeyNamesTheLine) {
    const fs::path s = dir_ / "bad.toml";
    std::ofstream(s) << "dimension = 4\n[metric]\nname = \"minkowski\"\nbogus = 1\n[field]\nname = \"none\"\n";
    const Outcome r = run("check --scene " + s.string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("bad.toml:4"), std::string::npos) << r.out;
}

TEST_F(Cli, TomlSyntaxErrorIsConfigurationError) {
    const fs::path s = dir_ / "broken.toml";
    std::ofstream(s) << "dimension = \n";
    EXPECT_EQ(run("integrate --scene " + s.string() + " " + out()).code, 2);
}

TEST_F(Cli, UnknownFlagIsConfigurationError) {
    EXPECT_EQ(run("integrate --scene " + scene("minkowski_E.toml") + " --frobnicate").code, 2);
}

TEST_F(Cli, CheckPassesOnShippedScenes) {
    for (const auto& e : fs::directory_iterator(SCENE_DIR)) {
        if (e.path().extension() != ".toml") continue;
        const Outcome r = run("check --scene " + e.path().string());
        EXPECT_EQ(r.code, 0) << e.path() << "\n" << r.out;
    }
}

TEST_F(Cli, SchemaIsJson) {
    const Outcome r = run("schema");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_TRUE(j.contains("metric"));
}

TEST_F(Cli, OutputDirFromEnvironment) {
    const std::string cmd = "EMFLOW_OUTPUT_DIR=" + dir_.string() + " " + std::string(EMFLOW_BIN) + " integrate --scene " +
                            scene("minkowski_free.toml") + " > /dev/null 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(dir_ / "minkowski_free_integrate.csv"));
}
