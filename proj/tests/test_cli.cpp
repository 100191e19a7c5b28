#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / ("solvable_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

Outcome run(const std::string& args, const std::string& env = {}) {
    const fs::path capture = scratch() / "stdout.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" SOLVABLE_CLI "\" " + args + " > \"" +
                            capture.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::stringstream buf;
    buf << in.rdbuf();
    o.out = buf.str();
    return o;
}

std::string recipe(const char* name) { return std::string("\"") + SOLVABLE_RECIPES + "/" + name + "\""; }

std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST(Cli, CatalogTable) {
    const auto o = run("catalog");
    EXPECT_EQ(o.code, 0);
    for (const char* key : {"zero", "rational_quartic", "inverse_square_shape", "exponential", "singular_quartic",
                            "coulomb"}) {
        EXPECT_NE(o.out.find(key), std::string::npos) << key;
    }
}

TEST(Cli, CatalogJsonAndFilter) {
    const auto all = run("catalog --json");
    ASSERT_EQ(all.code, 0);
    const auto j = nlohmann::json::parse(all.out);
    EXPECT_EQ(j["catalog"].size(), 6u);
    const auto some = run("catalog --json --filter singular");
    ASSERT_EQ(some.code, 0);
    const auto k = nlohmann::json::parse(some.out);
    ASSERT_EQ(k["catalog"].size(), 1u);
    EXPECT_EQ(k["catalog"][0]["key"], "singular_quartic");
}

TEST(Cli, ComposeWritesReportAndPlot) {
    const fs::path dir = scratch() / "compose";
    fs::remove_all(dir);
    const auto o = run("compose " + recipe("grosse_two_nodes.json") + " --out \"" + dir.string() + "\"");
    EXPECT_EQ(o.code, 0) << o.out;
    ASSERT_TRUE(fs::exists(dir / "grosse_two_nodes.report.json"));
    ASSERT_TRUE(fs::exists(dir / "grosse_two_nodes.csv"));
    const auto report = nlohmann::json::parse(read(dir / "grosse_two_nodes.report.json"));
    EXPECT_EQ(report["schema"], "solvable-report/1");
    EXPECT_TRUE(report["passed"].get<bool>());
    EXPECT_EQ(report["levels"][0]["node_count_composed"], 2);
    EXPECT_EQ(read(dir / "grosse_two_nodes.csv").substr(0, 10), "r,V,phi,x\n");
}

TEST(Cli, ReportIsReproducible) {
    const fs::path a = scratch() / "a", b = scratch() / "b";
    ASSERT_EQ(run("compose " + recipe("theorem1_O_P.json") + " --out \"" + a.string() + "\"").code, 0);
    ASSERT_EQ(run("compose " + recipe("theorem1_O_P.json") + " --out \"" + b.string() + "\"").code, 0);
    EXPECT_EQ(read(a / "theorem1_O_P.report.json"), read(b / "theorem1_O_P.report.json"));
}

TEST(Cli, OutputDirectoryFromEnvironment) {
    const fs::path dir = scratch() / "env";
    fs::remove_all(dir);
    const auto o = run("compose " + recipe("identity_theorem1.json"), "SOLVABLE_OUT_DIR=\"" + dir.string() + "\"");
    EXPECT_EQ(o.code, 0) << o.out;
    EXPECT_TRUE(fs::exists(dir / "identity_theorem1.report.json"));
    EXPECT_TRUE(fs::exists(dir / "identity_theorem1.csv"));
}

TEST(Cli, VerifyPassesAndPrintsChecks) {
    const auto o = run("verify " + recipe("theorem2_full.json"));
    EXPECT_EQ(o.code, 0) << o.out;
    EXPECT_NE(o.out.find("residual"), std::string::npos);
    EXPECT_NE(o.out.find("PASS"), std::string::npos);
}

TEST(Cli, VerifyJson) {
    const auto o = run("verify --json " + recipe("higher_ell_free.json"));
    ASSERT_EQ(o.code, 0) << o.out;
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_FALSE(j["composed"]["selected_variant"].is_null());
}

TEST(Cli, MissingSlotIsInputError) {
    const auto o = run("verify " + recipe("theorem2_missing_v1.json"));
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.out.find("V1"), std::string::npos) << o.out;
}

TEST(Cli, UnreachableToleranceFails) {
    const auto o = run("--tol 1e-30 verify " + recipe("identity_theorem1.json"));
    EXPECT_EQ(o.code, 1) << o.out;
    EXPECT_NE(o.out.find("FAIL"), std::string::npos);
}

TEST(Cli, BadArgumentsAreInputErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("verify /nonexistent/recipe.json").code, 2);
    EXPECT_EQ(run("--tol -1 verify " + recipe("identity_theorem1.json")).code, 2);
}

TEST(Cli, IteratedRecipe) {
    const auto o = run("verify " + recipe("grosse_depth3.json"));
    EXPECT_EQ(o.code, 0) << o.out;
    EXPECT_NE(o.out.find("level 3"), std::string::npos);
}

TEST(Cli, ExportPlot) {
    const fs::path dir = scratch() / "plot";
    fs::remove_all(dir);
    const auto o = run("export-plot " + recipe("grosse_singular.json") + " --out \"" + dir.string() + "\"");
    EXPECT_EQ(o.code, 0) << o.out;
    const std::string csv = read(dir / "grosse_singular.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 401);
}
