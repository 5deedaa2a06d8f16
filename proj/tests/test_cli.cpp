#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cnmot/io.hpp"

using namespace cnmot;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir()
{
    static const fs::path d = [] {
        fs::path p = fs::temp_directory_path() / "cnmot_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string file(const std::string& name) { return (workdir() / name).string(); }

void write_text(const std::string& name, const std::string& text) { std::ofstream(file(name)) << text; }

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// Runs the CLI and returns its exit status; stdout+stderr land in `log`.
int run(const std::string& args, std::string* log = nullptr, const std::string& env = "")
{
    std::string out = file("last.log");
    std::string cmd = env + " " + CNMOT_CLI + " " + args + " > " + out + " 2>&1";
    int st = std::system(cmd.c_str());
    if (log) *log = slurp(out);
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        write_text("m13.json", R"({"atoms":[1,3],"weights":[0.5,0.5]})");
        write_text("neg.json", R"({"atoms":[-1,3],"weights":[0.5,0.5]})");
        write_text("mu.json", R"({"atoms":[0.8,1.25],"weights":[0.5555555555555556,0.4444444444444444]})");
        write_text("nu.json", R"({"atoms":[0.5,1,2],"weights":[0.4,0.4,0.2]})");
        write_text("dirac.json", R"({"atoms":[1],"weights":[1]})");
        write_text("pi.json", R"({"source":{"atoms":[0.8,1.25],"weights":[0.555555555555555,0.444444444444445]},
            "target":{"atoms":[0.5,1.0,2.0],"weights":[0.4,0.4,0.2]},
            "weights":[[0.222222222222222,0.333333333333333,0.0],[0.177777777777778,0.0666666666666667,0.2]]})");
    }
};

}  // namespace

TEST_F(Cli, TransformMeasureExample)
{
    ASSERT_EQ(run("transform --measure " + file("m13.json") + " --out " + file("t.json")), 0);
    Json j = read_json(file("t.json"));
    // 1/2 d_1 + 1/2 d_3 -> 1/4 d_1 + 3/4 d_{1/3}
    EXPECT_NEAR(j["atoms"][0].get<double>(), 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(j["weights"][0].get<double>(), 0.75, 1e-14);
    EXPECT_EQ(j["atoms"][1].get<double>(), 1.0);
    EXPECT_NEAR(j["weights"][1].get<double>(), 0.25, 1e-14);
    EXPECT_LT(j["verification"]["involution_residual"].get<double>(), 1e-12);
    EXPECT_NEAR(j["verification"]["barycenter_product"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(j["config"]["subcommand"], "transform");
}

TEST_F(Cli, TransformCouplingTwiceIsByteIdentical)
{
    ASSERT_EQ(run("transform --coupling " + file("pi.json") + " --out " + file("s1.json")), 0);
    ASSERT_EQ(run("transform --coupling " + file("s1.json") + " --out " + file("s2.json")), 0);
    Json a = read_json(file("pi.json")), b = read_json(file("s2.json"));
    for (const char* k : {"source", "target", "weights"}) EXPECT_EQ(a[k].dump(), b[k].dump()) << k;
    EXPECT_EQ(slurp(file("s2.json")).find("config") != std::string::npos, true);
    EXPECT_LT(read_json(file("s1.json"))["verification"]["martingale_residual"].get<double>(), 1e-12);
}

TEST_F(Cli, TransformNonPositiveExitsThree)
{
    std::string log;
    EXPECT_EQ(run("transform --measure " + file("neg.json") + " --out-dir " + file("o"), &log), 3);
    EXPECT_NE(log.find("NonPositiveSupport"), std::string::npos);
}

TEST_F(Cli, BassExitCodes)
{
    EXPECT_EQ(run("bass --mu " + file("m13.json") + " --nu " + file("m13.json") + " --out-dir " + file("b0")), 4);
    EXPECT_EQ(run("bass --mu " + file("nu.json") + " --nu " + file("mu.json") + " --out-dir " + file("b1")), 4);
    ASSERT_EQ(run("bass --mu " + file("dirac.json") + " --nu " + file("nu.json") + " --out-dir " + file("b2")), 0);
    Json j = read_json(file("b2/bass.json"));
    EXPECT_EQ(j["solution"]["diagnostics"]["iterations"], 1);
    EXPECT_TRUE(fs::exists(file("b2/residuals.csv")));
    write_text("g1.json", R"({"gaussian":{"mean":0,"sd":1}})");
    write_text("g2.json", R"({"gaussian":{"mean":0,"sd":1.4142135623730951}})");
    EXPECT_EQ(run("bass --mu " + file("g1.json") + " --nu " + file("g2.json") +
                  " --grid-size 256 --max-iter 2 --out-dir " + file("b3")),
              5);
}

TEST_F(Cli, SimulateIsDeterministicAndPasses)
{
    std::string args = "simulate --mu " + file("mu.json") + " --nu " + file("nu.json") +
                       " --n-paths 4000 --n-steps 64 --seed 42 --check lemma35 --check ct-identity --h t1:1 --out-dir ";
    ASSERT_EQ(run(args + file("s1")), 0);
    ASSERT_EQ(run(args + file("s2") + " --threads 3"), 0);
    for (const char* f : {"bm.csv", "sbm.csv", "gsbm.csv"}) {
        std::string a = slurp(file(std::string("s1/") + f));
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(file(std::string("s2/") + f))) << f;
    }
    Json r = read_json(file("s1/report.json"));
    EXPECT_EQ(r["pass"], true);
    bool lemma = false, ct = false;
    for (const auto& c : r["checks"]) {
        EXPECT_EQ(c["pass"], true) << c["name"];
        lemma = lemma || c["name"] == "lemma35";
        ct = ct || c["name"] == "ct-identity:t1:1";
    }
    EXPECT_TRUE(lemma && ct);
    EXPECT_TRUE(fs::exists(file("s1/plot_paths.py")));
    EXPECT_EQ(r["config"]["seed"], "42");
}

TEST_F(Cli, SimulateRejectionBoundTooSmall)
{
    std::string log;
    int rc = run("simulate --mu " + file("mu.json") + " --nu " + file("nu.json") +
                     " --n-paths 2000 --n-steps 16 --resample rejection --bound 1.5 --out-dir " + file("r"),
                 &log);
    EXPECT_NE(rc, 0);
    EXPECT_NE(log.find("RejectionBoundViolated"), std::string::npos);
}

TEST_F(Cli, ShadowVerify)
{
    std::string log;
    ASSERT_EQ(run("shadow --mu " + file("mu.json") + " --nu " + file("nu.json") +
                      " --preset monotone --verify cn --out-dir " + file("sh1"),
                  &log),
              0);
    Json r = read_json(file("sh1/report.json"));
    EXPECT_EQ(r["pass"], true);
    EXPECT_LT(r["verification"]["max_diff"].get<double>(), 1e-8);
    EXPECT_TRUE(fs::exists(file("sh1/lifted.csv")));
    EXPECT_EQ(read_json(file("sh1/coupling.json"))["left_monotone"], true);

    ASSERT_EQ(run("shadow --mu " + file("mu.json") + " --nu " + file("nu.json") +
                  " --preset product --verify cn --out-dir " + file("sh2")),
              0);
    EXPECT_EQ(read_json(file("sh2/report.json"))["pass"], true);
}

TEST_F(Cli, ShadowDiracIsProduct)
{
    write_text("d7.json", R"({"atoms":[0.7],"weights":[1]})");
    ASSERT_EQ(run("shadow --mu " + file("d7.json") + " --nu " + file("nu.json") + " --preset product --out-dir " +
                  file("sh3")),
              4);
    // b(nu) = 1
    ASSERT_EQ(run("shadow --mu " + file("dirac.json") + " --nu " + file("nu.json") + " --preset product --out-dir " +
                  file("sh4")),
              0);
    Json c = read_json(file("sh4/coupling.json"));
    EXPECT_NEAR(c["weights"][0][0].get<double>(), 0.4, 1e-12);
    EXPECT_NEAR(c["weights"][0][1].get<double>(), 0.4, 1e-12);
    EXPECT_NEAR(c["weights"][0][2].get<double>(), 0.2, 1e-12);
}

TEST_F(Cli, McovAndValue)
{
    write_text("pm1.json", R"({"atoms":[-1,1],"weights":[0.5,0.5]})");
    std::string log;
    ASSERT_EQ(run("mcov --measure " + file("pm1.json") + " --out-dir " + file("mc"), &log), 0);
    EXPECT_NEAR(read_json(file("mc/mcov.json"))["mcov"].get<double>(), std::sqrt(2.0 / M_PI), 1e-6);
    ASSERT_EQ(run("value --mu " + file("mu.json") + " --nu " + file("nu.json") + " --kind gsbm --out-dir " + file("v")), 0);
    ASSERT_EQ(run("value --mu " + file("mu.json") + " --nu " + file("nu.json") + " --kind sbm --out-dir " + file("v2")), 0);
    EXPECT_GT(read_json(file("v/value.json"))["value"].get<double>(), 0.0);
    EXPECT_EQ(run("value --mu " + file("mu.json") + " --nu " + file("nu.json") + " --kind other --out-dir " + file("v3")), 2);
}

TEST_F(Cli, ConfigFileFlagsWinAndEnvOutDir)
{
    write_text("run.cfg", "# sample run\nn_paths = 1000\nn-steps = 16\nseed = 7\nmu = " + file("mu.json") +
                              "\nnu = " + file("nu.json") + "\n");
    ASSERT_EQ(run("simulate --config " + file("run.cfg") + " --seed 9", nullptr,
                  "CNMOT_OUT_DIR=" + file("envout")),
              0);
    Json r = read_json(file("envout/report.json"));
    EXPECT_EQ(r["config"]["seed"], "9");
    EXPECT_EQ(r["config"]["n-paths"], "1000");
    EXPECT_EQ(r["config"]["config_file"], file("run.cfg"));
    write_text("bad.cfg", "seed 7\n");
    EXPECT_EQ(run("simulate --config " + file("bad.cfg") + " --mu " + file("mu.json") + " --nu " + file("nu.json")), 2);
}

TEST_F(Cli, InvalidArguments)
{
    EXPECT_EQ(run("simulate --mu " + file("mu.json") + " --nu " + file("nu.json") + " --bogus 3"), 2);
    EXPECT_EQ(run("nosuchcommand"), 2);
    EXPECT_EQ(run("transform --out-dir " + file("x")), 2);
    EXPECT_EQ(run("--help"), 0);
}
