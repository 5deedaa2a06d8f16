#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cnmot/errors.hpp"
#include "cnmot/io.hpp"
#include "cnmot/numeraire.hpp"
#include "cnmot/paths.hpp"

using namespace cnmot;
namespace fs = std::filesystem;

namespace {

std::string tmp(const std::string& name)
{
    fs::path d = fs::temp_directory_path() / "cnmot_test_io";
    fs::create_directories(d);
    return (d / name).string();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream(path) << text;
}

}  // namespace

TEST(Io, FormatAndRound)
{
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0 / 3.0), "0.3333333333333333");
    EXPECT_EQ(round_sig(1.0 / 3.0, 15), 0.333333333333333);
    EXPECT_EQ(round_sig(0.0), 0.0);
}

TEST(Io, MeasureRoundTrip)
{
    Measure1D m({0.1, 1.0 / 3.0, 7.5}, {0.2, 0.3, 0.5});
    write_json(tmp("m.json"), measure_to_json(m));
    Measure1D r = read_measure(tmp("m.json"));
    EXPECT_EQ(r.atoms(), m.atoms());
    EXPECT_EQ(r.weights(), m.weights());
}

TEST(Io, LawFormats)
{
    Law g = law_from_json(Json::parse(R"({"gaussian":{"mean":1,"sd":2,"n":512}})"));
    const CdfGrid& F = std::get<CdfGrid>(g);
    EXPECT_EQ(F.size(), 512u);
    EXPECT_NEAR(F.mean(), 1.0, 1e-6);
    Law grid = law_from_json(Json::parse(R"({"grid":{"x":[0,1,2],"F":[0,0.5,1]}})"));
    EXPECT_NEAR(std::get<CdfGrid>(grid).mean(), 1.0, 1e-14);
    write_cdf_csv(tmp("F.csv"), F);
    CdfGrid back = std::get<CdfGrid>(read_law(tmp("F.csv")));
    EXPECT_EQ(back.grid(), F.grid());
    EXPECT_EQ(back.values(), F.values());
    EXPECT_THROW(law_from_json(Json::parse(R"({"gaussian":{"mean":0,"sd":-1}})")), InvalidInput);
}

TEST(Io, CouplingRoundTrip)
{
    MartingaleCoupling pi({1.0, 2.0}, {0.5, 1.5, 3.0}, {0.2, 0.2, 0.0, 0.0, 0.4, 0.2});
    write_json(tmp("c.json"), coupling_to_json(pi));
    MartingaleCoupling r = read_coupling(tmp("c.json"));
    EXPECT_EQ(r.weights(), pi.weights());
    EXPECT_EQ(r.source(), pi.source());
    EXPECT_EQ(r.target(), pi.target());
}

TEST(Io, CouplingRejectsInconsistentMarginals)
{
    Json j = Json::parse(R"({"source":{"atoms":[1],"weights":[1]},"target":{"atoms":[0,2],"weights":[0.3,0.7]},
                             "weights":[[0.5,0.5]]})");
    EXPECT_THROW(coupling_from_json(j), InvalidInput);
    Json k = Json::parse(R"({"source":{"atoms":[1]},"target":{"atoms":[0,2]},"weights":[[0.5]]})");
    EXPECT_THROW(coupling_from_json(k), InvalidInput);
}

TEST(Io, LiftedAndEnsembleCsv)
{
    LiftedCoupling pi({{1.0, 0.25, 0.5, 0.25}, {1.0, 0.25, 1.5, 0.25}, {2.0, 0.75, 2.0, 0.5}});
    write_lifted_csv(tmp("l.csv"), pi);
    LiftedCoupling r = read_lifted_csv(tmp("l.csv"));
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r.cells()[1].x1, 1.5);
    EXPECT_EQ(r.cells()[2].u, 0.75);

    SimConfig cfg;
    cfg.n_paths = 50;
    cfg.n_steps = 8;
    PathEnsemble e = sample_brownian(Law{Measure1D::dirac(2.0)}, cfg);
    write_ensemble_csv(tmp("e.csv"), e);
    PathEnsemble b = read_ensemble_csv(tmp("e.csv"));
    EXPECT_EQ(b.values, e.values);
    EXPECT_EQ(b.times, e.times);
    write_ensemble_csv(tmp("e10.csv"), e, 10);
    PathEnsemble c = read_ensemble_csv(tmp("e10.csv"));
    EXPECT_EQ(c.n_paths, 10u);
}

TEST(Io, MalformedFiles)
{
    write_text(tmp("bad.json"), "{\"atoms\": [1, 2], \"weights\": [0.5]");
    EXPECT_THROW(read_measure(tmp("bad.json")), InvalidInput);
    write_text(tmp("short.json"), R"({"atoms": [1, 2], "weights": [0.5]})");
    EXPECT_THROW(read_measure(tmp("short.json")), InvalidInput);
    write_text(tmp("bad.csv"), "x0,u,x1,w\n1,0.5,abc,1\n");
    EXPECT_THROW(read_lifted_csv(tmp("bad.csv")), InvalidInput);
    EXPECT_THROW(read_measure(tmp("does_not_exist.json")), InvalidInput);
    write_text(tmp("g.json"), R"({"gaussian":{"mean":0,"sd":1}})");
    EXPECT_THROW(read_measure(tmp("g.json")), InvalidInput);
}

TEST(Io, ReportJson)
{
    CheckReport r;
    r.name = "x";
    r.lhs = 1.0;
    r.rhs = 1.5;
    r.diff = 0.5;
    r.mc_error = 0.1;
    r.allowance = 0.3;
    r.pass = r.diff <= r.threshold();
    r.extra["k"] = 2.0;
    Json j = report_to_json(r);
    EXPECT_EQ(j["lhs"], 1.0);
    EXPECT_EQ(j["pass"], true);
    EXPECT_DOUBLE_EQ(j["threshold"].get<double>(), 0.6);
    EXPECT_EQ(j["extra"]["k"], 2.0);
}
