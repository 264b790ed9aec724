#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"

using namespace sdp;
using namespace sdp::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("sdp_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("equilibria report")
{
    const Run r = run({"equilibria", "--D", "1", "--alpha", "1", "--mu", "1"});
    REQUIRE(r.code == kOk);
    const Json j = Json::parse(r.out);
    CHECK(j["config"]["command"] == "equilibria");
    CHECK(j["config"]["params"]["D"] == 1.0);
    CHECK(j["result"].size() == 11);
}

TEST_CASE("exit codes for bad input")
{
    CHECK(run({"equilibria", "--D", "0", "--alpha", "1", "--mu", "1"}).code == kConfigError);
    CHECK(run({"equilibria", "--D", "1", "--alpha", "1"}).code == kConfigError);
    CHECK(run({"frobnicate", "--D", "1", "--alpha", "1", "--mu", "1"}).code == kConfigError);
    CHECK(run({"equilibria", "--D", "one"}).code == kConfigError);
    CHECK(run({"equilibria", "--D", "1", "--alpha", "1", "--mu", "1", "--format", "svg"}).code == kConfigError);
    CHECK(run({"shoot", "--D", "1", "--alpha", "1", "--mu", "1", "--eq", "E0"}).code == kConfigError);
    CHECK(run({"shoot", "--D", "1", "--alpha", "1", "--mu", "1", "--eq", "E1", "--branch", "Up"}).code ==
          kConfigError);
    CHECK(run({"scan", "--alpha", "1", "--mu", "1", "--D-min", "3", "--D-max", "4"}).code == kConfigError);
    CHECK(run({"check", "--D", "1", "--alpha", "1", "--mu", "1", "--tol", "0.5"}).code == kConfigError);
    CHECK(run({"equilibria", "--config", "/nonexistent/cfg.json"}).code == kIoError);
    CHECK(run({"equilibria", "--D", "1", "--alpha", "1", "--mu", "1", "--out", "/nonexistent/dir/e.json"}).code ==
          kIoError);
    const Run none = run({});
    CHECK(none.code == kConfigError);
    CHECK(none.err.find("error:") == 0);
}

TEST_CASE("config file with flag overrides")
{
    TempDir tmp;
    const fs::path cfg = tmp.path / "run.json";
    std::ofstream(cfg) << R"({"params": {"D": 4, "alpha": 1, "mu": 1}, "command": "equilibria", "options": {"tol": 1e-9}})";
    const Run a = run({"--config", cfg.string()});
    REQUIRE(a.code == kOk);
    CHECK(Json::parse(a.out)["config"]["params"]["D"] == 4.0);
    const Run b = run({"--config", cfg.string(), "--D", "2"});
    REQUIRE(b.code == kOk);
    const Json jb = Json::parse(b.out);
    CHECK(jb["config"]["params"]["D"] == 2.0);
    CHECK(jb["config"]["options"]["tol"] == 1e-9);

    // The effective config of a report runs again as a config file.
    const fs::path again = tmp.path / "again.json";
    std::ofstream(again) << jb["config"].dump();
    const Run c = run({"--config", again.string()});
    REQUIRE(c.code == kOk);
    CHECK(c.out == b.out);

    const fs::path bad = tmp.path / "bad.json";
    std::ofstream(bad) << R"({"params": {"D": 1, "alpha": 1, "mu": 1, "beta": 0}, "command": "equilibria"})";
    CHECK(run({"--config", bad.string()}).code == kConfigError);
    const fs::path badopt = tmp.path / "badopt.json";
    std::ofstream(badopt) << R"({"params": {"D": 1, "alpha": 1, "mu": 1}, "command": "check", "options": {"color": 1}})";
    CHECK(run({"--config", badopt.string()}).code == kConfigError);
    const fs::path broken = tmp.path / "broken.json";
    std::ofstream(broken) << "{";
    CHECK(run({"--config", broken.string()}).code == kConfigError);
}

TEST_CASE("classify and scan")
{
    const Run c = run({"classify", "--D", "4", "--alpha", "1", "--mu", "1"});
    REQUIRE(c.code == kOk);
    const Json jc = Json::parse(c.out)["result"];
    CHECK(jc["regime"] == "Super");
    CHECK(jc["match"] == true);

    const Run t = run({"classify", "--D", "1", "--alpha", "1", "--mu", "1", "--mode", "tau"});
    CHECK(t.code == kOk);

    const Run s = run({"scan", "--alpha", "1", "--mu", "1", "--D-min", "0.5", "--D-max", "4"});
    REQUIRE(s.code == kOk);
    const Json js = Json::parse(s.out)["result"];
    CHECK(js["D_star"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(js["cross_checked"] == true);
}

TEST_CASE("check ledger passes at the reference parameters")
{
    for (const char* D : {"1", "2", "4"}) {
        const Run r = run({"check", "--D", D, "--alpha", "1", "--mu", "1"});
        INFO(r.out);
        CHECK(r.code == kOk);
        CHECK(r.out.find("FAIL") == std::string::npos);
        CHECK(r.out.find("PASS") != std::string::npos);
    }
}

TEST_CASE("shoot writes JSON and CSV that read back")
{
    TempDir tmp;
    const fs::path out = tmp.path / "e2.json";
    const Run r = run({"shoot", "--D", "1", "--alpha", "1", "--mu", "1", "--eq", "E2", "--branch", "UnstablePlus",
                       "--out", out.string()});
    REQUIRE(r.code == kOk);
    CHECK(r.out.empty());
    const Json j = Json::parse(slurp(out))["result"];
    CHECK(j["type"] == "qs- to qs+");
    CHECK(j["orbit"]["mode"] == "XTime");
    CHECK(real_from_json(j["h_drift"]) <= 1e-8);
    std::ifstream csv(tmp.path / "e2.csv");
    const std::vector<OrbitSample> samples = read_orbit_csv(csv);
    CHECK(samples.size() == j["orbit"]["sample_count"].get<std::size_t>());
    const Orbit back = orbit_from_json(j["orbit"], samples);
    CHECK(back.source == EquilibriumId::E2);
    CHECK(back.target == EquilibriumId::E2);

    const Run c = run({"shoot", "--D", "1", "--alpha", "1", "--mu", "1", "--eq", "E2", "--format", "csv"});
    REQUIRE(c.code == kOk);
    CHECK(c.out == slurp(tmp.path / "e2.csv"));

    // Nodes default to their first admissible branch.
    CHECK(run({"shoot", "--D", "1", "--alpha", "1", "--mu", "1", "--eq", "E4"}).code == kOk);
}

TEST_CASE("outputs are byte-identical across runs")
{
    TempDir tmp;
    for (int i = 0; i < 2; ++i) {
        const fs::path svg = tmp.path / ("p" + std::to_string(i) + ".svg");
        REQUIRE(run({"portrait", "--D", "2", "--alpha", "1", "--mu", "1", "--out", svg.string()}).code == kOk);
    }
    CHECK(slurp(tmp.path / "p0.svg") == slurp(tmp.path / "p1.svg"));
    CHECK(fs::exists(tmp.path / "p0_orbits" / "index.json"));
    CHECK(slurp(tmp.path / "p0_orbits" / "orbit_00.csv") == slurp(tmp.path / "p1_orbits" / "orbit_00.csv"));
    const Json index = Json::parse(slurp(tmp.path / "p0_orbits" / "index.json"))["result"];
    for (const Json& h : index)
        CHECK(fs::exists(tmp.path / "p0_orbits" / h["file"].get<std::string>()));

    const Run a = run({"classify", "--D", "1.3", "--alpha", "0.7", "--mu", "2"});
    const Run b = run({"classify", "--D", "1.3", "--alpha", "0.7", "--mu", "2"});
    CHECK(a.out == b.out);
}
