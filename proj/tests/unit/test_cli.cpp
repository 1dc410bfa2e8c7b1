#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mfgsel/cli.hpp"

using namespace mfgsel;
namespace fs = std::filesystem;

namespace {

cli::RunConfig parse(std::vector<const char*> args) {
    args.insert(args.begin(), "mfgsel");
    return cli::parse_config(static_cast<int>(args.size()), args.data());
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mfgsel_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(MFGSEL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("configuration defaults and validation") {
    const auto c = parse({"solve", "--epsilon", "0.1", "--potential", "sine", "--c", "0.3"});
    CHECK(c.command == "solve");
    CHECK(c.n == 512);
    CHECK(c.tol == 1e-10);
    CHECK(c.sigma == 0.0);
    CHECK(c.delta == 0.0);
    CHECK(c.epsilon == 0.1);
    CHECK_THROWS_AS(parse({"solve", "--epsilon", "-1"}), UsageError);
    CHECK_THROWS_AS(parse({"solve", "--bogus", "1"}), UsageError);
    CHECK_THROWS_AS(parse({"solve", "--n", "ten"}), UsageError);
    CHECK_THROWS_AS(parse({"select", "--eps-ladder", "0.1,0.2"}), UsageError);
    CHECK_THROWS_AS(parse({"select", "--eps-ladder", "0.1,x"}), UsageError);
    CHECK_THROWS_AS(parse({"solve", "--potential", "nope"}), UsageError);
    CHECK_THROWS_AS(parse({"example", "cube"}), UsageError);
    CHECK_THROWS_AS(parse({"corrector"}), UsageError);
    CHECK_THROWS_AS(parse({}), UsageError);

    const auto s = parse({"select", "--model", "exdp", "--eps-ladder", "0.2,0.1"});
    CHECK(s.potential == "cos2pi");
    CHECK(s.ladder == std::vector<double>{0.2, 0.1});
}

TEST_CASE("flags override the file") {
    const auto dir = scratch("config");
    const auto file = dir / "run.json";
    std::ofstream(file) << R"({"model": {"potential": "cos4pi"}, "grid": {"n": 64}, "solver": {"epsilon": 0.3}})";
    const auto c = parse({"solve", "--config", file.c_str(), "--n", "128"});
    CHECK(c.n == 128);
    CHECK(c.epsilon == 0.3);
    CHECK(c.potential == "cos4pi");
    REQUIRE(c.overrides.size() == 1);
    CHECK(c.overrides[0] == "grid.n");
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK_THROWS_AS(parse({"solve", "--config", (dir / "bad.json").c_str()}), UsageError);
}

TEST_CASE("solve writes fields, sidecar and metadata") {
    const auto dir = scratch("solve");
    auto c = parse({"solve", "--epsilon", "0.1", "--n", "64", "--out", dir.c_str()});
    CHECK(cli::run(c) == 0);
    const std::string csv = slurp(dir / "solution.csv");
    CHECK(csv.rfind("x,u,m\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    const auto side = io::read_json(dir / "solution.json");
    for (const char* k : {"epsilon", "residual_sup", "iters", "mass", "min_m", "eps_u_min", "eps_u_max"}) CHECK(side.contains(k));
    const auto meta = io::read_json(dir / "meta.json");
    CHECK(meta["config"]["grid"]["n"] == 64);
    CHECK(meta.contains("version"));

    const std::string first = slurp(dir / "solution.csv");
    CHECK(cli::run(c) == 0);
    CHECK(slurp(dir / "solution.csv") == first);
}

TEST_CASE("example and select outputs") {
    const auto dir = scratch("example");
    CHECK(cli::run(parse({"example", "exlp", "--n", "256", "--out", dir.c_str()})) == 0);
    CHECK(fs::exists(dir / "m.csv"));
    CHECK(fs::exists(dir / "candidate_tilde.csv"));
    CHECK(fs::exists(dir / "candidate_hat.csv"));
    CHECK(fs::exists(dir / "meta.json"));

    const auto sel = scratch("select");
    CHECK(cli::run(parse({"select", "--model", "exdp", "--n", "256", "--eps-ladder", "0.2,0.1", "--out", sel.c_str()})) == 0);
    const std::string csv = slurp(sel / "sweep.csv");
    CHECK(csv.rfind("eps,sigma,delta,Hbar_est,F_value,mass,min_m,holonomy_max,action_gap,coupling_gap", 0) == 0);
    const auto v = io::read_json(sel / "verdict.json");
    CHECK(v["nearest"] == "tilde");
}

TEST_CASE("corrector command") {
    const auto dir = scratch("corrector");
    std::ofstream(dir / "base.json") << R"({"model": {"potential": "sine", "c": 0.3}, "grid": {"n": 128}})";
    const auto base = (dir / "base.json").string();
    CHECK(cli::run(parse({"corrector", "--base", base.c_str(), "--epsilon-list", "0.2,0.1,0.05", "--out", dir.c_str()})) == 0);
    const auto j = io::read_json(dir / "corrector.json");
    CHECK(j.contains("lambda"));
    CHECK(j["route_agreement"]["agree"] == true);
    CHECK(j["slopes"]["e_u"].get<double>() > 0.8);
    CHECK(slurp(dir / "corrector.csv").rfind("x,v,theta\n", 0) == 0);
}

TEST_CASE("exit codes of the binary") {
    const auto dir = scratch("exit");
    CHECK(run_binary("solve --epsilon -1") == 2);
    CHECK(run_binary("frobnicate") == 2);
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("verify --n 128 --out " + (dir / "v").string()) == 0);
    CHECK(run_binary("solve --potential exdp --epsilon 0.05 --n 512 --max-iters 1 --out " + (dir / "s").string()) == 1);
    CHECK(fs::exists(dir / "s" / "meta.json"));
    CHECK(fs::exists(dir / "s" / "solution.json"));
}
