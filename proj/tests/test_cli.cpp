#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "subkam/config.hpp"

using namespace subkam;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

fs::path scratch()
{
    static const fs::path root = [] {
        const fs::path p = fs::temp_directory_path() / ("subkam_cli_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

Result run_cli(const std::string& args)
{
    const std::string cmd = std::string(SUBKAM_CLI_PATH) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path write_config(const std::string& name, const json& j)
{
    const fs::path p = scratch() / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

json small_reduce()
{
    return {
        {"problem", {{"potential", std::string(SUBKAM_DATA_DIR) + "/cos_potential.txt"}, {"eps", 1e-5}, {"N", 8}}},
        {"kam", {{"max_steps", 2}}},
        {"params", {{"lo", {2.7}}, {"hi", {2.7}}, {"samples", 1}, {"seed", 3}}},
        {"verify", {{"horizon", 2.0}, {"dt", 0.05}, {"points", 5}}},
    };
}

} // namespace

TEST_CASE("minimal config takes documented defaults")
{
    const RunConfig c = parse_config("{}");
    CHECK(c.command == Command::Reduce);
    CHECK(c.problem.synthetic == "cos");
    CHECK(c.problem.N == 32);
    CHECK(c.problem.eps == 1e-5);
    CHECK(c.kam.gamma == 0.5);
    CHECK(c.kam.profile == TauProfile::Desk);
    CHECK(c.kam.lattice_cutoff == 32);
    CHECK(c.params.samples == 1);
    CHECK(c.measure.gammas == std::vector<double>{0.2, 0.1, 0.05});
    CHECK(c.sweep.cutoffs == std::vector<int>{16, 32, 64, 128});
}

TEST_CASE("config errors list every violation")
{
    try {
        parse_config(R"({"problem": {"beta": 0.3}, "kam": {"profile": "paper", "tau1": 5, "gamma": -1}})");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        std::string all;
        for (const auto& v : e.violations) all += v + "\n";
        CHECK(all.find("alpha + beta >= 1") != std::string::npos);
        CHECK(all.find("d + 3 + 4/alpha^2 = 20") != std::string::npos);
        CHECK(all.find("gamma must be positive") != std::string::npos);
        CHECK(e.violations.size() >= 3);
    }
    try {
        parse_config("{\n  \"kam\": {\"gamma\": 0.5,,}\n}");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
    try {
        parse_config(R"({"kam": {"gama": 0.5, "max_steps": "four"}})");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        std::string all;
        for (const auto& v : e.violations) all += v + "\n";
        CHECK(all.find("kam.gama") != std::string::npos);
        CHECK(all.find("kam.max_steps") != std::string::npos);
    }
}

TEST_CASE("cli maps failures to exit codes and error.json")
{
    const fs::path out = scratch() / "bad";
    const Result missing = run_cli("reduce --config " + (scratch() / "nope.json").string() + " --out " + out.string());
    CHECK(missing.code == 6);
    CHECK(missing.output.find("reason=io exit=6") != std::string::npos);

    json bad = small_reduce();
    bad["problem"]["beta"] = 0.3;
    const Result cfg = run_cli("reduce --config " + write_config("bad.json", bad).string() + " --out " + out.string());
    CHECK(cfg.code == 2);
    CHECK(cfg.output.find("reason=config") != std::string::npos);
    CHECK(read_json(out / "error.json").at("reason") == "config");

    json empty = small_reduce();
    empty["params"]["lo"] = {0.0};
    empty["params"]["hi"] = {0.0};
    const fs::path out4 = scratch() / "empty";
    const Result e = run_cli("reduce --config " + write_config("empty.json", empty).string() + " --out " + out4.string());
    CHECK(e.code == 4);
    CHECK(read_json(out4 / "error.json").at("reason") == "empty_parameter_set");

    CHECK(run_cli("reduce --out " + out.string()).code == 2);
    CHECK(run_cli("verify --config " + write_config("v.json", small_reduce()).string() + " --out " + out.string()).code
          == 2);
}

TEST_CASE("reduce is deterministic and verify reproduces the checkpoint")
{
    const fs::path cfg = write_config("reduce.json", small_reduce());
    const fs::path a = scratch() / "run_a", b = scratch() / "run_b";
    REQUIRE(run_cli("reduce --config " + cfg.string() + " --out " + a.string()).code == 0);
    REQUIRE(run_cli("reduce --config " + cfg.string() + " --out " + b.string()).code == 0);
    for (const char* f : {"steps.csv", "eps.csv", "samples.csv", "conjugacy.csv", "trajectory.csv"}) {
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const json s = read_json(a / "summary.json");
    CHECK(s.at("eps_sequences").at(0).size() == 3);
    CHECK(s.at("conjugacy").at("max_error").get<double>() <= s.at("conjugacy").at("bound").get<double>());

    json v = small_reduce();
    v["verify"]["checkpoint"] = (a / "checkpoint").string();
    const fs::path vo = scratch() / "verify";
    const Result r = run_cli("verify --config " + write_config("verify.json", v).string() + " --out " + vo.string());
    REQUIRE(r.code == 0);
    CHECK(read_json(vo / "summary.json").at("conjugacy").at("matches").get<bool>());

    const fs::path c = scratch() / "run_c";
    REQUIRE(run_cli("reduce --config " + cfg.string() + " --out " + c.string() + " --seed 99").code == 0);
    CHECK(slurp(a / "conjugacy.csv") != slurp(c / "conjugacy.csv"));
}

TEST_CASE("measure reports a slope of at least one quarter")
{
    const json m = {
        {"command", "measure"},
        {"problem", {{"N", 16}}},
        {"params", {{"lo", {1.0}}, {"hi", {2.0}}, {"samples", 2000}, {"seed", 1}}},
        {"measure", {{"gammas", {0.2, 0.1, 0.05}}, {"K", {4}}}},
    };
    const fs::path out = scratch() / "measure";
    REQUIRE(run_cli("measure --config " + write_config("measure.json", m).string() + " --out " + out.string()).code == 0);
    const json s = read_json(out / "summary.json");
    CHECK(s.at("slope").get<double>() >= 0.25);
    CHECK(s.at("cross_check_mismatches").get<int>() == 0);
    CHECK(fs::exists(out / "measure.csv"));
    CHECK(fs::exists(out / "r0_oracle.csv"));
}
