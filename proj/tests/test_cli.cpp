#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "noma_ris/cli.hpp"

using namespace noma_ris;
using namespace noma_ris::cli;
namespace fs = std::filesystem;

namespace {

const std::string kBinary = NOMA_RIS_CLI_PATH;
const fs::path kSource = NOMA_RIS_SOURCE_DIR;

ParseOutcome parse(std::vector<std::string> args) {
    args.insert(args.begin(), "noma_ris");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return parse_args(static_cast<int>(argv.size()), argv.data(), out, err);
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run(const std::string& args) { return shell("'" + kBinary + "' " + args + " >/dev/null 2>&1"); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("noma_ris_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string config(const std::string& name) { return "'" + (kSource / "configs" / name).string() + "'"; }

// Keeps end-to-end runs short.
const std::string kSmall = " --set trials=20 --set system.ris_elements=8 --set system.users=3";

}  // namespace

TEST_CASE("argument parsing", "[cli]") {
    SECTION("valid command") {
        const auto p = parse({"sweep-elevation", "--config", "s.json", "--out", "results/"});
        REQUIRE(p.command);
        CHECK(p.command->subcommand == "sweep-elevation");
        CHECK(p.command->config_path == "s.json");
        CHECK(p.command->out_dir == "results/");
        CHECK_FALSE(p.command->seed);
        CHECK_FALSE(p.command->threads);
    }
    SECTION("overrides, seed and threads") {
        const auto p = parse({"feedback", "--config", "s.json", "--set", "controller.r=0.05", "--set", "trials=10",
                              "--seed", "42", "--threads", "3"});
        REQUIRE(p.command);
        CHECK(p.command->overrides == std::vector<std::string>{"controller.r=0.05", "trials=10"});
        CHECK(p.command->seed == 42u);
        CHECK(p.command->threads == 3u);
    }
    SECTION("usage errors") {
        CHECK(parse({}).exit_code == kUsageError);
        CHECK(parse({"sweep-elevation"}).exit_code == kUsageError);
        CHECK(parse({"sweep-elevation", "--config", "s.json", "--bogus"}).exit_code == kUsageError);
        CHECK(parse({"launch", "--config", "s.json"}).exit_code == kUsageError);
        CHECK_FALSE(parse({}).command);
    }
    SECTION("help is not an error") {
        const auto p = parse({"--help"});
        CHECK_FALSE(p.command);
        CHECK(p.exit_code == kOk);
    }
}

TEST_CASE("config resolution", "[cli]") {
    CliCommand cmd;
    cmd.config_path = (kSource / "configs" / "default.json").string();
    const ScenarioConfig base = resolve_config(cmd);
    CHECK(base.link.frequency_hz == 2e9);
    CHECK(base.dims.antennas == 6);
    CHECK(base.dims.elements == 500);
    CHECK(base.dims.users == 10);
    CHECK(base.bandwidth_hz == 1e6);
    CHECK(base.controller.r == 0.08);
    CHECK(config_hash(base) == config_hash(default_scenario()));

    cmd.overrides = {"controller.r=0.05", "sweep.theta_deg=[70,80]"};
    cmd.seed = 99;
    const ScenarioConfig over = resolve_config(cmd);
    CHECK(over.controller.r == 0.05);
    CHECK(over.sweep.theta_deg == std::vector<double>{70.0, 80.0});
    CHECK(over.seed == 99u);

    cmd.overrides = {"controller.theta_H=80"};
    CHECK(resolve_config(cmd).controller.theta0 == 45.0);

    cmd.overrides = {"controller.no_such_key=1"};
    CHECK_THROWS_AS(resolve_config(cmd), DomainError);

    cmd.config_path = "/nonexistent/config.json";
    CHECK_THROWS_AS(resolve_config(cmd), IoError);
}

TEST_CASE("exit codes", "[cli]") {
    const fs::path dir = scratch("exit");
    CHECK(run("") == kUsageError);
    CHECK(run("sweep-elevation") == kUsageError);
    CHECK(run("validate-config --config " + config("default.json")) == kOk);
    CHECK(run("validate-config --config /nonexistent/config.json") == kIoError);
    CHECK(run("validate-config --config " + config("default.json") + " --set controller.r=-1") == kDomainError);
    CHECK(run("validate-config --config " + config("default.json") + " --set system.users=0") == kDomainError);

    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(run("validate-config --config '" + (dir / "broken.json").string() + "'") == kDomainError);

    std::ofstream(dir / "a_file") << "x";
    CHECK(run("r-range --config " + config("k_range.json") + " --out '" + (dir / "a_file").string() + "'") == kIoError);
}

TEST_CASE("diagnostic names the failing parameter", "[cli]") {
    CliCommand cmd;
    cmd.subcommand = "validate-config";
    cmd.config_path = (kSource / "configs" / "default.json").string();
    cmd.overrides = {"system.bandwidth_hz=0"};
    std::ostringstream out, err;
    CHECK(execute(cmd, out, err) == kDomainError);
    const std::string message = err.str();
    CHECK(message.find("system.bandwidth_hz") != std::string::npos);
    CHECK(std::count(message.begin(), message.end(), '\n') == 1);
}

TEST_CASE("r-range output", "[cli]") {
    const fs::path dir = scratch("rrange");
    REQUIRE(run("r-range --config " + config("k_range.json") + " --out '" + dir.string() + "'") == kOk);
    std::ifstream in(dir / "r_range.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "k_prime,r,r_min_flag,r_max_flag,in_range");
    int endpoints = 0;
    while (std::getline(in, line)) {
        double k = 0, r = 0;
        int lo = 0, hi = 0, inside = 0;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%d,%d,%d", &k, &r, &lo, &hi, &inside) == 5);
        if (lo) CHECK(std::abs(r - 0.02) < 1e-9);
        if (hi) CHECK(std::abs(r - 0.08) < 1e-9);
        endpoints += lo + hi;
    }
    CHECK(endpoints == 2);
    CHECK(fs::exists(dir / "r_range.config.json"));
}

TEST_CASE("sidecar reproduces a run", "[cli]") {
    const fs::path a = scratch("sidecar_a"), b = scratch("sidecar_b");
    REQUIRE(run("sweep-elevation --config " + config("default.json") + kSmall + " --seed 7 --out '" + a.string() +
                "'") == kOk);
    REQUIRE(run("sweep-elevation --config '" + (a / "elevation_sweep.config.json").string() + "' --out '" +
                b.string() + "'") == kOk);
    CHECK(slurp(a / "elevation_sweep.csv") == slurp(b / "elevation_sweep.csv"));
    CHECK(slurp(a / "elevation_sweep.config.json") == slurp(b / "elevation_sweep.config.json"));
}

TEST_CASE("thread count does not change output", "[cli][determinism]") {
    const fs::path a = scratch("threads_a"), b = scratch("threads_b");
    const std::string base = "sweep-users --config " + config("default.json") + kSmall + " --set sweep.user_counts=[1,2,3]";
    REQUIRE(run(base + " --threads 1 --out '" + a.string() + "'") == kOk);
    REQUIRE(shell("NOMA_RIS_THREADS=3 '" + kBinary + "' " + base + " --out '" + b.string() + "' >/dev/null 2>&1") ==
            kOk);
    CHECK(slurp(a / "user_sweep.csv") == slurp(b / "user_sweep.csv"));
}
