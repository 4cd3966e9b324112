// End-to-end checks against the installed CLI binary (path passed as argv[1]
// by ctest).

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

namespace {

std::string g_cli_path;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("dlab_cli_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli_path = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}

TEST_CASE("selftest is deterministic and reruns byte-identically") {
    REQUIRE_FALSE(g_cli_path.empty());
    TempDir tmp("det");
    CHECK(run_cli("selftest --seed 21 --out " + (tmp.path / "a").string()) == 0);
    CHECK(run_cli("selftest --seed 21 --out " + (tmp.path / "b").string()) == 0);
    CHECK(slurp(tmp.path / "a" / "selftest.csv") == slurp(tmp.path / "b" / "selftest.csv"));
    CHECK_FALSE(slurp(tmp.path / "a" / "selftest.csv").empty());
}

TEST_CASE("parallelism degree does not change the bytes") {
    TempDir tmp("jobs");
    CHECK(run_cli("stacking --seed 4 --jobs 1 --out " + (tmp.path / "j1").string()) == 0);
    CHECK(run_cli("stacking --seed 4 --jobs 8 --out " + (tmp.path / "j8").string()) == 0);
    CHECK(slurp(tmp.path / "j1" / "stacking_trials.csv") == slurp(tmp.path / "j8" / "stacking_trials.csv"));
    CHECK(slurp(tmp.path / "j1" / "stacking_aggregate.csv") == slurp(tmp.path / "j8" / "stacking_aggregate.csv"));
}

TEST_CASE("DLAB_SEED env var overrides the config seed") {
    TempDir tmp("env");
    CHECK(run_cli("selftest --seed 31 --out " + (tmp.path / "flag").string()) == 0);
    {
        const std::string cmd = "DLAB_SEED=31 " + g_cli_path + " selftest --out " + (tmp.path / "env").string() +
                                " > /dev/null 2>&1";
        CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    }
    CHECK(slurp(tmp.path / "flag" / "selftest.csv") == slurp(tmp.path / "env" / "selftest.csv"));
}

TEST_CASE("a corrupted fixture makes selftest exit nonzero") {
    TempDir tmp("fixture");
    const auto fixture = tmp.path / "fixture.json";
    {
        std::ofstream f(fixture);
        f << R"({
  "population": {"points": [{"x": [0], "y": [1.0], "w": 0.5}, {"x": [1], "y": [0.0], "w": 0.5}]},
  "f1": [0.5, 0.5],
  "f2": [1.0, 0.0],
  "expected": {"mse1": 0.25, "mse2": 0.0, "d": 0.999}
})";  // true D is 0.25; the claim is corrupt
    }
    const auto cfg = tmp.path / "cfg.json";
    {
        std::ofstream f(cfg);
        f << "{\"instances\": 10, \"probes\": 10, \"fixture\": \"" << fixture.string() << "\"}";
    }
    CHECK(run_cli("selftest --config " + cfg.string() + " --out " + (tmp.path / "o").string()) == 1);

    // with the true value the same fixture passes
    {
        std::ofstream f(fixture);
        f << R"({
  "population": {"points": [{"x": [0], "y": [1.0], "w": 0.5}, {"x": [1], "y": [0.0], "w": 0.5}]},
  "f1": [0.5, 0.5],
  "f2": [1.0, 0.0],
  "expected": {"mse1": 0.25, "mse2": 0.0, "d": 0.25}
})";
    }
    CHECK(run_cli("selftest --config " + cfg.string() + " --out " + (tmp.path / "o2").string()) == 0);
}

TEST_CASE("invalid config yields exit 2 and a field-path message") {
    TempDir tmp("badcfg");
    const auto cfg = tmp.path / "bad.json";
    {
        std::ofstream f(cfg);
        f << R"({"eps": 0.5})";  // tightness requires k
    }
    const std::string cmd = g_cli_path + " tightness --config " + cfg.string() + " --out " +
                            (tmp.path / "o").string() + " 2> " + (tmp.path / "err.txt").string() + " > /dev/null";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 2);
    CHECK(slurp(tmp.path / "err.txt").find("'k'") != std::string::npos);
}

TEST_CASE("trace matrix lists every bound and flags disabled checks") {
    TempDir tmp("trace");
    CHECK(run_cli("trace-matrix --out " + (tmp.path / "ok").string()) == 0);
    const std::string table = slurp(tmp.path / "ok" / "trace_matrix.csv");
    CHECK(table.find("midpoint-identity") != std::string::npos);
    CHECK(table.find("fw-two-run-agreement") != std::string::npos);
    CHECK(table.find("MISSING") == std::string::npos);

    CHECK(run_cli("trace-matrix --disable-check tree-agreement --out " + (tmp.path / "gap").string()) == 1);
    CHECK(slurp(tmp.path / "gap" / "trace_matrix.csv").find("MISSING") != std::string::npos);
}
