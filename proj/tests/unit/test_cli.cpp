#include "test_util.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fo/equilibrium.hpp"

namespace fs = std::filesystem;
using namespace fo;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("fo_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string(FO_CLI_PATH) + " " + args + " --out " + dir.string() + " > " +
                            (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

}  // namespace

TEST_CASE("equilibrium command writes the library curve", "[cli]") {
    TempDir t("eq");
    write_json(t.path / "cfg.json", eq::to_json(eq::EquilibriumParams{}));
    REQUIRE(run_cli("equilibrium --config " + (t.path / "cfg.json").string(), t.path) == 0);
    std::ostringstream want;
    eq::write_curve_csv(want, eq::run_numerical_example(eq::EquilibriumParams{}, eq::default_A_grid(), {0.0, 0.9},
                                                        10.0, 1000.0));
    REQUIRE(slurp(t.path / "curve.csv") == want.str());
}

TEST_CASE("unknown configuration keys exit with a validation code", "[cli]") {
    TempDir t("bad");
    write_json(t.path / "cfg.json", json{{"rho_zz", 1.0}});
    REQUIRE(run_cli("equilibrium --config " + (t.path / "cfg.json").string(), t.path) == 2);
    write_json(t.path / "synth.json", json{{"synth", {{"n_firms", 1}}}});
    REQUIRE(run_cli("synth --config " + (t.path / "synth.json").string(), t.path) == 2);
    REQUIRE(run_cli("no-such-command", t.path) == 2);
}

TEST_CASE("synth command is deterministic", "[cli]") {
    TempDir a("synth_a"), b("synth_b");
    REQUIRE(run_cli("synth --seed 9", a.path) == 0);
    REQUIRE(run_cli("synth --seed 9 --threads 4", b.path) == 0);
    REQUIRE(slurp(a.path / "panel.csv") == slurp(b.path / "panel.csv"));
    REQUIRE(slurp(a.path / "analyst_forecasts.csv") == slurp(b.path / "analyst_forecasts.csv"));
    REQUIRE(!slurp(a.path / "panel.csv").empty());
}

TEST_CASE("overreact command on rational forecasts over a long panel", "[cli]") {
    TempDir t("rational");
    write_json(t.path / "cfg.json", json{{"synth", {{"n_firms", 20}, {"n_years", 100}, {"theta", 0.0}}}});
    REQUIRE(run_cli("overreact --config " + (t.path / "cfg.json").string(), t.path) == 0);
    const auto j = json::parse(slurp(t.path / "overreaction.json"));
    REQUIRE(j.at("rows").size() == 1);
    REQUIRE(std::fabs(j.at("rows")[0].at("t_stat").get<double>()) < 2.0);
}

TEST_CASE("overreact command on overreacting forecasts", "[cli]") {
    TempDir t("overreact");
    REQUIRE(run_cli("overreact", t.path) == 0);
    const auto j = json::parse(slurp(t.path / "overreaction.json"));
    REQUIRE(j.at("rows")[0].at("beta").get<double>() < 0.0);
    REQUIRE(fs::exists(t.path / "overreaction.csv"));
}

TEST_CASE("decompose command writes one row per forecast firm-year", "[cli]") {
    TempDir t("decompose");
    REQUIRE(run_cli("decompose", t.path) == 0);
    std::ifstream f(t.path / "decomposition.csv");
    std::string line;
    std::size_t n = 0;
    while (std::getline(f, line)) ++n;
    // Twenty years of outcomes give nineteen realized one-year-ahead targets per firm.
    REQUIRE(n == 1 + 50 * 19);
}
