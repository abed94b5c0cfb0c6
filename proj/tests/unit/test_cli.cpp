#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "riccati/run_config.hpp"
#include "riccati/runner.hpp"

using namespace riccati;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path workdir(const std::string& name) {
    const fs::path dir = fs::path(RICCATI_TEST_WORKDIR) / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_conv() {
    RunConfig cfg = preset(ModelKind::Conv);
    cfg.L = 10.0;
    cfg.n = 64;
    set_parameter(cfg, "t", 0.5);
    return cfg;
}

// ĝ0 = −1/2 on the k = 0 mode with z = 1: 1 + (e^t − 1)(−1/2) vanishes at t = ln 3.
RunConfig pole_conv() {
    return parse_config(json::parse(R"({
        "model": "conv",
        "grid": {"L": 10, "n": 64},
        "g0": {"family": "single_mode", "value": -0.5, "k0": 0},
        "times": {"t_final": 1.5}
    })"));
}

}  // namespace

TEST_CASE("model names round trip") {
    for (ModelKind k : {ModelKind::Matrix, ModelKind::Conv, ModelKind::Corr, ModelKind::Burgers}) {
        CHECK(parse_model_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_model_kind("heat"), ConfigError);
}

TEST_CASE("every preset validates and survives a JSON round trip") {
    for (ModelKind k : {ModelKind::Matrix, ModelKind::Conv, ModelKind::Corr, ModelKind::Burgers}) {
        const RunConfig cfg = preset(k);
        CHECK_NOTHROW(validate(cfg));
        const json once = to_json(cfg);
        CHECK(to_json(parse_config(once)) == once);
    }
}

TEST_CASE("config validation") {
    SUBCASE("odd grid size") {
        CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "conv", "grid": {"n": 511}})")), ConfigError);
    }
    SUBCASE("unknown keys") {
        CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "conv", "gird": {}})")), ConfigError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "conv", "grid": {"N": 64}})")), ConfigError);
    }
    SUBCASE("sections that do not apply to the model") {
        CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "conv", "q0": {"family": "constant"}})")),
                        ConfigError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "burgers", "blocks": {"k": 2}})")), ConfigError);
    }
    SUBCASE("missing or unknown model") {
        CHECK_THROWS_AS(parse_config(json::parse(R"({"grid": {"n": 64}})")), ConfigError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "kdv"})")), ConfigError);
    }
    SUBCASE("inadmissible symbol") {
        CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "conv", "symbol": [0, 0, -1]})")), ConfigError);
    }
    SUBCASE("query times outside the horizon") {
        CHECK_THROWS_AS(
            parse_config(json::parse(R"({"model": "conv", "times": {"t_final": 1, "query": [0.5, 2]}})")),
            ConfigError);
        CHECK_THROWS_AS(
            parse_config(json::parse(R"({"model": "conv", "times": {"t_final": 1, "query": [0.8, 0.4]}})")),
            ConfigError);
    }
    SUBCASE("single mode off the frequency grid") {
        CHECK_THROWS_AS(parse_config(json::parse(
                            R"({"model": "conv", "g0": {"family": "single_mode", "k0": 0.013}})")),
                        ConfigError);
    }
    SUBCASE("family of another model") {
        CHECK_THROWS_AS(parse_config(json::parse(R"({"model": "conv", "g0": {"family": "sech_product"}})")),
                        ConfigError);
    }
}

TEST_CASE("t_final alone sets the query list") {
    const RunConfig cfg = parse_config(json::parse(R"({"model": "conv", "times": {"t_final": 0.75}})"));
    REQUIRE(cfg.times.query.size() == 1);
    CHECK(cfg.times.query[0] == 0.75);
}

TEST_CASE("set_parameter") {
    RunConfig cfg = preset(ModelKind::Conv);
    set_parameter(cfg, "t", 0.25);
    CHECK(cfg.times.t_final == 0.25);
    REQUIRE(cfg.times.query.size() == 1);
    CHECK(cfg.times.query[0] == 0.25);

    set_parameter(cfg, "dt", 5e-4);
    CHECK(cfg.times.dt == 5e-4);
    set_parameter(cfg, "grid.n", 128);
    CHECK(cfg.n == 128);
    set_parameter(cfg, "g0.amplitude", 0.5);
    CHECK(cfg.g0.amplitude == 0.5);

    CHECK_THROWS_AS(set_parameter(cfg, "grid.bogus", 1.0), ConfigError);
    CHECK_THROWS_AS(set_parameter(cfg, "grid.n", 127), ConfigError);

    RunConfig multi = parse_config(
        json::parse(R"({"model": "conv", "times": {"t_final": 1, "query": [0.25, 0.5, 1]}})"));
    set_parameter(multi, "times.t_final", 0.6);
    CHECK(multi.times.query == std::vector<double>{0.25, 0.5});
}

TEST_CASE("time tags") {
    CHECK(time_tag(0.5) == "0p5");
    CHECK(time_tag(1.0) == "1");
    CHECK(time_tag(1e-5) == "1em05");
}

TEST_CASE("successful run writes every artifact") {
    RunConfig cfg = small_conv();
    cfg.toggles.oracle = true;
    cfg.output_dir = workdir("ok").string();
    std::ostringstream log;
    const RunResult r = run(cfg, log);
    CHECK(r.exit_code == kExitOk);
    CHECK(r.status == "ok");
    const fs::path dir = cfg.output_dir;
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "timing.json"));
    CHECK(fs::exists(dir / "g_t0p5.csv"));
    CHECK(fs::exists(dir / "plotdata_det2.csv"));

    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["exit_code"] == 0);
    CHECK(report["config"]["model"] == "conv");
    REQUIRE(report["queries"].size() == 1);
    CHECK(report["queries"][0]["oracle_error"].get<double>() < cfg.oracle.tolerance);
    CHECK(report["queries"][0]["fredholm_residual"].get<double>() < 1e-10);
    CHECK_FALSE(report.dump().find("wall") != std::string::npos);
    CHECK(parse_config(report["config"]).n == cfg.n);
}

TEST_CASE("report.json is byte-identical across runs") {
    RunConfig cfg = small_conv();
    cfg.output_dir = workdir("repeat").string();
    std::ostringstream log;
    REQUIRE(run(cfg, log).exit_code == kExitOk);
    const std::string first = slurp(fs::path(cfg.output_dir) / "report.json");
    REQUIRE(run(cfg, log).exit_code == kExitOk);
    CHECK(slurp(fs::path(cfg.output_dir) / "report.json") == first);
}

TEST_CASE("invalid config exits 2 and writes nothing") {
    RunConfig cfg = small_conv();
    cfg.n = 63;
    cfg.output_dir = workdir("invalid").string();
    std::ostringstream log;
    const RunResult r = run(cfg, log);
    CHECK(r.exit_code == kExitConfig);
    CHECK(r.status == "config_invalid");
    CHECK_FALSE(fs::exists(cfg.output_dir));
}

TEST_CASE("non-positive q0 exits 2") {
    RunConfig cfg = preset(ModelKind::Burgers);
    cfg.n = 64;
    cfg.q0.family = "constant";
    cfg.q0.value = -1.0;
    cfg.output_dir = workdir("negative_q").string();
    std::ostringstream log;
    CHECK(run(cfg, log).exit_code == kExitConfig);
    CHECK_FALSE(fs::exists(cfg.output_dir));
}

TEST_CASE("pole crossing exits 3 with only the report") {
    RunConfig cfg = pole_conv();
    cfg.output_dir = workdir("pole").string();
    std::ostringstream log;
    const RunResult r = run(cfg, log);
    CHECK(r.exit_code == kExitPatchBreakdown);
    CHECK(r.status == "pole_crossing");
    const fs::path dir = cfg.output_dir;
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "timing.json"));
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) {
        ++files;
    }
    CHECK(files == 2);
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["exit_code"] == 3);
    CHECK(report["breakdown"]["critical_time"].get<double>() ==
          doctest::Approx(std::log(3.0)).epsilon(1e-8));
}

TEST_CASE("oracle tolerance violation exits 5") {
    RunConfig cfg = small_conv();
    cfg.toggles.oracle = true;
    cfg.oracle.tolerance = 1e-15;
    cfg.output_dir = workdir("oracle_fail").string();
    std::ostringstream log;
    const RunResult r = run(cfg, log);
    CHECK(r.exit_code == kExitOracle);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "g_t0p5.csv"));
}

TEST_CASE("sweep with no values exits 2") {
    std::ostringstream log;
    const fs::path dir = workdir("sweep_empty");
    CHECK(sweep(small_conv(), "t", {}, dir.string(), log) == kExitConfig);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("sweep with an invalid value exits 2 before running") {
    std::ostringstream log;
    const fs::path dir = workdir("sweep_invalid");
    CHECK(sweep(small_conv(), "grid.n", {64, 65}, dir.string(), log) == kExitConfig);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("dt sweep on the matrix model shows fourth order") {
    RunConfig cfg = preset(ModelKind::Matrix);
    cfg.toggles.oracle = true;
    const fs::path dir = workdir("sweep_dt");
    std::ostringstream log;
    REQUIRE(sweep(cfg, "dt", {0.1, 0.05, 0.025}, dir.string(), log) == kExitOk);
    CHECK(fs::exists(dir / "convergence.csv"));
    const json summary = json::parse(slurp(dir / "sweep.json"));
    REQUIRE(summary["runs"].size() == 3);
    for (std::size_t i = 1; i < 3; ++i) {
        CHECK(summary["runs"][i]["observed_order"].get<double>() == doctest::Approx(4.0).epsilon(0.1));
    }
    CHECK(fs::exists(dir / "run_000" / "report.json"));
}

TEST_CASE("t sweep across a pole brackets the critical time") {
    const fs::path dir = workdir("sweep_t");
    std::ostringstream log;
    REQUIRE(sweep(pole_conv(), "t", {0.5, 1.0, 1.5}, dir.string(), log) == kExitOk);
    const json summary = json::parse(slurp(dir / "sweep.json"));
    REQUIRE(summary.contains("critical_time_bracket"));
    CHECK(summary["critical_time_bracket"]["lower"] == 1.0);
    CHECK(summary["critical_time_bracket"]["upper"] == 1.5);
    CHECK(summary["critical_time_bracket"]["critical_time"].get<double>() ==
          doctest::Approx(std::log(3.0)).epsilon(1e-8));
    CHECK(summary["runs"][2]["status"] == "pole_crossing");
}
