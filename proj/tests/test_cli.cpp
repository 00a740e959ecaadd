#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tclab/config.hpp"
#include "tclab/report.hpp"
#include "test_support.hpp"

using namespace tclab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json c2_config() {
    return json::parse(R"({
        "backend": {"type": "chain",
                    "generator": [[-2.0, 1.0], [1.0, -2.0]],
                    "ref_measure": [1.0, 1.0]},
        "measures": {
            "first": {"weights": [1.0, 0.0]},
            "flat": {"weights": [1.0, 1.0]}
        },
        "sequences": {
            "steady": {"kind": "constant", "limit": "first"},
            "ramp": {"kind": "monotone_up", "limit": "flat"}
        },
        "experiments": [
            {"name": "ramp_semigroup", "type": "semigroup", "mode": "full_support",
             "sequence": "ramp", "n_values": [2, 4, 8, 16, 32], "t_points": 21},
            {"name": "steady_potential", "type": "potential", "sequence": "steady",
             "n_values": [2, 4, 8]}
        ],
        "check": {"measures": ["first", "flat"], "cmp_trials": 2000},
        "simulate": {"n_paths": 20000, "cases": [
            {"kind": "semigroup", "measure": "first", "t": 1.0, "x": 1, "u": [1.0, 0.0]},
            {"kind": "resolvent", "measure": "first", "alpha": 1.0, "x": 0, "u": [1.0, 0.0]},
            {"kind": "apotential", "measure": "first", "alpha": 0.0, "x": 0, "u": "one"},
            {"kind": "fdd", "measure": "first", "init": "first", "times": [1.0],
             "functions": [{"indicator": [0]}, {"indicator": [0]}]}
        ]},
        "seed": 20240817,
        "workers": 2
    })");
}

std::string tclab_bin() {
    const char* env = std::getenv("TCLAB_BIN");
    REQUIRE_MESSAGE(env != nullptr, "TCLAB_BIN must point at the CLI binary");
    return env;
}

int run_cli(const std::string& args) {
    int rc = std::system((tclab_bin() + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tclab_test_" + std::to_string(SplitMix64(::getpid()).next() % 100000000));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config parsing accepts the reference document") {
    RunConfig cfg = parse_config(c2_config());
    CHECK(cfg.chain.has_value());
    CHECK(cfg.measures.size() == 2);
    CHECK(cfg.sequences.count("ramp") == 1);
    CHECK(cfg.experiments.size() == 2);
    CHECK(cfg.simulate->cases.size() == 4);
    CHECK(cfg.seed == 20240817);
    CHECK(cfg.workers == 2);
    // indicator shorthand expands to a basis vector
    CHECK(cfg.simulate->cases[3].functions[0].values(0) == 1.0);
    CHECK(cfg.simulate->cases[3].functions[0].values(1) == 0.0);
}

TEST_CASE("config parsing rejects unknown keys and bad backends") {
    json bad = c2_config();
    bad["surprise"] = 1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    json bad_measure = c2_config();
    bad_measure["measures"]["first"]["typo"] = true;
    CHECK_THROWS_AS(parse_config(bad_measure), ConfigError);

    json conservative = c2_config();
    conservative["backend"]["generator"] = {{-1.0, 1.0}, {1.0, -1.0}};
    CHECK_THROWS_AS(parse_config(conservative), ConfigError);

    json missing = c2_config();
    missing.erase("backend");
    CHECK_THROWS_AS(parse_config(missing), ConfigError);
}

TEST_CASE("experiment spec inherits grids and defaults") {
    RunConfig cfg = parse_config(c2_config());
    ExperimentSpec spec = make_experiment_spec(cfg, cfg.experiments[0]);
    CHECK(spec.chain == &*cfg.chain);
    CHECK(spec.t_points == 21);
    CHECK(spec.n_values == std::vector<int>{2, 4, 8, 16, 32});
    CHECK(!spec.test_functions.empty());
}

TEST_CASE("cli check passes on the reference chain and fails on bad configs") {
    TempDir tmp;
    fs::path cfg_path = tmp.path / "c2.json";
    std::ofstream(cfg_path) << c2_config().dump(2);
    CHECK(run_cli("check --config " + cfg_path.string() + " --out " +
                  (tmp.path / "out").string()) == 0);
    CHECK(fs::exists(tmp.path / "out" / "check.json"));
    json report = json::parse(slurp(tmp.path / "out" / "check.json"));
    CHECK(report["passed"].get<bool>());
    CHECK(report["measures"]["flat"]["normality"]["normal"].get<bool>());
    CHECK(!report["measures"]["first"]["normality"]["normal"].get<bool>());

    // conservative generator: config error, exit code 2
    json bad = c2_config();
    bad["backend"]["generator"] = {{0.0, 0.0}, {0.0, 0.0}};
    fs::path bad_path = tmp.path / "bad.json";
    std::ofstream(bad_path) << bad.dump(2);
    CHECK(run_cli("check --config " + bad_path.string() + " --out " +
                  (tmp.path / "out2").string()) == 2);

    CHECK(run_cli("check --config " + (tmp.path / "missing.json").string()) == 2);
}

TEST_CASE("cli converge emits deterministic csv and passes") {
    TempDir tmp;
    fs::path cfg_path = tmp.path / "c2.json";
    std::ofstream(cfg_path) << c2_config().dump(2);
    fs::path out1 = tmp.path / "run1";
    fs::path out2 = tmp.path / "run2";
    CHECK(run_cli("converge --config " + cfg_path.string() + " --out " + out1.string()) == 0);
    CHECK(run_cli("converge --config " + cfg_path.string() + " --out " + out2.string()) == 0);

    std::string csv1 = slurp(out1 / "ramp_semigroup.csv");
    CHECK(csv1 == slurp(out2 / "ramp_semigroup.csv"));
    CHECK(csv1.rfind("n,theorem,test_id,param,sup_error,hypothesis_ok\n", 0) == 0);

    // constant sequence: every error column is zero
    std::istringstream rows(slurp(out1 / "steady_potential.csv"));
    std::string line;
    std::getline(rows, line);  // header
    int data_rows = 0;
    while (std::getline(rows, line)) {
        ++data_rows;
        auto last_comma = line.rfind(',');
        auto prev_comma = line.rfind(',', last_comma - 1);
        double err = std::stod(line.substr(prev_comma + 1, last_comma - prev_comma - 1));
        CHECK(err == 0.0);
    }
    CHECK(data_rows > 0);

    json summary = json::parse(slurp(out1 / "summary.json"));
    CHECK(summary["passed"].get<bool>());
    CHECK(summary["config"]["seed"] == 20240817);
}

TEST_CASE("cli drives the diffusion backend with flag overrides") {
    json cfg = json::parse(R"({
        "backend": {"type": "diffusion", "grid_n": 300},
        "measures": {
            "center": {"atoms": [[0.5, 1.0]]},
            "leb": {"density": "lebesgue"}
        },
        "sequences": {"walk": {"kind": "shifted_atom", "limit": "center"}},
        "experiments": [
            {"name": "walk_potential", "type": "potential", "sequence": "walk",
             "test_functions": [{"id": "wide", "hat": [0.5, 0.45]}, "one"],
             "n_values": [3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128]}
        ],
        "check": {"measures": ["center", "leb"]},
        "seed": 5
    })");
    TempDir tmp;
    fs::path cfg_path = tmp.path / "diff.json";
    std::ofstream(cfg_path) << cfg.dump(2);
    fs::path out = tmp.path / "out";
    CHECK(run_cli("check --config " + cfg_path.string() + " --out " + out.string()) == 0);
    CHECK(run_cli("converge --config " + cfg_path.string() + " --out " + out.string() +
                  " --grid-alpha 1,2 --n-max 64") == 0);
    json summary = json::parse(slurp(out / "summary.json"));
    const json& curves = summary["experiments"]["walk_potential"]["curves"];
    CHECK(curves.contains("wide:R@2"));             // --grid-alpha took effect
    CHECK(!curves.contains("wide:R@0.5"));
    const json& ns = curves["one:G"]["n"];
    CHECK(ns.back().get<int>() == 64);              // --n-max capped the grid

    // path simulation is chain-only
    cfg["simulate"] = {{"n_paths", 2000}, {"cases", json::array()}};
    std::ofstream(cfg_path) << cfg.dump(2);
    CHECK(run_cli("simulate --config " + cfg_path.string() + " --out " + out.string()) == 2);
}

TEST_CASE("cli simulate gates every z-score") {
    TempDir tmp;
    fs::path cfg_path = tmp.path / "c2.json";
    std::ofstream(cfg_path) << c2_config().dump(2);
    fs::path out = tmp.path / "sim";
    CHECK(run_cli("simulate --config " + cfg_path.string() + " --out " + out.string()) == 0);
    json report = json::parse(slurp(out / "simulate.json"));
    CHECK(report["passed"].get<bool>());
    int gated = 0;
    for (const auto& row : report["rows"]) {
        if (row.contains("z")) {
            CHECK(std::abs(row["z"].get<double>()) <= 4.0);
            ++gated;
        }
    }
    CHECK(gated >= 5);  // semigroup + two resolvent routes + apotential + fdd

    // byte-identical reruns with the same seed and worker count
    fs::path out_b = tmp.path / "sim_b";
    CHECK(run_cli("simulate --config " + cfg_path.string() + " --out " + out_b.string()) == 0);
    CHECK(slurp(out / "simulate.csv") == slurp(out_b / "simulate.csv"));
}

TEST_SUITE_END();
