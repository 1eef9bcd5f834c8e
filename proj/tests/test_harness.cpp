#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "torusns/runner.hpp"

using namespace torusns;
namespace fs = std::filesystem;

namespace {

ordered_json small_doc() {
    return ordered_json::parse(R"({
        "grid": {"dim": 2, "resolution": 16},
        "noise": {
            "K": 1, "T": 0.05, "steps": 20, "seed": 9,
            "stream_functions": [
                {"modes": [{"k": [0, 1], "cos": -0.5}]}
            ]
        },
        "layers": {"eps_n": 1e-2, "l": 0.1, "delta": 1e-2},
        "initial": {
            "density": {"mean": 1.2, "modes": [{"k": [1, 0], "cos": 0.2}]},
            "velocity": [
                {"modes": [{"k": [0, 1], "sin": 0.1}]},
                {"mean": 0.0}
            ]
        },
        "output": {"directory": "unused", "cadence": 10}
    })");
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') n++;
    return n;
}

}  // namespace

TEST_CASE("config parsing") {
    SECTION("valid document") {
        RunConfig cfg = parse_config(small_doc());
        CHECK(cfg.resolution == 16);
        CHECK(cfg.K == 1);
        CHECK(cfg.seed == 9);
        CHECK(cfg.layers.delta == Catch::Approx(1e-2));
        CHECK(cfg.channels.size() == 1);
        CHECK(cfg.initial_density.mean == Catch::Approx(1.2));
        REQUIRE(cfg.initial_velocity.size() == 2);
        CHECK(cfg.initial_velocity[0].modes.size() == 1);
        CHECK(cfg.output_cadence == 10);
    }
    SECTION("all violations are collected at once") {
        ordered_json doc = small_doc();
        doc["grid"]["dim"] = 5;
        doc["grid"]["resolution"] = 48;
        doc["noise"]["K"] = 0;
        doc["layers"]["mu"] = -1.0;
        try {
            parse_config(doc);
            FAIL("expected config_error");
        } catch (const config_error& e) {
            ordered_json errs = ordered_json::parse(e.details_json);
            REQUIRE(errs.is_array());
            CHECK(errs.size() >= 4);
            std::string all = e.details_json;
            CHECK(all.find("grid.dim") != std::string::npos);
            CHECK(all.find("grid.resolution") != std::string::npos);
            CHECK(all.find("noise.K") != std::string::npos);
            CHECK(all.find("layers") != std::string::npos);
        }
    }
    SECTION("missing required sections") {
        CHECK_THROWS_AS(parse_config(ordered_json::object()), config_error);
    }
    SECTION("malformed JSON text") {
        CHECK_THROWS_AS(parse_config_text("{not json"), config_error);
    }
    SECTION("bad interp scheme") {
        ordered_json doc = small_doc();
        doc["solver"] = {{"interp", "spline"}};
        CHECK_THROWS_AS(parse_config(doc), config_error);
    }
    SECTION("stream function arity is checked") {
        ordered_json doc = small_doc();
        doc["noise"]["K"] = 2;  // but only one stream function listed
        CHECK_THROWS_AS(parse_config(doc), config_error);
    }
}

TEST_CASE("sweep expansion is a cartesian product") {
    ordered_json doc = small_doc();
    doc["sweep"] = {{"seeds", {1, 2, 3}}, {"delta", {1e-1, 1e-2}}};
    std::vector<ordered_json> pts = expand_sweep(doc);
    REQUIRE(pts.size() == 6);
    CHECK(pts[0]["noise"]["seed"] == 1);
    CHECK(pts[0]["layers"]["delta"] == 1e-1);
    CHECK(pts[1]["layers"]["delta"] == 1e-2);
    CHECK(pts[5]["noise"]["seed"] == 3);
    for (const auto& p : pts) CHECK(!p.contains("sweep"));
    // no sweep section: a single point, unchanged
    CHECK(expand_sweep(small_doc()).size() == 1);
}

TEST_CASE("run artifacts") {
    RunConfig cfg = parse_config(small_doc());
    const std::string dir = "harness_run_out";
    fs::remove_all(dir);
    run_to_dir(cfg, dir);

    SECTION("summary carries the echoed config and diagnostics") {
        ordered_json s = ordered_json::parse(slurp(dir + "/summary.json"));
        CHECK(s["version"] == kVersion);
        CHECK(s["config"]["grid"]["resolution"] == 16);
        CHECK(s["mass_drift"].get<double>() < 1e-12);
        CHECK(s.contains("max_energy_residual"));
        CHECK(s.contains("conventions"));
        CHECK(s["conventions"]["partition_kappa"] == 0.5);
    }
    SECTION("csv row counts match the trajectory") {
        // nodes: header + steps+1 rows; steps: header + steps rows
        CHECK(count_lines(slurp(dir + "/nodes.csv")) == 1 + 21);
        CHECK(count_lines(slurp(dir + "/steps.csv")) == 1 + 20);
        CHECK(count_lines(slurp(dir + "/path.csv")) == 1 + 21);
    }
    SECTION("snapshots at the configured cadence round trip") {
        CHECK(fs::exists(dir + "/snapshots/eta_000000.tnfb"));
        CHECK(fs::exists(dir + "/snapshots/eta_000010.tnfb"));
        CHECK(fs::exists(dir + "/snapshots/v_000020.tnfb"));
        auto eta = read_field_container(dir + "/snapshots/eta_000000.tnfb");
        REQUIRE(eta.size() == 1);
        CHECK(eta[0].grid().resolution() == 16);
        auto v = read_field_container(dir + "/snapshots/v_000010.tnfb");
        CHECK(v.size() == 2);
    }
    SECTION("reruns are byte identical") {
        const std::string dir2 = "harness_run_out2";
        fs::remove_all(dir2);
        run_to_dir(cfg, dir2);
        for (const char* f : {"/nodes.csv", "/steps.csv", "/path.csv"})
            REQUIRE(slurp(dir + f) == slurp(dir2 + f));
        CHECK(slurp(dir + "/snapshots/eta_000020.tnfb") ==
              slurp(dir2 + "/snapshots/eta_000020.tnfb"));
        fs::remove_all(dir2);
    }
    fs::remove_all(dir);
}

TEST_CASE("sweep and report") {
    ordered_json doc = small_doc();
    doc["noise"]["steps"] = 10;
    doc["noise"]["T"] = 0.02;
    doc["output"].erase("cadence");
    doc["sweep"] = {{"seeds", {1, 2}}, {"delta", {1e-1, 1e-3}}};
    const std::string dir = "harness_sweep_out";
    fs::remove_all(dir);
    sweep_to_dir(doc, dir, 2);

    for (const char* p :
         {"point_000", "point_001", "point_002", "point_003"})
        REQUIRE(fs::exists(dir + "/" + p + "/summary.json"));
    ordered_json index = ordered_json::parse(slurp(dir + "/index.json"));
    REQUIRE(index.size() == 4);
    CHECK(index[0]["seed"] == 1);
    CHECK(index[3]["delta"] == 1e-3);

    report_dir(dir);
    const std::string agg = slurp(dir + "/aggregate.csv");
    CHECK(count_lines(agg) == 1 + 4);
    CHECK(agg.find("point_002") != std::string::npos);

    // artificial pressure energy scales with delta across the sweep
    ordered_json s0 =
        ordered_json::parse(slurp(dir + "/point_000/summary.json"));
    ordered_json s1 =
        ordered_json::parse(slurp(dir + "/point_001/summary.json"));
    const double e0 = s0["artificial_energy_max"].get<double>();
    const double e1 = s1["artificial_energy_max"].get<double>();
    CHECK(e0 / e1 == Catch::Approx(100.0).epsilon(0.05));
    fs::remove_all(dir);
}

TEST_CASE("sweep reports point failures") {
    ordered_json doc = small_doc();
    doc["noise"]["steps"] = 5;
    doc["sweep"] = {{"delta", {1e-2}}};
    doc["layers"]["gamma"] = -2.0;  // invalid at every point
    const std::string dir = "harness_sweep_fail";
    fs::remove_all(dir);
    CHECK_THROWS_AS(sweep_to_dir(doc, dir, 1), error);
    ordered_json index = ordered_json::parse(slurp(dir + "/index.json"));
    CHECK(index[0].contains("error"));
    fs::remove_all(dir);
}

TEST_CASE("verify suite passes its own tolerances") {
    // the CLI gates on this; keep the library-level invariant tested too
    for (const VerifyCheck& c : verify_suite()) {
        INFO(c.name << " value=" << c.value << " tol=" << c.tolerance);
        CHECK(c.pass);
    }
}
