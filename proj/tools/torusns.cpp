// Command-line front end: run / sweep / verify / report.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 IO failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "torusns/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw torusns::io_error("cannot read config: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

torusns::ordered_json load_doc(const std::string& path) {
    try {
        return torusns::ordered_json::parse(read_file(path));
    } catch (const torusns::io_error&) {
        throw;
    } catch (const std::exception& e) {
        throw torusns::config_error(
            "config is not valid JSON",
            torusns::ordered_json::array({{{"key", ""}, {"error", e.what()}}})
                .dump(2));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"torus Navier-Stokes transport-noise simulator"};
    app.require_subcommand(1);
    // Environment overrides (CI): TORUSNS_CONFIG, TORUSNS_SEED, ...
    std::string config_path, out_dir;
    std::int64_t seed_override = -1;
    int threads = 1;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        sub->add_option("--config", config_path, "JSON config path")
            ->envname("TORUSNS_CONFIG")
            ->required(need_config);
        sub->add_option("--seed", seed_override, "override noise.seed")
            ->envname("TORUSNS_SEED");
        sub->add_option("--out", out_dir, "override output directory")
            ->envname("TORUSNS_OUT");
        sub->add_option("--threads", threads, "worker threads (sweep)")
            ->envname("TORUSNS_THREADS");
    };

    CLI::App* run = app.add_subcommand("run", "one trajectory + diagnostics");
    add_common(run, true);
    CLI::App* sweep = app.add_subcommand("sweep", "fan out over sweep axes");
    add_common(sweep, true);
    CLI::App* verify =
        app.add_subcommand("verify", "operator/flow property suite");
    add_common(verify, false);
    CLI::App* report =
        app.add_subcommand("report", "aggregate sweep summaries");
    report->add_option("--out", out_dir, "sweep directory")
        ->envname("TORUSNS_OUT")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            torusns::ordered_json doc = load_doc(config_path);
            if (seed_override >= 0) doc["noise"]["seed"] = seed_override;
            torusns::RunConfig cfg = torusns::parse_config(doc);
            const std::string dir =
                out_dir.empty() ? cfg.output_directory : out_dir;
            torusns::run_to_dir(cfg, dir);
            std::printf("run complete: %s\n", dir.c_str());
        } else if (sweep->parsed()) {
            torusns::ordered_json doc = load_doc(config_path);
            if (seed_override >= 0) doc["noise"]["seed"] = seed_override;
            std::string dir = out_dir;
            if (dir.empty())
                dir = doc.contains("output") &&
                              doc["output"].contains("directory")
                          ? doc["output"]["directory"].get<std::string>()
                          : "out";
            torusns::sweep_to_dir(doc, dir, threads);
            torusns::report_dir(dir);
            std::printf("sweep complete: %s\n", dir.c_str());
        } else if (verify->parsed()) {
            auto checks = torusns::verify_suite();
            bool all = true;
            torusns::ordered_json j = torusns::ordered_json::array();
            for (const auto& c : checks) {
                std::printf("[%s] %-34s value=%.3e tol=%.1e\n",
                            c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                            c.tolerance);
                j.push_back({{"name", c.name},
                             {"value", c.value},
                             {"tolerance", c.tolerance},
                             {"pass", c.pass}});
                all = all && c.pass;
            }
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                std::ofstream os(out_dir + "/verify.json", std::ios::trunc);
                os << j.dump(2) << "\n";
            }
            if (!all) return kExitNumerical;
        } else if (report->parsed()) {
            torusns::report_dir(out_dir);
            std::printf("report written: %s/aggregate.csv\n", out_dir.c_str());
        }
    } catch (const torusns::config_error& e) {
        std::fprintf(stderr, "config error: %s\n%s\n", e.what(),
                     e.details_json.c_str());
        return kExitConfig;
    } catch (const torusns::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
