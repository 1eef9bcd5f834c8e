#ifndef TORUSNS_CONFIG_HPP
#define TORUSNS_CONFIG_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "torusns/interp.hpp"
#include "torusns/layers.hpp"
#include "torusns/solenoidal.hpp"
#include "torusns/solver.hpp"

namespace torusns {

using ordered_json = nlohmann::ordered_json;

/// Fourier-mode description of an initial scalar field: mean + modes.
struct InitialField {
    double mean = 0.0;
    std::vector<StreamMode> modes;
};

/// Fully validated run configuration. Parsing collects every violated
/// key before rejecting, so a bad config reports all problems at once.
struct RunConfig {
    int dim = 2;
    int resolution = 64;

    int K = 1;
    double T = 0.5;
    int steps = 500;
    std::uint64_t seed = 1;
    std::vector<ChannelSpec> channels;

    LayerParams layers;
    SolverOptions solver;

    InitialField initial_density;       // mean defaults to 1
    std::vector<InitialField> initial_velocity;  // one per component

    std::string output_directory = "out";
    int output_cadence = 0;  // 0 = no field snapshots

    ordered_json echo;  // the raw document, for run metadata
};

namespace detail {

struct ConfigReader {
    const ordered_json& doc;
    ordered_json errors = ordered_json::array();

    void fail(const std::string& key, const std::string& msg) {
        errors.push_back({{"key", key}, {"error", msg}});
    }

    const ordered_json* section(const std::string& name, bool required) {
        if (!doc.contains(name)) {
            if (required) fail(name, "missing section");
            return nullptr;
        }
        if (!doc[name].is_object()) {
            fail(name, "must be an object");
            return nullptr;
        }
        return &doc[name];
    }

    template <class T>
    T get(const ordered_json* sec, const std::string& section_name,
          const std::string& key, T fallback, bool required = false) {
        if (!sec) return fallback;
        if (!sec->contains(key)) {
            if (required) fail(section_name + "." + key, "missing key");
            return fallback;
        }
        try {
            return sec->at(key).get<T>();
        } catch (...) {
            fail(section_name + "." + key, "wrong type");
            return fallback;
        }
    }

    std::vector<StreamMode> modes_from(const ordered_json& arr,
                                       const std::string& key, int dim) {
        std::vector<StreamMode> out;
        if (!arr.is_array()) {
            fail(key, "must be an array of modes");
            return out;
        }
        for (std::size_t i = 0; i < arr.size(); i++) {
            const auto& m = arr[i];
            StreamMode sm;
            if (!m.is_object() || !m.contains("k") || !m["k"].is_array() ||
                static_cast<int>(m["k"].size()) != dim) {
                fail(key + "[" + std::to_string(i) + "].k",
                     "need an integer vector of length dim");
                continue;
            }
            for (int d = 0; d < dim; d++) sm.k[d] = m["k"][d].get<int>();
            sm.amp_cos = m.value("cos", 0.0);
            sm.amp_sin = m.value("sin", 0.0);
            out.push_back(sm);
        }
        return out;
    }
};

}  // namespace detail

inline RunConfig parse_config(const ordered_json& doc) {
    detail::ConfigReader r{doc};
    RunConfig cfg;
    cfg.echo = doc;

    const auto* grid = r.section("grid", true);
    cfg.dim = r.get(grid, "grid", "dim", 2);
    cfg.resolution = r.get(grid, "grid", "resolution", 64);
    if (cfg.dim != 2 && cfg.dim != 3) r.fail("grid.dim", "must be 2 or 3");
    if (cfg.resolution < 8 || (cfg.resolution & (cfg.resolution - 1)) != 0)
        r.fail("grid.resolution", "must be a power of two >= 8");

    const auto* noise = r.section("noise", true);
    cfg.K = r.get(noise, "noise", "K", 1);
    cfg.T = r.get(noise, "noise", "T", 0.5);
    cfg.steps = r.get(noise, "noise", "steps", 500);
    cfg.seed = r.get<std::uint64_t>(noise, "noise", "seed", 1);
    if (cfg.K < 1) r.fail("noise.K", "must be >= 1");
    if (cfg.T <= 0.0) r.fail("noise.T", "must be > 0");
    if (cfg.steps < 1) r.fail("noise.steps", "must be >= 1");
    if (noise && noise->contains("stream_functions")) {
        const auto& sf = (*noise)["stream_functions"];
        if (!sf.is_array() || static_cast<int>(sf.size()) != cfg.K) {
            r.fail("noise.stream_functions", "need one entry per channel");
        } else {
            for (int k = 0; k < cfg.K; k++) {
                const auto& ch = sf[k];
                ChannelSpec spec;
                const std::string base =
                    "noise.stream_functions[" + std::to_string(k) + "]";
                if (ch.contains("constant")) {
                    const auto& c = ch["constant"];
                    if (!c.is_array() ||
                        static_cast<int>(c.size()) != cfg.dim)
                        r.fail(base + ".constant", "need dim entries");
                    else
                        for (int d = 0; d < cfg.dim; d++)
                            spec.constant[d] = c[d].get<double>();
                }
                if (ch.contains("modes"))
                    spec.potential[0] =
                        r.modes_from(ch["modes"], base + ".modes", cfg.dim);
                if (ch.contains("potential")) {
                    const auto& pot = ch["potential"];
                    if (!pot.is_array() || pot.size() != 3u)
                        r.fail(base + ".potential",
                               "need three component mode lists");
                    else
                        for (int c = 0; c < 3; c++)
                            spec.potential[c] = r.modes_from(
                                pot[c],
                                base + ".potential[" + std::to_string(c) + "]",
                                cfg.dim);
                }
                cfg.channels.push_back(std::move(spec));
            }
        }
    } else if (noise) {
        r.fail("noise.stream_functions", "missing key");
    }

    const auto* layers = r.section("layers", false);
    cfg.layers.eps_n = r.get(layers, "layers", "eps_n", cfg.layers.eps_n);
    cfg.layers.l = r.get(layers, "layers", "l", cfg.layers.l);
    cfg.layers.delta = r.get(layers, "layers", "delta", cfg.layers.delta);
    cfg.layers.Gamma = r.get(layers, "layers", "Gamma", cfg.layers.Gamma);
    cfg.layers.a = r.get(layers, "layers", "a", cfg.layers.a);
    cfg.layers.gamma = r.get(layers, "layers", "gamma", cfg.layers.gamma);
    cfg.layers.mu = r.get(layers, "layers", "mu", cfg.layers.mu);
    cfg.layers.lambda = r.get(layers, "layers", "lambda", cfg.layers.lambda);
    cfg.layers.density_floor =
        r.get(layers, "layers", "density_floor", cfg.layers.density_floor);
    cfg.layers.floor_lift =
        r.get(layers, "layers", "floor_lift", cfg.layers.floor_lift);
    try {
        cfg.layers.validate(cfg.dim);
    } catch (const error& e) {
        r.fail("layers", e.what());
    }

    const auto* solver = r.section("solver", false);
    cfg.solver.dt_safety =
        r.get(solver, "solver", "dt_safety", cfg.solver.dt_safety);
    cfg.solver.op_tol = r.get(solver, "solver", "op_tol", cfg.solver.op_tol);
    const std::string interp =
        r.get<std::string>(solver, "solver", "interp", "trig");
    if (interp == "trig")
        cfg.solver.interp = InterpScheme::trig;
    else if (interp == "cubic")
        cfg.solver.interp = InterpScheme::cubic;
    else
        r.fail("solver.interp", "must be 'trig' or 'cubic'");

    const auto* initial = r.section("initial", false);
    cfg.initial_density.mean = 1.0;
    if (initial && initial->contains("density")) {
        const auto& dens = (*initial)["density"];
        cfg.initial_density.mean = dens.value("mean", 1.0);
        if (dens.contains("modes"))
            cfg.initial_density.modes =
                r.modes_from(dens["modes"], "initial.density.modes", cfg.dim);
    }
    if (initial && initial->contains("velocity")) {
        const auto& vel = (*initial)["velocity"];
        if (!vel.is_array() || static_cast<int>(vel.size()) != cfg.dim) {
            r.fail("initial.velocity", "need one component entry per dim");
        } else {
            for (int d = 0; d < cfg.dim; d++) {
                InitialField f;
                f.mean = vel[d].value("mean", 0.0);
                if (vel[d].contains("modes"))
                    f.modes = r.modes_from(
                        vel[d]["modes"],
                        "initial.velocity[" + std::to_string(d) + "].modes",
                        cfg.dim);
                cfg.initial_velocity.push_back(std::move(f));
            }
        }
    }
    while (static_cast<int>(cfg.initial_velocity.size()) < cfg.dim)
        cfg.initial_velocity.push_back(InitialField{});

    const auto* output = r.section("output", false);
    cfg.output_directory =
        r.get<std::string>(output, "output", "directory", cfg.output_directory);
    cfg.output_cadence =
        r.get(output, "output", "cadence", cfg.output_cadence);
    if (cfg.output_cadence < 0) r.fail("output.cadence", "must be >= 0");

    if (!r.errors.empty())
        throw config_error("invalid configuration", r.errors.dump(2));
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw config_error("config is not valid JSON",
                           ordered_json::array(
                               {{{"key", ""}, {"error", e.what()}}})
                               .dump(2));
    }
    return parse_config(doc);
}

/// Realize an initial scalar field from its mode description.
inline ScalarField build_initial_field(const TorusGrid& grid,
                                       const InitialField& f) {
    ScalarField modes = detail::build_modes(grid, f.modes);
    return shift(modes, f.mean);
}

}  // namespace torusns

#endif
