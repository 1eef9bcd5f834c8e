#ifndef TORUSNS_RUNNER_HPP
#define TORUSNS_RUNNER_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "torusns/config.hpp"
#include "torusns/diagnostics.hpp"
#include "torusns/equivalence.hpp"
#include "torusns/serialize.hpp"

namespace torusns {

inline constexpr const char* kVersion = "torusns 1.0.0";

/// Conventions pinned by this implementation, echoed into every summary
/// so runs are comparable across builds.
inline ordered_json pinned_conventions(const RunConfig& cfg) {
    ordered_json c;
    c["cutoff_spline"] = {
        {"variable", "u = (z-1)/2 on [1,3]"},
        {"coefficients", {1.0, 2.0, 0.0, -2.0, 1.0}}};  // 1+2u-2u^3+u^4
    c["test_basis"] = "lowest 5x5 real Fourier modes";
    c["interpolation"] =
        cfg.solver.interp == InterpScheme::trig ? "trig" : "cubic";
    c["ito_sums"] = "left-point";
    c["stratonovich_check"] = "midpoint";
    c["flow_context"] = "A frozen at the step's left node";
    c["partition_kappa"] = 0.5;
    c["holder_alpha"] = 0.25;
    return c;
}

struct RunResult {
    Trajectory traj;
    WienerPath path;
    EnergyReport energy;
    ordered_json summary;
};

namespace detail {

inline FlowOptions flow_options(const RunConfig& cfg) {
    FlowOptions o;
    o.scheme = cfg.solver.interp;
    o.safety = cfg.solver.dt_safety;
    return o;
}

}  // namespace detail

/// Execute one full trajectory with diagnostics. Pure function of the
/// config; no IO.
inline RunResult execute_run(const RunConfig& cfg) {
    TorusGrid grid(cfg.dim, cfg.resolution);
    SolenoidalFieldSet Q(grid, cfg.channels);
    WienerPath path = sample_path(cfg.K, cfg.T, cfg.steps, cfg.seed);

    auto flow = std::make_shared<FlowMap>(
        invert_flow(integrate_flow(grid, Q, path, detail::flow_options(cfg)),
                    detail::flow_options(cfg)));

    ScalarField rho0 = build_initial_field(grid, cfg.initial_density);
    std::vector<ScalarField> uc;
    for (int d = 0; d < cfg.dim; d++)
        uc.push_back(build_initial_field(grid, cfg.initial_velocity[d]));
    VectorField u0(std::move(uc));
    RegularizedData reg = regularize_initial_data(rho0, rho0 * u0, cfg.layers);

    Trajectory traj = run_trajectory(flow, reg.state, cfg.layers, cfg.solver);
    EnergyReport energy = energy_report(traj);

    ordered_json s;
    s["version"] = kVersion;
    s["seed"] = cfg.seed;
    s["config"] = cfg.echo;
    s["conventions"] = pinned_conventions(cfg);
    s["initial_energy_gap"] = reg.energy_gap;
    s["mass_drift"] = mass_drift(traj);
    s["max_energy_residual"] = energy.max_residual;
    double visc_total = 0.0, art_total = 0.0;
    for (int i = 0; i < static_cast<int>(energy.d_viscous.size()); i++) {
        visc_total += energy.d_viscous[i] * (energy.time[i + 1] - energy.time[i]);
        art_total +=
            energy.d_artificial[i] * (energy.time[i + 1] - energy.time[i]);
    }
    s["viscous_dissipation_total"] = visc_total;
    s["artificial_dissipation_total"] = art_total;
    double art_energy = 0.0;
    for (const auto& st : traj.states)
        art_energy = std::max(art_energy, artificial_energy(st, cfg.layers));
    s["artificial_energy_max"] = art_energy;
    s["pressure_integrability"] =
        pressure_integrability(traj, cfg.layers.Gamma);
    s["holder_norm"] = holder_norm(*flow, 0.25);
    try {
        TimePartition part = time_partition(*flow, 0.5);
        s["partition_intervals"] = part.intervals();
        s["partition_times"] = part.times;
    } catch (const error& e) {
        s["partition_error"] = e.what();
    }
    {
        // Renormalized residual with theta = T_k, k = 4, psi = 1.
        const double k = 4.0;
        ScalarField psi(grid, 1.0);
        s["renorm_residual_Tk4"] = renorm_residual(
            traj, [k](double z) { return cutoff_Tk(z, k); },
            [k](double z) { return cutoff_Tk_prime(z, k); }, psi);
    }
    RunResult out{std::move(traj), std::move(path), std::move(energy),
                  std::move(s)};
    return out;
}

/// Write trajectory artifacts: summary JSON, per-node and per-step
/// CSVs, the path replay CSV, and field snapshots at the configured
/// cadence.
inline void emit(const RunResult& res, const RunConfig& cfg,
                 const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory: " + dir);

    {
        std::ofstream os(dir + "/summary.json", std::ios::trunc);
        if (!os) throw io_error("cannot write: " + dir + "/summary.json");
        os << res.summary.dump(2) << "\n";
    }
    {
        std::vector<std::vector<double>> rows;
        const auto& e = res.energy;
        for (std::size_t s = 0; s < e.time.size(); s++)
            rows.push_back({e.time[s], e.energy[s],
                            integrate(res.traj.at(static_cast<int>(s)).eta)});
        write_csv(dir + "/nodes.csv", {"t", "energy", "mass"}, rows);
    }
    {
        std::vector<std::vector<double>> rows;
        const auto& e = res.energy;
        for (std::size_t s = 0; s < e.residual.size(); s++)
            rows.push_back({e.time[s], e.d_viscous[s], e.d_artificial[s],
                            e.residual[s]});
        write_csv(dir + "/steps.csv",
                  {"t", "d_viscous", "d_artificial", "residual"}, rows);
    }
    {
        std::vector<std::string> header{"t"};
        for (int k = 0; k < res.path.channels; k++)
            header.push_back("W" + std::to_string(k + 1));
        std::vector<std::vector<double>> rows;
        for (int s = 0; s <= res.path.steps; s++) {
            std::vector<double> row{res.path.time(s)};
            for (int k = 0; k < res.path.channels; k++)
                row.push_back(res.path.values[k][s]);
            rows.push_back(std::move(row));
        }
        write_csv(dir + "/path.csv", header, rows);
    }
    if (cfg.output_cadence > 0) {
        fs::create_directories(dir + "/snapshots", ec);
        for (int s = 0; s < res.traj.nodes(); s += cfg.output_cadence) {
            char tag[16];
            std::snprintf(tag, sizeof(tag), "%06d", s);
            write_field(dir + "/snapshots/eta_" + tag + ".tnfb",
                        res.traj.at(s).eta);
            write_field(dir + "/snapshots/v_" + tag + ".tnfb",
                        res.traj.at(s).v);
        }
    }
}

inline void run_to_dir(const RunConfig& cfg, const std::string& dir) {
    emit(execute_run(cfg), cfg, dir);
}

// ---------------------------------------------------------------------------
// sweep

/// Fan out over the optional `sweep` section of the raw config:
/// lists under sweep.seeds, sweep.delta, sweep.eps_n, sweep.dt_steps
/// (step-count ladder) are expanded as a cartesian product. Each point
/// runs in its own subdirectory point_NNN.
inline std::vector<ordered_json> expand_sweep(const ordered_json& doc) {
    std::vector<ordered_json> points{doc};
    if (!doc.contains("sweep")) return points;
    const auto& sw = doc["sweep"];
    auto expand = [&](const std::string& axis,
                      const std::function<void(ordered_json&,
                                               const ordered_json&)>& apply) {
        if (!sw.contains(axis)) return;
        std::vector<ordered_json> next;
        for (const auto& p : points)
            for (const auto& v : sw[axis]) {
                ordered_json q = p;
                apply(q, v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    };
    expand("seeds", [](ordered_json& q, const ordered_json& v) {
        q["noise"]["seed"] = v;
    });
    expand("delta", [](ordered_json& q, const ordered_json& v) {
        q["layers"]["delta"] = v;
    });
    expand("eps_n", [](ordered_json& q, const ordered_json& v) {
        q["layers"]["eps_n"] = v;
    });
    expand("dt_steps", [](ordered_json& q, const ordered_json& v) {
        q["noise"]["steps"] = v;
    });
    for (auto& p : points) p.erase("sweep");
    return points;
}

inline void sweep_to_dir(const ordered_json& doc, const std::string& dir,
                         int threads = 1) {
    std::vector<ordered_json> points = expand_sweep(doc);
    ordered_json index = ordered_json::array();
    for (std::size_t i = 0; i < points.size(); i++) {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "point_%03zu", i);
        index.push_back({{"dir", tag},
                         {"seed", points[i]["noise"].value("seed", 1)},
                         {"delta", points[i]["layers"].value("delta", 0.0)},
                         {"eps_n", points[i]["layers"].value("eps_n", 1e-2)},
                         {"steps", points[i]["noise"].value("steps", 1)}});
    }

    const int nthreads =
        std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
    std::vector<std::thread> pool;
    std::vector<std::string> failures(points.size());
    for (int t = 0; t < nthreads; t++)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < points.size(); i += nthreads) {
                char tag[16];
                std::snprintf(tag, sizeof(tag), "point_%03zu", i);
                try {
                    RunConfig cfg = parse_config(points[i]);
                    run_to_dir(cfg, dir + "/" + tag);
                } catch (const std::exception& e) {
                    failures[i] = e.what();
                }
            }
        });
    for (auto& th : pool) th.join();

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    for (std::size_t i = 0; i < points.size(); i++)
        if (!failures[i].empty()) index[i]["error"] = failures[i];
    std::ofstream os(dir + "/index.json", std::ios::trunc);
    os << index.dump(2) << "\n";
    for (const auto& f : failures)
        if (!f.empty()) throw error("sweep point failed: " + f);
}

/// Aggregate per-point summaries of a sweep directory into one CSV.
inline void report_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> dirs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::exists(e.path() / "summary.json"))
            dirs.push_back(e.path().filename().string());
    std::sort(dirs.begin(), dirs.end());

    std::ofstream os(dir + "/aggregate.csv", std::ios::trunc);
    if (!os) throw io_error("cannot write: " + dir + "/aggregate.csv");
    os << "point,seed,delta,eps_n,steps,max_energy_residual,mass_drift,"
          "artificial_energy_max,artificial_dissipation_total,"
          "renorm_residual_Tk4\n";
    for (const auto& d : dirs) {
        std::ifstream is(dir + "/" + d + "/summary.json");
        ordered_json s = ordered_json::parse(is);
        const auto& cfg = s["config"];
        os << d << "," << cfg["noise"].value("seed", 0) << ","
           << format_double(cfg["layers"].value("delta", 0.0)) << ","
           << format_double(cfg["layers"].value("eps_n", 0.0)) << ","
           << cfg["noise"].value("steps", 0) << ","
           << format_double(s.value("max_energy_residual", 0.0)) << ","
           << format_double(s.value("mass_drift", 0.0)) << ","
           << format_double(s.value("artificial_energy_max", 0.0)) << ","
           << format_double(s.value("artificial_dissipation_total", 0.0))
           << "," << format_double(s.value("renorm_residual_Tk4", 0.0))
           << "\n";
    }
}

// ---------------------------------------------------------------------------
// verify suite

struct VerifyCheck {
    std::string name;
    double value;
    double tolerance;
    bool pass;
};

/// Property suite over the operator and flow oracles; no fluid solve.
inline std::vector<VerifyCheck> verify_suite() {
    std::vector<VerifyCheck> checks;
    auto add = [&](const std::string& name, double value, double tol) {
        checks.push_back({name, value, tol, value <= tol});
    };

    TorusGrid grid(2, 64);

    // Spectral calculus against closed forms.
    {
        ScalarField f = ScalarField::from_function(
            grid, [](double x, double y, double) {
                return std::sin(3 * x) * std::cos(2 * y);
            });
        VectorField g = gradient(f);
        ScalarField gx = ScalarField::from_function(
            grid, [](double x, double y, double) {
                return 3 * std::cos(3 * x) * std::cos(2 * y);
            });
        ScalarField gy = ScalarField::from_function(
            grid, [](double x, double y, double) {
                return -2 * std::sin(3 * x) * std::sin(2 * y);
            });
        add("gradient_closed_form",
            std::max((g[0] - gx).max_abs(), (g[1] - gy).max_abs()), 1e-12);
        add("div_grad_equals_laplace",
            (divergence(g) - laplacian(f)).max_abs() /
                laplacian(f).max_abs(),
            1e-12);
        ScalarField m = mollify(f, 0.5);
        add("mollify_mean_preserved", std::fabs(integrate(m) - integrate(f)),
            1e-12);
        ScalarField u = inv_laplace(f);
        add("inv_laplace_residual",
            ((-1.0) * laplacian(u) - f).max_abs() / f.max_abs(), 1e-10);
    }

    // Duality on random-ish band-limited fields.
    {
        ScalarField f = ScalarField::from_function(
            grid, [](double x, double y, double) {
                return std::cos(x) + 0.3 * std::sin(2 * x + y);
            });
        VectorField u(std::vector<ScalarField>{
            ScalarField::from_function(grid, [](double x, double y, double) {
                return std::sin(y) + 0.2 * std::cos(x + 2 * y);
            }),
            ScalarField::from_function(grid, [](double x, double y, double) {
                return std::cos(2 * x) - 0.1 * std::sin(x - y);
            })});
        const double lhs =
            integrate(f * divergence(u)) + integrate(dot(gradient(f), u));
        add("duality", std::fabs(lhs), 1e-10);
    }

    // Shear-flow oracles.
    {
        std::vector<ChannelSpec> spec(1);
        spec[0].potential[0] = {StreamMode{{0, 1, 0}, -1.0, 0.0}};
        // psi = -cos(x2) gives Q = (sin x2, 0).
        SolenoidalFieldSet Q(grid, spec);
        WienerPath path = sample_path(1, 0.25, 250, 7);
        FlowMap flow = invert_flow(integrate_flow(grid, Q, path));
        const int last = flow.nodes() - 1;
        const double W = path.values[0][path.steps];
        ScalarField d1 = ScalarField::from_function(
            grid, [W](double, double y, double) { return -std::sin(y) * W; });
        add("shear_forward",
            (flow.displacement(last)[0] - d1).max_abs() +
                flow.displacement(last)[1].max_abs(),
            1e-9);
        add("shear_inverse",
            (flow.inverse_displacement(last)[0] - (-1.0) * d1).max_abs() +
                flow.inverse_displacement(last)[1].max_abs(),
            1e-8);
        const TensorField& A = flow.transform_matrix(last);
        ScalarField a01 = ScalarField::from_function(
            grid, [W](double, double y, double) { return W * std::cos(y); });
        double aerr = std::max(
            {(A(0, 0) - ScalarField(grid, 1.0)).max_abs(),
             (A(0, 1) - a01).max_abs(), A(1, 0).max_abs(),
             (A(1, 1) - ScalarField(grid, 1.0)).max_abs()});
        add("shear_transform_matrix", aerr, 1e-8);
        add("shear_jacobian",
            (flow.jacobian(last) - ScalarField(grid, 1.0)).max_abs(), 1e-8);

        // Transformed operator identities at the final node.
        TransformedOpContext ctx(flow, last);
        ScalarField f = ScalarField::from_function(
            grid, [](double x, double y, double) {
                return std::sin(x) + 0.5 * std::cos(y);
            });
        VectorField u(std::vector<ScalarField>{
            ScalarField::from_function(grid, [](double x, double y, double) {
                return std::cos(y) + 0.3 * std::sin(x);
            }),
            ScalarField::from_function(grid, [](double x, double y, double) {
                return std::sin(x + y);
            })});
        VectorField ga = grad_phi(ctx, f);
        VectorField gc = grad_phi_conj(ctx, f);
        add("grad_phi_forms_agree", (ga - gc).max_abs() / ga.max_abs(), 1e-8);
        ScalarField da = div_phi(ctx, u);
        ScalarField dc = div_phi_conj(ctx, u);
        add("div_phi_forms_agree", (da - dc).max_abs() / da.max_abs(), 1e-8);
        const double dual = integrate(f * div_phi(ctx, u)) +
                            integrate(dot(grad_phi(ctx, f), u));
        add("transformed_duality", std::fabs(dual), 1e-8);
        ScalarField rhs = (-1.0) * laplace_phi(ctx, f);
        ScalarField back = inv_laplace_phi(ctx, rhs, 1e-6);
        ScalarField target = shift(f, -f.mean());
        add("inv_laplace_phi_roundtrip",
            (shift(back, -back.mean()) - target).max_abs() /
                target.max_abs(),
            1e-6);
        ScalarField eta = ScalarField::from_function(
            grid, [](double x, double, double) { return 1.0 + 0.3 * std::sin(x); });
        VectorField bog = bogovskii_phi(ctx, eta, 1.0);
        add("bogovskii_residual",
            (div_phi(ctx, bog) - shift(eta, -1.0)).max_abs(), 1e-8);
    }

    // Measure preservation for a generic stream-function flow.
    {
        std::vector<ChannelSpec> spec(1);
        spec[0].potential[0] = {StreamMode{{1, 1, 0}, 0.5, 0.0},
                                StreamMode{{1, -1, 0}, 0.5, 0.0}};
        // psi = cos x1 cos x2.
        SolenoidalFieldSet Q(grid, spec);
        WienerPath path = sample_path(1, 0.25, 250, 11);
        FlowMap flow = integrate_flow(grid, Q, path);
        double jac = 0.0;
        for (int s = 0; s < flow.nodes(); s += 25)
            jac = std::max(
                jac, (flow.jacobian(s) - ScalarField(grid, 1.0)).max_abs());
        add("measure_preservation_jacobian", jac, 1e-4);
        ScalarField f = ScalarField::from_function(
            grid, [](double x, double y, double) {
                return std::sin(2 * x) * std::cos(y) + std::cos(3 * y);
            });
        ScalarField comp =
            compose(f, flow.positions(flow.nodes() - 1));
        add("measure_preservation_integral",
            std::fabs(integrate(comp) - integrate(f)) / f.max_abs(), 1e-6);
    }

    return checks;
}

}  // namespace torusns

#endif
