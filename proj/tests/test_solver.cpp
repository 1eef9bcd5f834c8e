#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "torusns/diagnostics.hpp"
#include "torusns/solver.hpp"

using namespace torusns;

namespace {

const TorusGrid g(2, 16);

LayerParams base_params() {
    LayerParams p;
    p.eps_n = 1e-2;
    p.l = 0.0;
    p.delta = 0.0;
    p.mu = 1.0;
    p.lambda = 1.0;
    return p;
}

std::shared_ptr<const FlowMap> zero_noise_flow(const TorusGrid& grid,
                                               double horizon, int steps) {
    std::vector<ChannelSpec> spec(1);
    spec[0].potential[0] = {StreamMode{{0, 1, 0}, -1.0, 0.0}};
    SolenoidalFieldSet q(grid, spec);
    WienerPath p = sample_path(1, horizon, steps, 1);
    for (auto& x : p.increments[0]) x = 0.0;
    p.rebuild_values();
    return std::make_shared<FlowMap>(invert_flow(integrate_flow(grid, q, p)));
}

std::shared_ptr<const FlowMap> shear_noise_flow(const TorusGrid& grid,
                                                double horizon, int steps,
                                                std::uint64_t seed) {
    std::vector<ChannelSpec> spec(1);
    spec[0].potential[0] = {StreamMode{{0, 1, 0}, -0.5, 0.0}};
    SolenoidalFieldSet q(grid, spec);
    return std::make_shared<FlowMap>(
        invert_flow(integrate_flow(grid, q, sample_path(1, horizon, steps, seed))));
}

}  // namespace

TEST_CASE("pressure closed forms") {
    LayerParams p;
    p.a = 1.0;
    p.gamma = 1.4;
    p.delta = 0.1;
    p.Gamma = 4.0;
    ScalarField one(g, 1.0);
    CHECK(pressure_delta(one, p)[0] == Catch::Approx(1.2));
    // P = delta/(Gamma-1) + delta + a/(gamma-1) at eta = 1
    CHECK(pressure_potential_delta(one, p)[0] ==
          Catch::Approx(0.1 / 3.0 + 0.1 + 1.0 / 0.4));
    // P''(z) z = p'(z) for the elastic potential convention
    ScalarField z(g, 1.7);
    const double h = 1e-5;
    ScalarField zp(g, 1.7 + h), zm(g, 1.7 - h);
    const double Ppp = (pressure_potential_delta(zp, p)[0] -
                        2.0 * pressure_potential_delta(z, p)[0] +
                        pressure_potential_delta(zm, p)[0]) /
                       (h * h);
    CHECK(Ppp * 1.7 == Catch::Approx(pressure_delta_prime(z, p)[0]).margin(1e-4));
}

TEST_CASE("initial data regularization") {
    LayerParams p = base_params();
    SECTION("constant data is a fixed point with zero gap") {
        ScalarField rho(g, 2.0);
        VectorField q(std::vector<ScalarField>{ScalarField(g, 0.6),
                                               ScalarField(g, 0.0)});
        RegularizedData rd = regularize_initial_data(rho, q, p);
        CHECK((rd.state.eta - rho).max_abs() < 1e-14);
        CHECK((rd.state.v[0] - ScalarField(g, 0.3)).max_abs() < 1e-14);
        CHECK(rd.energy_gap < 1e-10);
    }
    SECTION("negative density is rejected") {
        ScalarField rho = ScalarField::from_function(
            g, [](double x, double, double) { return std::cos(x); });
        CHECK_THROWS_AS(
            regularize_initial_data(rho, VectorField(g, 0.0), p), error);
    }
    SECTION("vacuum data needs a floor lift; 0/0 momentum convention") {
        ScalarField rho = ScalarField::from_function(
            g, [](double x, double, double) { return 1.0 + std::cos(x); });
        VectorField q(std::vector<ScalarField>{0.5 * rho, ScalarField(g, 0.0)});
        CHECK_THROWS_AS(regularize_initial_data(rho, q, p), error);
        LayerParams lifted = p;
        lifted.floor_lift = 1e-3;
        RegularizedData rd = regularize_initial_data(rho, q, lifted);
        CHECK(rd.state.eta.min() >= 1e-3);
        CHECK(std::isfinite(rd.raw_energy));
        // mollified regularization smooths the velocity
        LayerParams moll = lifted;
        moll.l = 0.2;
        RegularizedData rm = regularize_initial_data(rho, q, moll);
        CHECK(rm.energy_gap > 0.0);
    }
}

TEST_CASE("constant state is an exact fixed point") {
    LayerParams p = base_params();
    FluidState st(0.0, ScalarField(g, 1.5),
                  VectorField(std::vector<ScalarField>{ScalarField(g, 0.2),
                                                       ScalarField(g, -0.1)}));
    TransformedOpContext ctx = TransformedOpContext::identity(g);
    FluidState next = step(st, ctx, p, 1e-2);
    CHECK((next.eta - st.eta).max_abs() < 1e-13);
    CHECK((next.v - st.v).max_abs() < 1e-10);
    CHECK(next.t == Catch::Approx(1e-2));
}

TEST_CASE("continuity step is an exact implicit heat solve at rest") {
    LayerParams p = base_params();
    p.eps_n = 0.05;
    const double dt = 1e-2;
    ScalarField eta = ScalarField::from_function(
        g, [](double x, double, double) { return 2.0 + 0.3 * std::cos(x); });
    FluidState st(0.0, eta, VectorField(g, 0.0));
    FluidState next = step(st, TransformedOpContext::identity(g), p, dt);
    ScalarField expect = ScalarField::from_function(g, [&](double x, double, double) {
        return 2.0 + 0.3 / (1.0 + dt * 0.05) * std::cos(x);
    });
    CHECK((next.eta - expect).max_abs() < 1e-12);
}

TEST_CASE("solver matches an independent explicit integrator at small dt") {
    // Zero noise, l = 0, delta = 0: the marched system is
    //   d/dt eta = -div(eta v) + eps Delta eta
    //   (eps + eta) dv/dt = -div(eta v ox v) - eps (grad eta . grad) v
    //                       - grad p(eta) + div S(grad v) - v d/dt eta
    // Heun time stepping of that system is an oracle accurate to O(dt^2),
    // so the O(dt) gap below is the solver's own splitting error.
    LayerParams p = base_params();
    const int steps = 100;
    const double dt = 5e-4;

    ScalarField eta0 = ScalarField::from_function(g, [](double x, double y, double) {
        return 1.0 + 0.1 * std::cos(x) + 0.05 * std::sin(y);
    });
    VectorField v0(std::vector<ScalarField>{
        ScalarField::from_function(
            g, [](double, double y, double) { return 0.1 * std::sin(y); }),
        ScalarField::from_function(
            g, [](double x, double, double) { return 0.05 * std::cos(x); })});

    // production path
    auto flow = zero_noise_flow(g, steps * dt, steps);
    Trajectory traj =
        run_trajectory(flow, FluidState(0.0, eta0, v0), p);

    // oracle path
    TransformedOpContext ctx = TransformedOpContext::identity(g);
    auto rhs = [&](const ScalarField& eta, const VectorField& v,
                   ScalarField& deta, VectorField& dv) {
        deta = (-1.0) * divergence(eta * v) + p.eps_n * laplacian(eta);
        std::vector<ScalarField> mom;
        VectorField ev = eta * v;
        VectorField ge = gradient(eta);
        VectorField gp = gradient(pressure_delta(eta, p));
        TensorField S = stress_phi(ctx, v, p.mu, p.lambda);
        VectorField divS = div_phi_tensor(ctx, S);
        for (int i = 0; i < 2; i++) {
            std::vector<ScalarField> row;
            for (int j = 0; j < 2; j++) row.push_back(v[i] * ev[j]);
            ScalarField conv = divergence(VectorField(std::move(row)));
            ScalarField comm = p.eps_n * (ge[0] * partial(v[i], 0) +
                                          ge[1] * partial(v[i], 1));
            ScalarField num =
                (-1.0) * conv - comm - gp[i] + divS[i] - v[i] * deta;
            mom.push_back(num / shift(eta, p.eps_n));
        }
        dv = VectorField(std::move(mom));
    };
    ScalarField eta = eta0;
    VectorField v = v0;
    for (int s = 0; s < steps; s++) {
        ScalarField k1e(g, 0.0), k2e(g, 0.0);
        VectorField k1v(g, 0.0), k2v(g, 0.0);
        rhs(eta, v, k1e, k1v);
        rhs(eta + dt * k1e, v + dt * k1v, k2e, k2v);
        eta = eta + (0.5 * dt) * (k1e + k2e);
        v = v + (0.5 * dt) * (k1v + k2v);
    }
    const double de = (traj.states.back().eta - eta).max_abs();
    const double dvv = (traj.states.back().v - v).max_abs();
    CHECK(de < 1e-4);
    CHECK(dvv < 1e-4);
}

TEST_CASE("mass is conserved to machine precision") {
    LayerParams p = base_params();
    p.l = 0.1;
    p.delta = 1e-2;
    auto flow = shear_noise_flow(g, 0.2, 200, 77);
    ScalarField eta0 = ScalarField::from_function(g, [](double x, double y, double) {
        return 1.2 + 0.2 * std::cos(x + y);
    });
    VectorField v0(std::vector<ScalarField>{
        ScalarField::from_function(
            g, [](double, double y, double) { return 0.1 * std::sin(y); }),
        ScalarField(g, 0.0)});
    Trajectory traj = run_trajectory(flow, FluidState(0.0, eta0, v0), p);
    const double m0 = integrate(eta0);
    for (const FluidState& st : traj.states)
        REQUIRE(std::fabs(integrate(st.eta) - m0) <= 1e-12 * m0);
}

TEST_CASE("positivity rejection and adaptive halving") {
    LayerParams p = base_params();
    // One 0.1 step depletes the minimum to ~0.080; two half steps only to
    // ~0.085. A floor between the two separates rejection from recovery.
    p.density_floor = 0.083;
    ScalarField eta = ScalarField::from_function(
        g, [](double x, double, double) { return 1.0 + 0.9 * std::cos(x); });
    VectorField v(std::vector<ScalarField>{
        ScalarField::from_function(
            g, [](double x, double, double) { return -2.0 * std::sin(x); }),
        ScalarField(g, 0.0)});
    FluidState st(0.0, eta, v);
    TransformedOpContext ctx = TransformedOpContext::identity(g);
    CHECK_THROWS_AS(step(st, ctx, p, 0.1), step_rejected_error);
    SolverOptions opts;
    FluidState ok = step_adaptive(st, ctx, p, 0.1, opts);
    CHECK(ok.eta.min() >= p.density_floor);
    CHECK(ok.t == Catch::Approx(0.1));
    // with no halvings allowed the rejection propagates
    opts.max_halvings = 0;
    CHECK_THROWS_AS(step_adaptive(st, ctx, p, 0.1, opts), step_rejected_error);
}

TEST_CASE("momentum solve reports stagnation") {
    LayerParams p = base_params();
    FluidState st(0.0, ScalarField(g, 1.0),
                  VectorField(std::vector<ScalarField>{
                      ScalarField::from_function(
                          g, [](double, double y, double) { return std::sin(y); }),
                      ScalarField(g, 0.0)}));
    SolverOptions opts;
    opts.max_cg_iter = 0;
    CHECK_THROWS_AS(step(st, TransformedOpContext::identity(g), p, 1e-2, opts),
                    convergence_error);
}

TEST_CASE("trajectories are bit-reproducible") {
    LayerParams p = base_params();
    p.l = 0.1;
    auto flow = shear_noise_flow(g, 0.1, 50, 5);
    ScalarField eta0 = ScalarField::from_function(g, [](double x, double y, double) {
        return 1.0 + 0.1 * std::sin(x) * std::cos(y);
    });
    FluidState init(0.0, eta0, VectorField(g, 0.0));
    Trajectory a = run_trajectory(flow, init, p);
    Trajectory b = run_trajectory(flow, init, p);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t s = 0; s < a.states.size(); s++) {
        for (std::size_t i = 0; i < g.size(); i++) {
            REQUIRE(a.states[s].eta[i] == b.states[s].eta[i]);
            REQUIRE(a.states[s].v[0][i] == b.states[s].v[0][i]);
        }
    }
}
