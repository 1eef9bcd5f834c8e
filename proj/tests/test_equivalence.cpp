#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "torusns/equivalence.hpp"
#include "torusns/solver.hpp"

using namespace torusns;

namespace {

const TorusGrid g(2, 16);

LayerParams base_params() {
    LayerParams p;
    p.eps_n = 0.0;
    p.l = 0.0;
    p.delta = 0.0;
    p.mu = 1.0;
    p.lambda = 1.0;
    return p;
}

SolenoidalFieldSet constant_Q(double c1, double c2) {
    std::vector<ChannelSpec> spec(1);
    spec[0].constant = {c1, c2, 0.0};
    return SolenoidalFieldSet(g, spec);
}

FluidState smooth_initial() {
    ScalarField eta0 = ScalarField::from_function(g, [](double x, double y, double) {
        return 1.2 + 0.2 * std::cos(x) + 0.1 * std::sin(y);
    });
    VectorField v0(std::vector<ScalarField>{
        ScalarField::from_function(
            g, [](double, double y, double) { return 0.2 * std::sin(y); }),
        ScalarField::from_function(
            g, [](double x, double, double) { return 0.1 * std::cos(x); })});
    return FluidState(0.0, std::move(eta0), std::move(v0));
}

}  // namespace

TEST_CASE("pushforward along the identity flow is the identity") {
    std::vector<ChannelSpec> spec(1);
    spec[0].constant = {1.0, 0.0, 0.0};
    SolenoidalFieldSet q(g, spec);
    WienerPath p = sample_path(1, 0.1, 10, 3);
    for (auto& x : p.increments[0]) x = 0.0;
    p.rebuild_values();
    FlowMap flow = invert_flow(integrate_flow(g, q, p));
    FluidState st = smooth_initial();
    EulerianState eu = pushforward(st, flow, 10);
    CHECK((eu.rho - st.eta).max_abs() < 1e-12);
    CHECK((eu.u - st.v).max_abs() < 1e-12);
}

TEST_CASE("pushforward of a translation flow shifts the fields") {
    SolenoidalFieldSet q = constant_Q(1.0, 0.0);
    WienerPath p = sample_path(1, 0.2, 40, 19);
    FlowMap flow = invert_flow(integrate_flow(g, q, p));
    const double W = p.values[0][40];
    FluidState st = smooth_initial();
    EulerianState eu = pushforward(st, flow, 40);
    // phi(x) = x - Q W, so rho(y) = eta(y + Q W)
    ScalarField expect = ScalarField::from_function(g, [W](double x, double y, double) {
        const double xs = x + W;
        return 1.2 + 0.2 * std::cos(xs) + 0.1 * std::sin(y);
    });
    CHECK((eu.rho - expect).max_abs() < 1e-8);
    // round trip back through the forward positions
    CHECK((compose(eu.rho, flow.positions(40)) - st.eta).max_abs() < 1e-8);
}

TEST_CASE("correction functional oracles") {
    SolenoidalFieldSet q = constant_Q(0.7, 0.0);
    SECTION("constant density integrates a divergence to zero") {
        ScalarField psi = ScalarField::from_function(
            g, [](double x, double y, double) { return std::cos(x) + std::sin(2 * y); });
        CHECK(std::fabs(correction_weak(ScalarField(g, 1.0), q, psi)) < 1e-12);
    }
    SECTION("constant test function gives zero") {
        ScalarField rho = ScalarField::from_function(
            g, [](double x, double, double) { return 1.0 + 0.5 * std::cos(x); });
        CHECK(std::fabs(correction_weak(rho, q, ScalarField(g, 2.0))) < 1e-14);
    }
    SECTION("closed form for a single mode") {
        // Q = (c,0), psi = cos x: div(Q (Q.grad psi)) = -c^2 cos x and
        // (1/2) int (1 + 0.3 cos x)(-c^2 cos x) = -(0.3/4) c^2 (2 pi)^2
        const double c = 0.7;
        ScalarField rho = ScalarField::from_function(
            g, [](double x, double, double) { return 1.0 + 0.3 * std::cos(x); });
        ScalarField psi = ScalarField::from_function(
            g, [](double x, double, double) { return std::cos(x); });
        const double expect = -0.075 * c * c * two_pi * two_pi;
        CHECK(correction_weak(rho, q, psi) == Catch::Approx(expect));
    }
}

TEST_CASE("constant test functions reduce the residuals to conservation") {
    LayerParams p = base_params();
    SolenoidalFieldSet q = constant_Q(0.5, 0.3);
    WienerPath path = sample_path(1, 0.05, 50, 7);
    auto flow = std::make_shared<FlowMap>(invert_flow(integrate_flow(g, q, path)));
    Trajectory traj = run_trajectory(flow, smooth_initial(), p);
    // psi = 1: the continuity residual is exactly the mass drift
    CHECK(weak_residual_continuity(traj, path, q, ScalarField(g, 1.0)) < 1e-10);
    CHECK(weak_residual_continuity(traj, path, q, ScalarField(g, 1.0),
                                   WeakScheme::strat_mid) < 1e-10);
}

TEST_CASE("zero noise reduces to the deterministic weak form") {
    LayerParams p = base_params();
    std::vector<ChannelSpec> spec(1);
    spec[0].constant = {0.0, 0.0, 0.0};
    SolenoidalFieldSet q(g, spec);
    WienerPath path = sample_path(1, 0.05, 100, 3);
    auto flow = std::make_shared<FlowMap>(invert_flow(integrate_flow(g, q, path)));
    Trajectory traj = run_trajectory(flow, smooth_initial(), p);
    ScalarField psi = ScalarField::from_function(
        g, [](double x, double y, double) { return 1.0 + 0.3 * std::cos(x + y); });
    // noise and correction terms vanish; what remains is the O(dt)
    // quadrature error of the deterministic weak form
    const double r = weak_residual_continuity(traj, path, q, psi);
    CHECK(r < 5e-3);
    CHECK(r == Catch::Approx(weak_residual_continuity(
                    traj, path, q, psi, WeakScheme::strat_mid))
                   .margin(1e-6));
}

TEST_CASE("constant-Q weak residuals are small for both calculi") {
    LayerParams p = base_params();
    SolenoidalFieldSet q = constant_Q(0.6, -0.4);
    WienerPath path = sample_path(1, 0.05, 100, 23);
    auto flow = std::make_shared<FlowMap>(invert_flow(integrate_flow(g, q, path)));
    Trajectory traj = run_trajectory(flow, smooth_initial(), p);

    ScalarField psi = ScalarField::from_function(
        g, [](double x, double y, double) { return 1.0 + 0.3 * std::sin(x) * std::cos(y); });
    CHECK(weak_residual_continuity(traj, path, q, psi) < 2e-2);
    CHECK(weak_residual_continuity(traj, path, q, psi, WeakScheme::strat_mid) <
          2e-2);

    VectorField vpsi(std::vector<ScalarField>{
        psi, ScalarField::from_function(
                 g, [](double x, double, double) { return 0.2 * std::cos(x); })});
    CHECK(weak_residual_momentum(traj, path, q, vpsi) < 5e-2);
    CHECK(weak_residual_momentum(traj, path, q, vpsi, WeakScheme::strat_mid) <
          5e-2);

    // misaligned path is rejected
    WienerPath shorter = segment(path, 0, 50);
    CHECK_THROWS_AS(weak_residual_continuity(traj, shorter, q, psi), error);
    CHECK_THROWS_AS(weak_residual_momentum(traj, shorter, q, vpsi), error);
}
