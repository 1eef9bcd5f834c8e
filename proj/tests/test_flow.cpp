#include <catch_amalgamated.hpp>

#include <cmath>

#include "torusns/flow.hpp"

using namespace torusns;

namespace {

const TorusGrid g(2, 32);

SolenoidalFieldSet shear_set(const TorusGrid& grid) {
    std::vector<ChannelSpec> spec(1);
    // psi = -cos(x2) gives Q = (sin x2, 0)
    spec[0].potential[0] = {StreamMode{{0, 1, 0}, -1.0, 0.0}};
    return SolenoidalFieldSet(grid, spec);
}

SolenoidalFieldSet constant_set(const TorusGrid& grid, double c1, double c2) {
    std::vector<ChannelSpec> spec(1);
    spec[0].constant = {c1, c2, 0.0};
    return SolenoidalFieldSet(grid, spec);
}

double sup_diff(const VectorField& a, const VectorField& b) {
    return (a - b).max_abs();
}

}  // namespace

TEST_CASE("solenoidal set rejects nothing and is divergence free") {
    SolenoidalFieldSet q = shear_set(g);
    CHECK(divergence(q.Q(0)).max_abs() < 1e-12);
    SolenoidalFieldSet c = constant_set(g, 0.3, -0.4);
    CHECK((c.Q(0)[0] - ScalarField(g, 0.3)).max_abs() < 1e-14);
    // 3D vector potential
    TorusGrid g3(3, 8);
    std::vector<ChannelSpec> spec(1);
    spec[0].potential[2] = {StreamMode{{1, 1, 0}, 1.0, 0.5}};
    SolenoidalFieldSet q3(g3, spec);
    CHECK(divergence(q3.Q(0)).max_abs() < 1e-12);
}

TEST_CASE("zero path gives the identity flow") {
    SolenoidalFieldSet q = shear_set(g);
    WienerPath p = sample_path(1, 1.0, 16, 5);
    for (auto& x : p.increments[0]) x = 0.0;
    p.rebuild_values();
    FlowMap flow = invert_flow(integrate_flow(g, q, p));
    CHECK(flow.displacement(16).max_abs() == 0.0);
    CHECK(flow.inverse_displacement(16).max_abs() < 1e-12);
    CHECK((flow.transform_matrix(16)(0, 0) - ScalarField(g, 1.0)).max_abs() <
          1e-12);
    CHECK(flow.transform_matrix(16)(0, 1).max_abs() < 1e-12);
    CHECK((flow.jacobian(16) - ScalarField(g, 1.0)).max_abs() < 1e-13);
    CHECK(holder_norm(flow) == 0.0);
}

TEST_CASE("constant fields translate exactly") {
    SolenoidalFieldSet q = constant_set(g, 0.8, -0.5);
    WienerPath p = sample_path(1, 1.0, 64, 17);
    FlowMap flow = invert_flow(integrate_flow(g, q, p));
    const double W = p.values[0][64];
    VectorField expect(std::vector<ScalarField>{ScalarField(g, -0.8 * W),
                                                ScalarField(g, 0.5 * W)});
    CHECK(sup_diff(flow.displacement(64), expect) < 1e-12);
    CHECK(sup_diff(flow.inverse_displacement(64), (-1.0) * expect) < 1e-8);
    // A = I for a translation
    const TensorField& A = flow.transform_matrix(64);
    CHECK((A(0, 0) - ScalarField(g, 1.0)).max_abs() < 1e-8);
    CHECK(A(0, 1).max_abs() < 1e-8);
    CHECK(A(1, 0).max_abs() < 1e-8);
}

TEST_CASE("shear flow closed form") {
    SolenoidalFieldSet q = shear_set(g);
    WienerPath p = sample_path(1, 0.5, 128, 23);
    FlowMap flow = invert_flow(integrate_flow(g, q, p));
    for (int s : {32, 128}) {
        const double W = p.values[0][s];
        ScalarField d1 = ScalarField::from_function(
            g, [W](double, double y, double) { return -std::sin(y) * W; });
        CHECK((flow.displacement(s)[0] - d1).max_abs() < 1e-10);
        CHECK(flow.displacement(s)[1].max_abs() < 1e-12);
        CHECK((flow.inverse_displacement(s)[0] - (-1.0) * d1).max_abs() < 1e-8);
        ScalarField a01 = ScalarField::from_function(
            g, [W](double, double y, double) { return W * std::cos(y); });
        CHECK((flow.transform_matrix(s)(0, 1) - a01).max_abs() < 1e-8);
        CHECK((flow.jacobian(s) - ScalarField(g, 1.0)).max_abs() < 1e-8);
    }
}

TEST_CASE("measure preservation for a generic stream function") {
    std::vector<ChannelSpec> spec(1);
    spec[0].potential[0] = {StreamMode{{1, 1, 0}, 0.5, 0.0},
                            StreamMode{{1, -1, 0}, 0.5, 0.0}};  // cos x1 cos x2
    SolenoidalFieldSet q(g, spec);
    WienerPath p = sample_path(1, 0.25, 250, 31);
    FlowMap flow = integrate_flow(g, q, p);
    double worst = 0.0;
    for (int s = 0; s <= 250; s += 50)
        worst = std::max(worst,
                         (flow.jacobian(s) - ScalarField(g, 1.0)).max_abs());
    CHECK(worst < 1e-4);
    ScalarField f = ScalarField::from_function(g, [](double x, double y, double) {
        return std::sin(3 * x) + std::cos(2 * x + y);
    });
    CHECK(std::fabs(integrate(compose(f, flow.positions(250))) - integrate(f)) <
          1e-6 * f.max_abs());
}

TEST_CASE("group property on path increments") {
    SolenoidalFieldSet q = shear_set(g);
    WienerPath p = sample_path(1, 0.5, 64, 41);
    FlowMap full = integrate_flow(g, q, p);
    FlowMap first = integrate_flow(g, q, segment(p, 0, 32));
    FlowMap second = integrate_flow(g, q, segment(p, 32, 64), FlowOptions{},
                                    &first.displacement(32));
    CHECK(sup_diff(second.displacement(32), full.displacement(64)) < 1e-9);
}

TEST_CASE("strong convergence vs bridge-refined reference") {
    std::vector<ChannelSpec> spec(1);
    spec[0].potential[0] = {StreamMode{{1, 1, 0}, 0.5, 0.0},
                            StreamMode{{1, -1, 0}, 0.5, 0.0}};
    SolenoidalFieldSet q(g, spec);
    double err2[3] = {0.0, 0.0, 0.0};
    for (int seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
        WienerPath path = sample_path(1, 0.25, 16, seed);
        for (int lvl = 0; lvl < 3; lvl++) {
            WienerPath ref = refine(refine(path));
            FlowMap a = integrate_flow(g, q, path);
            FlowMap b = integrate_flow(g, q, ref);
            const double e =
                sup_diff(a.displacement(path.steps), b.displacement(ref.steps));
            err2[lvl] += e * e;
            path = refine(path);
        }
    }
    // RMS over seeds, observed order across two halvings
    const double order =
        std::log2(std::sqrt(err2[0] / err2[2])) / 2.0;
    CHECK(order >= 0.5);
}

TEST_CASE("gradient bound relating grad v and grad_phi v") {
    SolenoidalFieldSet q = shear_set(g);
    WienerPath p = sample_path(1, 0.5, 64, 57);
    FlowMap flow = invert_flow(integrate_flow(g, q, p));
    VectorField v(std::vector<ScalarField>{
        ScalarField::from_function(
            g, [](double x, double y, double) { return std::sin(x + y); }),
        ScalarField::from_function(
            g, [](double x, double y, double) { return std::cos(2 * x); })});
    // |grad v|_{L2} <= |grad^phi v|_{L2} |grad phi|_{Linf}
    TensorField gv = gradient(v);
    const double lhs = std::sqrt(integrate(contract(gv, gv)));
    // grad^phi v_i = A^T grad v_i
    const TensorField& A = flow.transform_matrix(64);
    double gphi2 = 0.0;
    {
        ScalarField acc(g, 0.0);
        for (int i = 0; i < 2; i++) {
            VectorField gi = gradient(v[i]);
            VectorField tg = apply_transpose(A, gi);
            acc = acc + dot(tg, tg);
        }
        gphi2 = integrate(acc);
    }
    TensorField gphi = gradient(flow.displacement(64));
    double sup_grad_phi = 0.0;
    for (std::size_t i = 0; i < g.size(); i++) {
        double frob = 0.0;
        for (int r = 0; r < 2; r++)
            for (int c = 0; c < 2; c++) {
                const double e = (r == c ? 1.0 : 0.0) + gphi(r, c)[i];
                frob += e * e;
            }
        sup_grad_phi = std::max(sup_grad_phi, std::sqrt(frob));
    }
    CHECK(lhs <= std::sqrt(gphi2) * sup_grad_phi * (1.0 + 1e-10));
}

TEST_CASE("step rejection for oversized displacement") {
    SolenoidalFieldSet q = constant_set(g, 1.0, 0.0);
    WienerPath p = sample_path(1, 1.0, 4, 5);
    p.increments[0][1] = 50.0;  // enormous increment
    p.rebuild_values();
    CHECK_THROWS_AS(integrate_flow(g, q, p), step_rejected_error);
}

TEST_CASE("holder norm of the shear flow tracks the path oscillation") {
    SolenoidalFieldSet q = shear_set(g);
    WienerPath p = sample_path(1, 0.5, 64, 61);
    FlowMap flow = integrate_flow(g, q, p);
    // d = (-sin(y) W, 0): C2 norm of d(t)-d(s) equals |W(t)-W(s)|, so the
    // Hoelder surrogate reduces to path functionals over the sampled nodes
    const int stride = std::max(1, (65 + 31) / 32);
    std::vector<int> idx;
    for (int s = 0; s < 65; s += stride) idx.push_back(s);
    if (idx.back() != 64) idx.push_back(64);
    double supw = 0.0, semi = 0.0;
    for (std::size_t a = 0; a < idx.size(); a++) {
        supw = std::max(supw, std::fabs(p.values[0][idx[a]]));
        for (std::size_t b = a + 1; b < idx.size(); b++)
            semi = std::max(
                semi, std::fabs(p.values[0][idx[b]] - p.values[0][idx[a]]) /
                          std::pow(flow.time(idx[b]) - flow.time(idx[a]), 0.25));
    }
    const double got = holder_norm(flow, 0.25);
    CHECK(got == Catch::Approx(supw + semi).epsilon(1e-8));
}
