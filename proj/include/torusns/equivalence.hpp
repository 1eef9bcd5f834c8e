#ifndef TORUSNS_EQUIVALENCE_HPP
#define TORUSNS_EQUIVALENCE_HPP

#include <cmath>
#include <vector>

#include "torusns/diagnostics.hpp"
#include "torusns/wiener.hpp"

namespace torusns {

/// Eulerian variables recovered from the transformed ones:
/// rho = eta o phi^{-1}, u = v o phi^{-1}.
struct EulerianState {
    double t;
    ScalarField rho;
    VectorField u;
};

inline EulerianState pushforward(const FluidState& st, const FlowMap& flow,
                                 int s) {
    VectorField inv = flow.inverse_positions(s);
    return EulerianState{st.t, compose(st.eta, inv, flow.scheme()),
                         compose(st.v, inv, flow.scheme())};
}

/// Ito-Stratonovich correction functional
/// (1/2) sum_k int rho div(Q_k (Q_k . grad psi)) dx.
inline double correction_weak(const ScalarField& rho,
                              const SolenoidalFieldSet& Q,
                              const ScalarField& psi) {
    VectorField gpsi = gradient(psi);
    double acc = 0.0;
    for (int k = 0; k < Q.channels(); k++) {
        ScalarField qd = dot(Q.Q(k), gpsi);
        acc += 0.5 * integrate(rho * divergence(qd * Q.Q(k)));
    }
    return acc;
}

enum class WeakScheme { ito_left, strat_mid };

namespace detail {

/// Trapezoid quadrature of a node series against the node times.
inline double trapezoid(const std::vector<double>& f,
                        const Trajectory& traj) {
    double acc = 0.0;
    for (int s = 0; s + 1 < traj.nodes(); s++)
        acc += 0.5 * (f[s] + f[s + 1]) * traj.dt(s);
    return acc;
}

inline double ito_sum(const std::vector<std::vector<double>>& f,
                      const WienerPath& path, WeakScheme scheme) {
    double acc = 0.0;
    for (int k = 0; k < path.channels; k++)
        for (int s = 0; s < path.steps; s++) {
            const double val = scheme == WeakScheme::ito_left
                                   ? f[k][s]
                                   : 0.5 * (f[k][s] + f[k][s + 1]);
            acc += val * path.increments[k][s];
        }
    return acc;
}

}  // namespace detail

/// Discrete residual of the Eulerian weak continuity equation.
///
/// All Eulerian space integrals are evaluated by pulling back along
/// phi (volume preserving): int rho F dy = int eta (F o phi) dx, which
/// avoids pushing the solution forward at every node. Ito integrals use
/// left-point sums; the Stratonovich cross-check uses midpoint sums and
/// drops the correction term. The correction integral (a quadratic
/// covariation) is discretized with the realized products
/// dW_k dW_j instead of their mean delta_kj dt, so that the left-point
/// Ito and midpoint Stratonovich evaluations agree pathwise to O(dt);
/// with the mean-bracket quadrature their difference fluctuates at
/// O(sqrt(dt)) along a single path.
inline double weak_residual_continuity(const Trajectory& traj,
                                       const WienerPath& path,
                                       const SolenoidalFieldSet& Q,
                                       const ScalarField& psi,
                                       WeakScheme scheme = WeakScheme::ito_left) {
    if (traj.nodes() != path.steps + 1)
        throw error("weak_residual_continuity: trajectory/path misaligned");
    const FlowMap& flow = *traj.flow;
    const int K = Q.channels();

    VectorField gpsi = gradient(psi);
    // (k, j) pair fields div((Q_k . grad psi) Q_j) for the covariation.
    std::vector<ScalarField> corr_fields;
    for (int k = 0; k < K; k++)
        for (int j = 0; j < K; j++)
            corr_fields.push_back(divergence(dot(Q.Q(k), gpsi) * Q.Q(j)));

    std::vector<double> mass_pair(traj.nodes()), transport(traj.nodes());
    std::vector<std::vector<double>> noise(K,
                                           std::vector<double>(traj.nodes()));
    std::vector<std::vector<double>> corr(K * K,
                                          std::vector<double>(traj.nodes()));
    for (int s = 0; s < traj.nodes(); s++) {
        const FluidState& st = traj.at(s);
        VectorField pos = flow.positions(s);
        ScalarField psi_c = compose(psi, pos, flow.scheme());
        VectorField gpsi_c = compose(gpsi, pos, flow.scheme());
        mass_pair[s] = integrate(st.eta * psi_c);
        transport[s] = integrate(st.eta * dot(st.v, gpsi_c));
        for (int k = 0; k < K; k++) {
            VectorField qc = compose(Q.Q(k), pos, flow.scheme());
            noise[k][s] = integrate(st.eta * dot(qc, gpsi_c));
            for (int j = 0; j < K; j++)
                corr[k * K + j][s] = integrate(
                    st.eta *
                    compose(corr_fields[k * K + j], pos, flow.scheme()));
        }
    }

    double res = mass_pair[traj.nodes() - 1] - mass_pair[0];
    res -= detail::trapezoid(transport, traj);
    res += detail::ito_sum(noise, path, scheme);
    if (scheme == WeakScheme::ito_left)
        for (int k = 0; k < K; k++)
            for (int j = 0; j < K; j++)
                for (int s = 0; s < path.steps; s++)
                    res -= 0.5 * corr[k * K + j][s] *
                           path.increments[k][s] * path.increments[j][s];
    return std::fabs(res);
}

/// Discrete residual of the Eulerian weak momentum equation; same
/// conventions as the continuity residual. The pressure law is the
/// run's p_delta (identical to p when delta = 0).
inline double weak_residual_momentum(const Trajectory& traj,
                                     const WienerPath& path,
                                     const SolenoidalFieldSet& Q,
                                     const VectorField& psi,
                                     WeakScheme scheme = WeakScheme::ito_left) {
    if (traj.nodes() != path.steps + 1)
        throw error("weak_residual_momentum: trajectory/path misaligned");
    const FlowMap& flow = *traj.flow;
    const LayerParams& p = traj.params;
    const int K = Q.channels();
    const int dim = psi.dim();

    TensorField gpsi = gradient(psi);
    ScalarField dpsi = divergence(psi);
    // h_{kj} with components div((Q_k . grad psi_i) Q_j).
    std::vector<VectorField> corr_fields;
    for (int k = 0; k < K; k++)
        for (int j = 0; j < K; j++) {
            std::vector<ScalarField> c;
            for (int i = 0; i < dim; i++)
                c.push_back(
                    divergence(dot(Q.Q(k), gradient(psi[i])) * Q.Q(j)));
            corr_fields.emplace_back(std::move(c));
        }

    std::vector<double> mom_pair(traj.nodes()), convection(traj.nodes()),
        viscous(traj.nodes()), pressure(traj.nodes());
    std::vector<std::vector<double>> noise(K,
                                           std::vector<double>(traj.nodes()));
    std::vector<std::vector<double>> corr(K * K,
                                          std::vector<double>(traj.nodes()));
    for (int s = 0; s < traj.nodes(); s++) {
        const FluidState& st = traj.at(s);
        TransformedOpContext ctx(flow, s);
        VectorField pos = flow.positions(s);
        VectorField psi_c = compose(psi, pos, flow.scheme());
        TensorField gpsi_c = compose(gpsi, pos, flow.scheme());

        mom_pair[s] = integrate(st.eta * dot(st.v, psi_c));
        // rho u ox u : grad psi pulled back.
        ScalarField conv(st.eta.grid(), 0.0);
        for (int i = 0; i < dim; i++)
            for (int j = 0; j < dim; j++)
                conv = conv + st.v[i] * st.v[j] * gpsi_c(i, j);
        convection[s] = integrate(st.eta * conv);
        // S(grad u) o phi equals the transformed stress of v.
        TensorField stress = stress_phi(ctx, st.v, p.mu, p.lambda);
        viscous[s] = integrate(contract(stress, gpsi_c));
        pressure[s] = integrate(pressure_delta(st.eta, p) *
                                compose(dpsi, pos, flow.scheme()));
        for (int k = 0; k < K; k++) {
            VectorField qc = compose(Q.Q(k), pos, flow.scheme());
            ScalarField sto(st.eta.grid(), 0.0);
            for (int i = 0; i < dim; i++)
                for (int j = 0; j < dim; j++)
                    sto = sto + st.v[i] * qc[j] * gpsi_c(i, j);
            noise[k][s] = integrate(st.eta * sto);
            for (int j = 0; j < K; j++) {
                VectorField hc =
                    compose(corr_fields[k * K + j], pos, flow.scheme());
                corr[k * K + j][s] = integrate(st.eta * dot(st.v, hc));
            }
        }
    }

    double res = mom_pair[traj.nodes() - 1] - mom_pair[0];
    res -= detail::trapezoid(convection, traj);
    res += detail::trapezoid(viscous, traj);
    res -= detail::trapezoid(pressure, traj);
    res += detail::ito_sum(noise, path, scheme);
    if (scheme == WeakScheme::ito_left)
        for (int k = 0; k < K; k++)
            for (int j = 0; j < K; j++)
                for (int s = 0; s < path.steps; s++)
                    res -= 0.5 * corr[k * K + j][s] *
                           path.increments[k][s] * path.increments[j][s];
    return std::fabs(res);
}

}  // namespace torusns

#endif
