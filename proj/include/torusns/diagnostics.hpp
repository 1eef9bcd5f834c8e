#ifndef TORUSNS_DIAGNOSTICS_HPP
#define TORUSNS_DIAGNOSTICS_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "torusns/solver.hpp"

namespace torusns {

// ---------------------------------------------------------------------------
// energy balance

struct EnergyReport {
    std::vector<double> time;        // node times, size = nodes
    std::vector<double> energy;      // E(t_s)
    std::vector<double> d_viscous;   // per step, at the left node
    std::vector<double> d_artificial;
    std::vector<double> residual;    // (E_{s+1}-E_s)/dt + D_v + D_a
    double max_residual = 0.0;
};

inline double total_energy(const FluidState& st, const LayerParams& p) {
    ScalarField w = shift(mollify(st.eta, p.l), p.eps_n);
    return integrate(0.5 * (w * dot(st.v, st.v)) +
                     pressure_potential_delta(st.eta, p));
}

/// Parabolic dissipation bracket P_delta''(eta) = a gamma eta^{gamma-2}
/// + delta Gamma eta^{Gamma-2} + 2 delta.
inline ScalarField potential_second_derivative(const ScalarField& eta,
                                               const LayerParams& p) {
    std::vector<double> v(eta.size());
    for (std::size_t i = 0; i < eta.size(); i++) {
        const double z = eta[i];
        v[i] = p.a * p.gamma * std::pow(z, p.gamma - 2.0) +
               p.delta * (p.Gamma * std::pow(z, p.Gamma - 2.0) + 2.0);
    }
    return ScalarField(eta.grid(), std::move(v));
}

/// Discrete residual of the energy identity
///   d/dt int(1/2 (eps_n+[eta]_l)|v|^2 + P_delta(eta))
///   + int S(grad_phi v):grad_phi v
///   + eps_n int P_delta''(eta) |grad eta|^2 = 0,
/// with the dissipation terms evaluated at the step's left node under
/// the same frozen A the solver used.
inline EnergyReport energy_report(const Trajectory& traj) {
    const LayerParams& p = traj.params;
    EnergyReport rep;
    for (const auto& st : traj.states) {
        rep.time.push_back(st.t);
        rep.energy.push_back(total_energy(st, p));
    }
    for (int s = 0; s + 1 < traj.nodes(); s++) {
        const FluidState& st = traj.at(s);
        TransformedOpContext ctx(*traj.flow, s);
        TensorField g = grad_phi_tensor(ctx, st.v);
        TensorField stress = stress_phi(ctx, st.v, p.mu, p.lambda);
        const double dv = integrate(contract(stress, g));
        VectorField ge = gradient(st.eta);
        const double da =
            p.eps_n *
            integrate(potential_second_derivative(st.eta, p) * dot(ge, ge));
        const double dt = traj.dt(s);
        rep.d_viscous.push_back(dv);
        rep.d_artificial.push_back(da);
        const double r =
            (rep.energy[s + 1] - rep.energy[s]) / dt + dv + da;
        rep.residual.push_back(r);
        rep.max_residual = std::max(rep.max_residual, std::fabs(r));
    }
    return rep;
}

/// Artificial (delta-weighted) share of the pressure potential.
inline double artificial_energy(const FluidState& st, const LayerParams& p) {
    std::vector<double> v(st.eta.size());
    for (std::size_t i = 0; i < st.eta.size(); i++) {
        const double z = st.eta[i];
        v[i] = p.delta * (std::pow(z, p.Gamma) / (p.Gamma - 1.0) + z * z);
    }
    return integrate(ScalarField(st.eta.grid(), std::move(v)));
}

inline double mass_drift(const Trajectory& traj) {
    const double m0 = integrate(traj.at(0).eta);
    double worst = 0.0;
    for (const auto& st : traj.states)
        worst = std::max(worst, std::fabs(integrate(st.eta) - m0));
    return worst / std::fabs(m0);
}

/// Per-step margin of the L^2 density estimate
///   1/2 d/dt int eta^2 + eps_n int |grad eta|^2
///     <= |eta|_{L^4}^2 |grad_phi v|_{L^2};
/// nonnegative margins mean the bound holds discretely.
inline std::vector<double> density_estimate_margin(const Trajectory& traj) {
    const LayerParams& p = traj.params;
    std::vector<double> out;
    for (int s = 0; s + 1 < traj.nodes(); s++) {
        const FluidState& st = traj.at(s);
        TransformedOpContext ctx(*traj.flow, s);
        const double dt = traj.dt(s);
        const double l2a = integrate(st.eta * st.eta);
        const ScalarField& en = traj.at(s + 1).eta;
        const double l2b = integrate(en * en);
        VectorField ge = gradient(st.eta);
        const double lhs =
            0.5 * (l2b - l2a) / dt + p.eps_n * integrate(dot(ge, ge));
        TensorField g = grad_phi_tensor(ctx, st.v);
        const double gnorm = std::sqrt(integrate(contract(g, g)));
        const double eta4 =
            std::sqrt(std::sqrt(integrate(pointwise_pow(st.eta, 4.0))));
        out.push_back(eta4 * eta4 * gnorm - lhs);
    }
    return out;
}

// ---------------------------------------------------------------------------
// pressure functionals

/// Time quadrature (trapezoid) of int eta^{Gamma+1} dx.
inline double pressure_integrability(const Trajectory& traj, double Gamma) {
    double acc = 0.0;
    for (int s = 0; s + 1 < traj.nodes(); s++) {
        const double fa = integrate(pointwise_pow(traj.at(s).eta, Gamma + 1.0));
        const double fb =
            integrate(pointwise_pow(traj.at(s + 1).eta, Gamma + 1.0));
        acc += 0.5 * (fa + fb) * traj.dt(s);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// random time partition

struct TimePartition {
    std::vector<int> node_indices;  // includes 0 and the last node
    std::vector<double> times;
    int intervals() const { return static_cast<int>(times.size()) - 1; }
};

namespace detail {

inline double matrix_sup_diff(const TensorField& a, const TensorField& b) {
    double m = 0.0;
    for (int i = 0; i < a.dim(); i++)
        for (int j = 0; j < a.dim(); j++)
            m = std::max(m, (a(i, j) - b(i, j)).max_abs());
    return m;
}

}  // namespace detail

/// Greedy partition of [0,T]: extend each subinterval while
/// sup-norm of A(t) - A(t_i) stays within kappa at every stored node.
inline TimePartition time_partition(const FlowMap& flow, double kappa) {
    if (kappa <= 0.0) throw error("time_partition: kappa must be > 0");
    TimePartition part;
    part.node_indices.push_back(0);
    part.times.push_back(flow.time(0));
    int anchor = 0;
    for (int s = 1; s < flow.nodes(); s++) {
        const double diff = detail::matrix_sup_diff(
            flow.transform_matrix(s), flow.transform_matrix(anchor));
        if (diff > kappa) {
            if (s - 1 == anchor)
                throw error("time_partition: kappa violated within a single "
                            "step at node " + std::to_string(s));
            anchor = s - 1;
            part.node_indices.push_back(anchor);
            part.times.push_back(flow.time(anchor));
            s--;  // re-test s against the new anchor
        }
    }
    part.node_indices.push_back(flow.nodes() - 1);
    part.times.push_back(flow.time(flow.nodes() - 1));
    return part;
}

// ---------------------------------------------------------------------------
// cut-off functions

/// Base cut-off T: identity below 1, constant 2 above 3, and on [1,3]
/// the fixed C^2 concave polynomial in u = (z-1)/2:
///   T = 1 + 2u - 2u^3 + u^4
/// (value/slope match at both ends, T'' = 12u(u-1)/4 <= 0).
inline double cutoff_T(double z) {
    if (z <= 1.0) return z;
    if (z >= 3.0) return 2.0;
    const double u = 0.5 * (z - 1.0);
    return 1.0 + 2.0 * u - 2.0 * u * u * u + u * u * u * u;
}

inline double cutoff_T_prime(double z) {
    if (z <= 1.0) return 1.0;
    if (z >= 3.0) return 0.0;
    const double u = 0.5 * (z - 1.0);
    return 0.5 * (2.0 - 6.0 * u * u + 4.0 * u * u * u);
}

inline double cutoff_Tk(double z, double k) { return k * cutoff_T(z / k); }
inline double cutoff_Tk_prime(double z, double k) {
    return cutoff_T_prime(z / k);
}

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double fa, double fb,
                               double fm, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1);
}

inline double integrate_1d(const std::function<double(double)>& f, double a,
                           double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fb, fm, whole, tol, 40);
}

}  // namespace detail

/// L_k(z) = z int_1^z T_k(r)/r^2 dr; closed form z ln z below the
/// cut-off, analytic tail above 3k, adaptive Simpson in between.
inline double cutoff_Lk(double z, double k) {
    if (z < 0.0 || k < 1.0) throw error("cutoff_Lk: need z >= 0, k >= 1");
    if (z == 0.0) return 0.0;
    if (z <= k) return z * std::log(z);
    double integral = std::log(k);  // int_1^k 1/r dr
    const double b = std::min(z, 3.0 * k);
    integral += detail::integrate_1d(
        [k](double r) { return cutoff_Tk(r, k) / (r * r); }, k, b, 1e-11);
    if (z > 3.0 * k) integral += 2.0 * k * (1.0 / (3.0 * k) - 1.0 / z);
    return z * integral;
}

// ---------------------------------------------------------------------------
// renormalized continuity residual

/// Discrete weak residual of the renormalized continuity equation
///   int theta(eta) psi |_0^T - int int theta(eta) v . grad_phi psi
///     - eps_n int int theta'(eta) Lap(eta) psi
///   = int int (theta(eta) - theta'(eta) eta) div_phi v psi,
/// with trapezoid time quadrature; the parabolic term is kept so the
/// residual is O(dt) for eps_n > 0 as well (set include_parabolic =
/// false to evaluate the inviscid form).
inline double renorm_residual(const Trajectory& traj,
                              const std::function<double(double)>& theta,
                              const std::function<double(double)>& theta_prime,
                              const ScalarField& psi,
                              bool include_parabolic = true) {
    const LayerParams& p = traj.params;
    auto map_field = [](const ScalarField& f,
                        const std::function<double(double)>& fn) {
        std::vector<double> v(f.size());
        for (std::size_t i = 0; i < f.size(); i++) v[i] = fn(f[i]);
        return ScalarField(f.grid(), std::move(v));
    };

    std::vector<double> integrand(traj.nodes());
    for (int s = 0; s < traj.nodes(); s++) {
        const FluidState& st = traj.at(s);
        TransformedOpContext ctx(*traj.flow, s);
        ScalarField th = map_field(st.eta, theta);
        ScalarField thp = map_field(st.eta, theta_prime);
        VectorField gpsi = grad_phi(ctx, psi);
        double val = integrate(th * dot(st.v, gpsi));
        val += integrate((th - thp * st.eta) * div_phi(ctx, st.v) * psi);
        if (include_parabolic && p.eps_n > 0.0)
            val += p.eps_n * integrate(thp * laplacian(st.eta) * psi);
        integrand[s] = val;
    }
    double time_int = 0.0;
    for (int s = 0; s + 1 < traj.nodes(); s++)
        time_int += 0.5 * (integrand[s] + integrand[s + 1]) * traj.dt(s);

    const double boundary =
        integrate(map_field(traj.states.back().eta, theta) * psi) -
        integrate(map_field(traj.at(0).eta, theta) * psi);
    return std::fabs(boundary - time_int);
}

}  // namespace torusns

#endif
