#ifndef TORUSNS_SOLVER_HPP
#define TORUSNS_SOLVER_HPP

#include <cmath>
#include <memory>
#include <vector>

#include "torusns/state.hpp"
#include "torusns/xops.hpp"

namespace torusns {

struct SolverOptions {
    double dt_safety = 10.0;     // flow step-size guard, in half-cells
    InterpScheme interp = InterpScheme::trig;
    double op_tol = 1e-8;        // A-form vs conjugation agreement
    double lin_tol = 1e-9;       // relative residual of the momentum solve
    int max_cg_iter = 500;
    int max_halvings = 8;        // positivity-rejection retries per step
};

/// Initial-data regularization: mollified, lifted strictly positive
/// density and a velocity recovered from the mollified momentum.
struct RegularizedData {
    FluidState state;
    double raw_energy;
    double regularized_energy;
    double energy_gap;
};

inline RegularizedData regularize_initial_data(const ScalarField& rho0,
                                               const VectorField& q0,
                                               const LayerParams& p) {
    if (rho0.min() < 0.0)
        throw error("regularize_initial_data: negative initial density");
    ScalarField eta0 = shift(mollify(rho0, p.l), p.floor_lift);
    if (eta0.min() <= 0.0)
        throw error("regularize_initial_data: density not strictly positive; "
                    "increase floor_lift");
    VectorField q = mollify(q0, p.l);
    std::vector<ScalarField> vc;
    for (int d = 0; d < q.dim(); d++) vc.push_back(q[d] / eta0);
    VectorField v0(std::move(vc));

    // Kinetic part of the raw data uses the 0/0 = 0 vacuum convention.
    double raw_kin = 0.0;
    {
        std::vector<double> k(rho0.size(), 0.0);
        for (std::size_t i = 0; i < rho0.size(); i++) {
            double q2 = 0.0;
            for (int d = 0; d < q0.dim(); d++) q2 += q0[d][i] * q0[d][i];
            if (rho0[i] > 1e-14) k[i] = 0.5 * q2 / rho0[i];
        }
        raw_kin = integrate(ScalarField(rho0.grid(), std::move(k)));
    }
    const double raw = raw_kin + integrate(pressure_potential_delta(rho0, p));
    const double reg = integrate(0.5 * (eta0 * dot(v0, v0)) +
                                 pressure_potential_delta(eta0, p));
    RegularizedData out{FluidState(0.0, std::move(eta0), std::move(v0)), raw,
                        reg, std::fabs(reg - raw)};
    return out;
}

namespace detail {

/// Momentum-solve operator L v = (eps_n + [eta+]_l) v - dt div_phi
/// S(grad_phi v); SPD with respect to the grid inner product.
struct MomentumOperator {
    const TransformedOpContext& ctx;
    const ScalarField& weight;  // eps_n + [eta+]_l
    double dt, mu, lambda;

    VectorField operator()(const VectorField& v) const {
        TensorField s = stress_phi(ctx, v, mu, lambda);
        return weight * v - dt * div_phi_tensor(ctx, s);
    }
};

inline double inner(const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (int d = 0; d < a.dim(); d++)
        for (std::size_t i = 0; i < a[d].size(); i++) s += a[d][i] * b[d][i];
    return s;
}

/// Constant-coefficient preconditioner: per Fourier mode invert
/// wbar I + dt (mu |k|^2 I + (mu+lambda) k k^T).
inline VectorField precondition(const VectorField& r, double wbar, double dt,
                                double mu, double lambda) {
    const TorusGrid& g = r.grid();
    const int dim = g.dim();
    std::vector<std::vector<std::complex<double>>> spec(dim);
    for (int d = 0; d < dim; d++) spec[d] = r[d].spectrum();
    for (std::size_t idx = 0; idx < g.size(); idx++) {
        auto j = g.unflatten(idx);
        double k[3] = {0.0, 0.0, 0.0};
        double k2 = 0.0;
        for (int d = 0; d < dim; d++) {
            k[d] = detail::deriv_wavenumber(g, j[d]);
            k2 += k[d] * k[d];
        }
        const double alpha = wbar + dt * mu * k2;
        const double beta = dt * (mu + lambda);
        std::complex<double> kdot(0.0, 0.0);
        for (int d = 0; d < dim; d++) kdot += k[d] * spec[d][idx];
        const double corr = beta / (alpha + beta * k2);
        for (int d = 0; d < dim; d++)
            spec[d][idx] = (spec[d][idx] - corr * kdot * k[d]) / alpha;
    }
    std::vector<ScalarField> c;
    for (int d = 0; d < dim; d++)
        c.push_back(field_from_spectrum(g, spec[d]));
    return VectorField(std::move(c));
}

inline VectorField pcg_solve(const MomentumOperator& op, const VectorField& rhs,
                             const VectorField& guess, double tol,
                             int max_iter) {
    const double wbar = op.weight.mean();
    VectorField x = guess;
    VectorField r = rhs - op(x);
    const double rhs_norm = std::sqrt(inner(rhs, rhs));
    if (rhs_norm == 0.0) return VectorField(rhs.grid(), 0.0);
    VectorField z = precondition(r, wbar, op.dt, op.mu, op.lambda);
    VectorField p = z;
    double rz = inner(r, z);
    for (int it = 0; it < max_iter; it++) {
        if (std::sqrt(inner(r, r)) <= tol * rhs_norm) return x;
        VectorField ap = op(p);
        const double alpha = rz / inner(p, ap);
        x = x + alpha * p;
        r = r - alpha * ap;
        z = precondition(r, wbar, op.dt, op.mu, op.lambda);
        const double rz_new = inner(r, z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    if (std::sqrt(inner(r, r)) <= tol * rhs_norm) return x;
    throw convergence_error("momentum solve: PCG stagnated");
}

}  // namespace detail

/// One semi-implicit step at frozen flow context ctx (A at the step's
/// left node): spectral implicit continuity, PCG implicit viscosity,
/// explicit transport/pressure/commutator.
inline FluidState step(const FluidState& state, const TransformedOpContext& ctx,
                       const LayerParams& p, double dt,
                       const SolverOptions& opts = {}) {
    if (dt <= 0.0) throw error("step: dt must be positive");
    const ScalarField& eta = state.eta;
    const VectorField& v = state.v;

    // Continuity: (I - dt eps_n Delta) eta+ = eta - dt div(A eta v).
    VectorField flux = apply(ctx.A(), eta * v);
    ScalarField rhs_eta = eta - dt * divergence(flux);
    // The transport term has exactly zero spectral mean; re-pin the mean
    // so mass is conserved to machine precision across many steps.
    rhs_eta = shift(rhs_eta, eta.mean() - rhs_eta.mean());
    ScalarField eta_new = p.eps_n > 0.0
                              ? helmholtz_solve(rhs_eta, dt * p.eps_n)
                              : rhs_eta;
    if (eta_new.min() < p.density_floor)
        throw step_rejected_error("step: density fell below the floor", -1,
                                  eta_new.min());

    // Momentum: (eps_n + [eta+]_l) v+ - dt div_phi S(grad_phi v+) =
    //   (eps_n + [eta]_l) v
    //   - dt [ div([A eta v]_l ox v) + eps_n ([grad eta]_l . grad) v
    //          + grad_phi p_delta(eta+) ].
    ScalarField w_old = shift(mollify(eta, p.l), p.eps_n);
    ScalarField w_new = shift(mollify(eta_new, p.l), p.eps_n);

    VectorField flux_l = mollify(flux, p.l);
    std::vector<ScalarField> conv;
    for (int i = 0; i < v.dim(); i++) {
        std::vector<ScalarField> row;
        for (int j = 0; j < v.dim(); j++) row.push_back(v[i] * flux_l[j]);
        conv.push_back(divergence(VectorField(std::move(row))));
    }
    VectorField convection(std::move(conv));

    VectorField grad_eta_l = mollify(gradient(eta), p.l);
    std::vector<ScalarField> comm;
    for (int i = 0; i < v.dim(); i++) {
        ScalarField s = grad_eta_l[0] * partial(v[i], 0);
        for (int j = 1; j < v.dim(); j++)
            s = s + grad_eta_l[j] * partial(v[i], j);
        comm.push_back(p.eps_n * s);
    }
    VectorField commutator(std::move(comm));

    VectorField grad_p = grad_phi(ctx, pressure_delta(eta_new, p));
    VectorField rhs = w_old * v - dt * (convection + commutator + grad_p);

    detail::MomentumOperator op{ctx, w_new, dt, p.mu, p.lambda};
    VectorField v_new =
        detail::pcg_solve(op, rhs, v, opts.lin_tol, opts.max_cg_iter);

    return FluidState(state.t + dt, std::move(eta_new), std::move(v_new));
}

/// Step with positivity retries: on rejection the interval is covered
/// by two half steps (same frozen context), recursively, up to
/// max_halvings levels.
inline FluidState step_adaptive(const FluidState& state,
                                const TransformedOpContext& ctx,
                                const LayerParams& p, double dt,
                                const SolverOptions& opts, int depth = 0) {
    try {
        return step(state, ctx, p, dt, opts);
    } catch (const step_rejected_error&) {
        if (depth >= opts.max_halvings) throw;
        FluidState mid = step_adaptive(state, ctx, p, 0.5 * dt, opts, depth + 1);
        return step_adaptive(mid, ctx, p, 0.5 * dt, opts, depth + 1);
    }
}

/// March the transformed system across all flow nodes. The flow must
/// carry inverses (contexts need A). States are stored at every node.
inline Trajectory run_trajectory(const std::shared_ptr<const FlowMap>& flow,
                                 const FluidState& initial,
                                 const LayerParams& params,
                                 const SolverOptions& opts = {}) {
    Trajectory traj;
    traj.params = params;
    traj.flow = flow;
    traj.states.push_back(initial);
    for (int s = 0; s + 1 < flow->nodes(); s++) {
        TransformedOpContext ctx(*flow, s);
        const double dt = flow->time(s + 1) - flow->time(s);
        traj.states.push_back(
            step_adaptive(traj.states.back(), ctx, params, dt, opts));
    }
    return traj;
}

}  // namespace torusns

#endif
