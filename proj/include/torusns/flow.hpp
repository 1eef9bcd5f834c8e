#ifndef TORUSNS_FLOW_HPP
#define TORUSNS_FLOW_HPP

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "torusns/interp.hpp"
#include "torusns/solenoidal.hpp"
#include "torusns/spectral.hpp"
#include "torusns/wiener.hpp"

namespace torusns {

struct FlowOptions {
    InterpScheme scheme = InterpScheme::trig;
    double safety = 10.0;       // per-step displacement limit, in half-cells
    double inv_tol = 1e-8;      // composite check on phi o phi^{-1}
    int max_inv_iter = 100;
    // The Heun update is applied on fractional increments dW/substeps;
    // this keeps the Stratonovich limit while shrinking the per-step
    // volume defect (the exact flow of a solenoidal field preserves
    // measure, the one-step map only up to O(|dW|^3)).
    int substeps = 16;
};

/// Coordinate field x (the identity map).
inline VectorField identity_map(const TorusGrid& g) {
    std::vector<ScalarField> c;
    for (int d = 0; d < g.dim(); d++) {
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); i++) v[i] = g.point(i)[d];
        c.emplace_back(g, std::move(v));
    }
    return VectorField(std::move(c));
}

/// Discrete stochastic diffeomorphism: forward displacement d_s with
/// phi_s(x) = x + d_s(x) at every time node, optionally the inverse
/// displacement, and a cache of coefficient matrices A_s.
class FlowMap {
  public:
    FlowMap(TorusGrid grid, std::vector<double> times)
        : grid_(grid), times_(std::move(times)) {}

    const TorusGrid& grid() const { return grid_; }
    int nodes() const { return static_cast<int>(times_.size()); }
    double time(int s) const { return times_[s]; }
    const std::vector<double>& times() const { return times_; }

    void push_forward(VectorField d) { fwd_.push_back(std::move(d)); }
    void push_inverse(VectorField d) { inv_.push_back(std::move(d)); }
    bool has_inverse() const { return inv_.size() == times_.size(); }

    const VectorField& displacement(int s) const { return fwd_[s]; }
    const VectorField& inverse_displacement(int s) const {
        if (!has_inverse()) throw error("FlowMap: inverse not computed");
        return inv_[s];
    }

    /// Absolute positions phi_s(x_j) at the grid nodes.
    VectorField positions(int s) const { return node_positions(fwd_[s]); }
    VectorField inverse_positions(int s) const {
        return node_positions(inverse_displacement(s));
    }

    /// Coefficient matrix A_s = (grad phi^{-1}) o phi = I + (grad
    /// d_inv) o phi, cached per node.
    const TensorField& transform_matrix(int s) const {
        auto it = a_cache_.find(s);
        if (it != a_cache_.end()) return it->second;
        const TensorField grad_inv = gradient(inverse_displacement(s));
        TensorField comp = compose(grad_inv, positions(s), scheme_);
        std::vector<ScalarField> c;
        for (int i = 0; i < grid_.dim(); i++)
            for (int j = 0; j < grid_.dim(); j++)
                c.push_back(i == j ? shift(comp(i, j), 1.0) : comp(i, j));
        auto res = a_cache_.emplace(s, TensorField(grid_, std::move(c)));
        return res.first->second;
    }

    void drop_matrix_cache() const { a_cache_.clear(); }

    ScalarField jacobian(int s) const {
        const TensorField g = gradient(fwd_[s]);
        const int n = grid_.dim();
        std::vector<double> det(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); i++) {
            if (n == 2) {
                const double a = 1.0 + g(0, 0)[i], b = g(0, 1)[i];
                const double c = g(1, 0)[i], d = 1.0 + g(1, 1)[i];
                det[i] = a * d - b * c;
            } else {
                double m[3][3];
                for (int r = 0; r < 3; r++)
                    for (int q = 0; q < 3; q++)
                        m[r][q] = (r == q ? 1.0 : 0.0) + g(r, q)[i];
                det[i] = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            }
        }
        return ScalarField(grid_, std::move(det));
    }

    InterpScheme scheme() const { return scheme_; }
    void set_scheme(InterpScheme s) { scheme_ = s; }

  private:
    VectorField node_positions(const VectorField& d) const {
        std::vector<ScalarField> c;
        for (int k = 0; k < grid_.dim(); k++) {
            std::vector<double> v(grid_.size());
            for (std::size_t i = 0; i < grid_.size(); i++)
                v[i] = grid_.point(i)[k] + d[k][i];
            c.emplace_back(grid_, std::move(v));
        }
        return VectorField(std::move(c));
    }

    TorusGrid grid_;
    std::vector<double> times_;
    std::vector<VectorField> fwd_;
    std::vector<VectorField> inv_;
    InterpScheme scheme_ = InterpScheme::trig;
    mutable std::map<int, TensorField> a_cache_;
};

namespace detail {

/// Recenter a displacement field so its mean lies in [-pi, pi); the map
/// on the torus is unchanged.
inline VectorField wrap_displacement(const TorusGrid& g,
                                     const std::vector<std::array<double, 3>>& d) {
    std::vector<ScalarField> c;
    for (int k = 0; k < g.dim(); k++) {
        double mean = 0.0;
        for (const auto& p : d) mean += p[k];
        mean /= static_cast<double>(d.size());
        const double off =
            two_pi * std::floor((mean + 3.14159265358979323846) / two_pi);
        std::vector<double> v(d.size());
        for (std::size_t i = 0; i < d.size(); i++) v[i] = d[i][k] - off;
        c.emplace_back(g, std::move(v));
    }
    return VectorField(std::move(c));
}

}  // namespace detail

/// Integrate the Stratonovich flow SDE d(phi) = -sum_k Q_k(phi) o dW_k
/// with the Heun predictor/corrector. `initial` (a displacement field)
/// continues a flow from a previous leg; default is the identity.
inline FlowMap integrate_flow(const TorusGrid& grid,
                              const SolenoidalFieldSet& Q,
                              const WienerPath& path,
                              const FlowOptions& opts = {},
                              const VectorField* initial = nullptr) {
    const int K = Q.channels();
    if (K != path.channels)
        throw error("integrate_flow: channel count mismatch");
    const int dim = grid.dim();
    const std::size_t n = grid.size();

    // Off-grid evaluators for every channel component, built once.
    std::vector<std::vector<TrigInterpolant>> qi(K);
    for (int k = 0; k < K; k++)
        for (int d = 0; d < dim; d++) qi[k].emplace_back(Q.Q(k)[d]);
    auto eval_q = [&](int k, int d, const std::array<double, 3>& p) {
        return opts.scheme == InterpScheme::trig ? qi[k][d](p)
                                                 : cubic_eval(Q.Q(k)[d], p);
    };

    std::vector<double> times(path.steps + 1);
    for (int s = 0; s <= path.steps; s++) times[s] = path.time(s);
    FlowMap flow(grid, times);
    flow.set_scheme(opts.scheme);

    // Current displacement, kept unwrapped during integration so the
    // per-node trajectories are continuous in time.
    std::vector<std::array<double, 3>> d(n, {0.0, 0.0, 0.0});
    if (initial) {
        for (std::size_t i = 0; i < n; i++)
            for (int c = 0; c < dim; c++) d[i][c] = (*initial)[c][i];
    }
    flow.push_forward(detail::wrap_displacement(grid, d));

    const double max_step = opts.safety * 0.5 * grid.spacing();
    const int m = std::max(1, opts.substeps);
    for (int s = 0; s < path.steps; s++) {
        for (std::size_t i = 0; i < n; i++) {
            const auto x = grid.point(i);
            std::array<double, 3> pos;
            for (int c = 0; c < dim; c++) pos[c] = x[c] + d[i][c];
            double moved = 0.0;
            for (int sub = 0; sub < m; sub++) {
                // Predictor: Euler with the left-point evaluation.
                std::array<double, 3> pstar = pos;
                for (int k = 0; k < K; k++) {
                    const double dw = path.increments[k][s] / m;
                    for (int c = 0; c < dim; c++)
                        pstar[c] -= dw * eval_q(k, c, pos);
                }
                // Corrector: average the drift at the predicted point.
                std::array<double, 3> total{0.0, 0.0, 0.0};
                for (int k = 0; k < K; k++) {
                    const double dw = path.increments[k][s] / m;
                    for (int c = 0; c < dim; c++)
                        total[c] -= 0.5 * dw *
                                    (eval_q(k, c, pos) + eval_q(k, c, pstar));
                }
                for (int c = 0; c < dim; c++) {
                    pos[c] += total[c];
                    moved += std::fabs(total[c]);
                }
            }
            if (moved > max_step)
                throw step_rejected_error(
                    "integrate_flow: step displacement exceeds safety bound",
                    s, moved);
            for (int c = 0; c < dim; c++) d[i][c] = pos[c] - x[c];
        }
        flow.push_forward(detail::wrap_displacement(grid, d));
    }
    return flow;
}

/// Fill the inverse displacements by damped fixed-point iteration
/// y <- x - d(y) at every node, warm-started from the previous time
/// node, then check phi o phi^{-1} = id within inv_tol.
inline FlowMap invert_flow(FlowMap flow, const FlowOptions& opts = {}) {
    const TorusGrid& grid = flow.grid();
    const int dim = grid.dim();
    const std::size_t n = grid.size();

    std::vector<std::array<double, 3>> y(n);
    for (std::size_t i = 0; i < n; i++) y[i] = grid.point(i);

    for (int s = 0; s < flow.nodes(); s++) {
        const VectorField& d = flow.displacement(s);
        std::vector<TrigInterpolant> di;
        if (opts.scheme == InterpScheme::trig)
            for (int c = 0; c < dim; c++) di.emplace_back(d[c]);
        auto eval_d = [&](int c, const std::array<double, 3>& p) {
            return opts.scheme == InterpScheme::trig ? di[c](p)
                                                     : cubic_eval(d[c], p);
        };

        for (std::size_t i = 0; i < n; i++) {
            const auto x = grid.point(i);
            std::array<double, 3> cur = y[i];
            double prev_res = 1e300;
            double omega = 1.0;
            bool done = false;
            for (int it = 0; it < opts.max_inv_iter; it++) {
                std::array<double, 3> tgt{0.0, 0.0, 0.0};
                double res = 0.0;
                for (int c = 0; c < dim; c++) {
                    tgt[c] = x[c] - eval_d(c, cur);
                    res = std::max(res, std::fabs(tgt[c] - cur[c]));
                }
                if (res > prev_res) omega = std::max(0.25 * omega, 1e-2);
                prev_res = res;
                for (int c = 0; c < dim; c++)
                    cur[c] += omega * (tgt[c] - cur[c]);
                if (res < 1e-12) {
                    done = true;
                    break;
                }
            }
            if (!done)
                throw convergence_error(
                    "invert_flow: fixed point did not converge (flow too "
                    "rough for resolution)");
            y[i] = cur;
        }

        std::vector<std::array<double, 3>> dinv(n);
        for (std::size_t i = 0; i < n; i++) {
            const auto x = grid.point(i);
            for (int c = 0; c < dim; c++) dinv[i][c] = y[i][c] - x[c];
        }
        flow.push_inverse(detail::wrap_displacement(grid, dinv));

        // Composite check phi(phi^{-1}(x)) = x.
        double worst = 0.0;
        for (std::size_t i = 0; i < n; i++) {
            const auto x = grid.point(i);
            for (int c = 0; c < dim; c++) {
                double comp = y[i][c] + eval_d(c, y[i]) - x[c];
                comp -= two_pi * std::round(comp / two_pi);
                worst = std::max(worst, std::fabs(comp));
            }
        }
        if (worst > opts.inv_tol)
            throw convergence_error(
                "invert_flow: composite identity check failed");
    }
    return flow;
}

/// Discrete C^2 norm of a displacement field: sup of values, first and
/// second spectral derivatives over components.
inline double c2_norm(const VectorField& d) {
    double m = d.max_abs();
    for (int c = 0; c < d.dim(); c++)
        for (int a = 0; a < d.dim(); a++) {
            ScalarField da = partial(d[c], a);
            m = std::max(m, da.max_abs());
            for (int b = a; b < d.dim(); b++)
                m = std::max(m, partial(da, b).max_abs());
        }
    return m;
}

/// Discrete surrogate of the C^alpha-in-time, C^2-in-space norm:
/// pairwise Hoelder quotients over at most 32 sampled nodes plus the
/// sup-in-time C^2 norm.
inline double holder_norm(const FlowMap& flow, double alpha = 0.25) {
    const int nn = flow.nodes();
    const int stride = std::max(1, (nn + 31) / 32);
    std::vector<int> idx;
    for (int s = 0; s < nn; s += stride) idx.push_back(s);
    if (idx.back() != nn - 1) idx.push_back(nn - 1);

    double supc2 = 0.0;
    for (int s : idx) supc2 = std::max(supc2, c2_norm(flow.displacement(s)));

    double semi = 0.0;
    for (std::size_t a = 0; a < idx.size(); a++)
        for (std::size_t b = a + 1; b < idx.size(); b++) {
            const double dt = flow.time(idx[b]) - flow.time(idx[a]);
            if (dt <= 0.0) continue;
            const VectorField diff =
                flow.displacement(idx[b]) - flow.displacement(idx[a]);
            semi = std::max(semi, c2_norm(diff) / std::pow(dt, alpha));
        }
    return supc2 + semi;
}

}  // namespace torusns

#endif
