#ifndef TORUSNS_XOPS_HPP
#define TORUSNS_XOPS_HPP

#include <utility>

#include "torusns/flow.hpp"

namespace torusns {

/// Frozen-time context for the transformed operators: the coefficient
/// matrix A at one flow node plus the forward/inverse node positions
/// needed by the conjugation-form evaluations.
///
/// Conventions (fixed by the conjugation definitions and checked against
/// them in the tests): with A_{ij} = [d_j phi^{-1}_i] o phi,
///   grad_phi f  = A^T grad f,      div_phi u = div(A u),
/// which are dual to each other since phi preserves volume.
class TransformedOpContext {
  public:
    TransformedOpContext(const FlowMap& flow, int s)
        : grid_(flow.grid()),
          a_(flow.transform_matrix(s)),
          fwd_(flow.positions(s)),
          inv_(flow.inverse_positions(s)),
          scheme_(flow.scheme()) {}

    /// Identity context (phi = id); useful for tests and zero-noise runs.
    static TransformedOpContext identity(const TorusGrid& grid) {
        return TransformedOpContext(grid);
    }

    const TorusGrid& grid() const { return grid_; }
    const TensorField& A() const { return a_; }
    const VectorField& forward_positions() const { return fwd_; }
    const VectorField& inverse_positions() const { return inv_; }
    InterpScheme scheme() const { return scheme_; }

  private:
    explicit TransformedOpContext(const TorusGrid& grid)
        : grid_(grid),
          a_(TensorField::identity(grid)),
          fwd_(identity_map(grid)),
          inv_(identity_map(grid)),
          scheme_(InterpScheme::trig) {}

    TorusGrid grid_;
    TensorField a_;
    VectorField fwd_;
    VectorField inv_;
    InterpScheme scheme_;
};

// ---------------------------------------------------------------------------
// A-form operators (default: local, no interpolation)

inline VectorField grad_phi(const TransformedOpContext& ctx,
                            const ScalarField& f) {
    return apply_transpose(ctx.A(), gradient(f));
}

inline ScalarField div_phi(const TransformedOpContext& ctx,
                           const VectorField& u) {
    return divergence(apply(ctx.A(), u));
}

/// Transformed component-gradient tensor (i,j) = (grad_phi v_i)_j.
inline TensorField grad_phi_tensor(const TransformedOpContext& ctx,
                                   const VectorField& v) {
    std::vector<ScalarField> c;
    for (int i = 0; i < v.dim(); i++) {
        VectorField gi = grad_phi(ctx, v[i]);
        for (int j = 0; j < v.dim(); j++) c.push_back(gi[j]);
    }
    return TensorField(ctx.grid(), std::move(c));
}

/// Row-wise transformed divergence: (div_phi T)_i = div(A T_{i,:}).
inline VectorField div_phi_tensor(const TransformedOpContext& ctx,
                                  const TensorField& t) {
    std::vector<ScalarField> c;
    for (int i = 0; i < t.dim(); i++) {
        std::vector<ScalarField> row;
        for (int j = 0; j < t.dim(); j++) row.push_back(t(i, j));
        c.push_back(div_phi(ctx, VectorField(std::move(row))));
    }
    return VectorField(std::move(c));
}

inline ScalarField laplace_phi(const TransformedOpContext& ctx,
                               const ScalarField& f) {
    return div_phi(ctx, grad_phi(ctx, f));
}

// ---------------------------------------------------------------------------
// conjugation-form operators (oracles): Op^phi f = [Op(f o phi^{-1})] o phi

inline VectorField grad_phi_conj(const TransformedOpContext& ctx,
                                 const ScalarField& f) {
    ScalarField pulled = compose(f, ctx.inverse_positions(), ctx.scheme());
    return compose(gradient(pulled), ctx.forward_positions(), ctx.scheme());
}

inline ScalarField div_phi_conj(const TransformedOpContext& ctx,
                                const VectorField& u) {
    VectorField pulled = compose(u, ctx.inverse_positions(), ctx.scheme());
    return compose(divergence(pulled), ctx.forward_positions(), ctx.scheme());
}

/// Mean-zero solve of -Delta^phi u = f - mean via conjugation,
/// (A^{-1})^phi = (A^phi)^{-1}.
inline ScalarField inv_laplace_phi(const TransformedOpContext& ctx,
                                   const ScalarField& f,
                                   double mean_tol = 1e-10) {
    const double mass = std::fabs(integrate(f));
    if (f.max_abs() > 0.0 && mass > mean_tol * f.max_abs())
        throw mean_violation_error("inv_laplace_phi: field has nonzero mean");
    ScalarField pulled = compose(f, ctx.inverse_positions(), ctx.scheme());
    // Composition only preserves the mean to interpolation accuracy;
    // recenter so the reference-coordinate solve is well posed.
    ScalarField centered = shift(pulled, -pulled.mean());
    ScalarField w = inv_laplace(centered, 1e-6);
    return compose(w, ctx.forward_positions(), ctx.scheme());
}

/// Frozen-coefficient Bogovskii operator: Phi with div_phi Phi =
/// eta - m0, where m0 is the mean density (so eta - m0 is mean-zero).
inline VectorField bogovskii_phi(const TransformedOpContext& ctx,
                                 const ScalarField& eta, double m0,
                                 double mass_tol = 1e-8) {
    ScalarField dev = shift(eta, -m0);
    if (std::fabs(integrate(dev)) >
        mass_tol * (1.0 + eta.max_abs()) * ctx.grid().volume())
        throw mean_violation_error("bogovskii_phi: m0 is not the mean of eta");
    ScalarField w = inv_laplace_phi(ctx, dev, 1e-6);
    return -1.0 * grad_phi(ctx, w);
}

// ---------------------------------------------------------------------------
// stress and effective viscous flux

/// Newtonian stress of the transformed gradient:
/// S = mu (G + G^T) + lambda tr(G) I with G = grad_phi v.
inline TensorField stress_phi(const TransformedOpContext& ctx,
                              const VectorField& v, double mu, double lambda) {
    if (mu <= 0.0 || lambda <= 0.0)
        throw error("stress_phi: viscosities must be strictly positive");
    const TensorField g = grad_phi_tensor(ctx, v);
    ScalarField tr = g(0, 0);
    for (int i = 1; i < g.dim(); i++) tr = tr + g(i, i);
    std::vector<ScalarField> c;
    for (int i = 0; i < g.dim(); i++)
        for (int j = 0; j < g.dim(); j++) {
            ScalarField s = mu * (g(i, j) + g(j, i));
            if (i == j) s = s + lambda * tr;
            c.push_back(std::move(s));
        }
    return TensorField(ctx.grid(), std::move(c));
}

/// G = (lambda + 2 mu) div_phi v - p, with p the (already evaluated)
/// pressure field.
inline ScalarField effective_viscous_flux(const TransformedOpContext& ctx,
                                          const VectorField& v,
                                          const ScalarField& pressure,
                                          double mu, double lambda) {
    return (lambda + 2.0 * mu) * div_phi(ctx, v) - pressure;
}

}  // namespace torusns

#endif
