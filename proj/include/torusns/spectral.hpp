#ifndef TORUSNS_SPECTRAL_HPP
#define TORUSNS_SPECTRAL_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "torusns/field.hpp"

namespace torusns {

// ---------------------------------------------------------------------------
// pointwise algebra

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); i++) v[i] = a[i] + b[i];
    return ScalarField(a.grid(), std::move(v));
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); i++) v[i] = a[i] - b[i];
    return ScalarField(a.grid(), std::move(v));
}

inline ScalarField operator*(double s, const ScalarField& a) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); i++) v[i] = s * a[i];
    return ScalarField(a.grid(), std::move(v));
}

inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); i++) v[i] = a[i] * b[i];
    return ScalarField(a.grid(), std::move(v));
}

inline ScalarField operator/(const ScalarField& a, const ScalarField& b) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); i++) v[i] = a[i] / b[i];
    return ScalarField(a.grid(), std::move(v));
}

inline ScalarField shift(const ScalarField& a, double c) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); i++) v[i] = a[i] + c;
    return ScalarField(a.grid(), std::move(v));
}

inline ScalarField pointwise_pow(const ScalarField& a, double p) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); i++) v[i] = std::pow(a[i], p);
    return ScalarField(a.grid(), std::move(v));
}

inline VectorField operator+(const VectorField& a, const VectorField& b) {
    std::vector<ScalarField> c;
    for (int d = 0; d < a.dim(); d++) c.push_back(a[d] + b[d]);
    return VectorField(std::move(c));
}

inline VectorField operator-(const VectorField& a, const VectorField& b) {
    std::vector<ScalarField> c;
    for (int d = 0; d < a.dim(); d++) c.push_back(a[d] - b[d]);
    return VectorField(std::move(c));
}

inline VectorField operator*(double s, const VectorField& a) {
    std::vector<ScalarField> c;
    for (int d = 0; d < a.dim(); d++) c.push_back(s * a[d]);
    return VectorField(std::move(c));
}

inline VectorField operator*(const ScalarField& s, const VectorField& a) {
    std::vector<ScalarField> c;
    for (int d = 0; d < a.dim(); d++) c.push_back(s * a[d]);
    return VectorField(std::move(c));
}

inline ScalarField dot(const VectorField& a, const VectorField& b) {
    ScalarField s = a[0] * b[0];
    for (int d = 1; d < a.dim(); d++) s = s + a[d] * b[d];
    return s;
}

/// Matrix-vector product (M u)_i = M_{ij} u_j, pointwise.
inline VectorField apply(const TensorField& m, const VectorField& u) {
    std::vector<ScalarField> c;
    for (int i = 0; i < m.dim(); i++) {
        ScalarField s = m(i, 0) * u[0];
        for (int j = 1; j < m.dim(); j++) s = s + m(i, j) * u[j];
        c.push_back(std::move(s));
    }
    return VectorField(std::move(c));
}

inline VectorField apply_transpose(const TensorField& m, const VectorField& u) {
    std::vector<ScalarField> c;
    for (int i = 0; i < m.dim(); i++) {
        ScalarField s = m(0, i) * u[0];
        for (int j = 1; j < m.dim(); j++) s = s + m(j, i) * u[j];
        c.push_back(std::move(s));
    }
    return VectorField(std::move(c));
}

/// Frobenius contraction A:B, pointwise.
inline ScalarField contract(const TensorField& a, const TensorField& b) {
    ScalarField s = a(0, 0) * b(0, 0);
    for (int i = 0; i < a.dim(); i++)
        for (int j = 0; j < a.dim(); j++)
            if (i || j) s = s + a(i, j) * b(i, j);
    return s;
}

// ---------------------------------------------------------------------------
// spectral calculus

namespace detail {

/// Signed wavenumber used in derivative multipliers; the Nyquist bin gets
/// zero so that derivatives of real fields stay real.
inline int deriv_wavenumber(const TorusGrid& g, int bin) {
    if (bin == g.resolution() / 2) return 0;
    return g.wavenumber(bin);
}

template <class Mult>
ScalarField apply_multiplier(const ScalarField& f, Mult mult) {
    const auto& g = f.grid();
    std::vector<std::complex<double>> spec = f.spectrum();
    const int m = g.resolution();
    std::array<int, 3> j{0, 0, 0};
    for (std::size_t idx = 0; idx < g.size(); idx++) {
        j = g.unflatten(idx);
        spec[idx] *= mult(j);
    }
    (void)m;
    return field_from_spectrum(g, spec);
}

}  // namespace detail

/// Spectral partial derivative along axis d.
inline ScalarField partial(const ScalarField& f, int d) {
    const auto& g = f.grid();
    return detail::apply_multiplier(f, [&](const std::array<int, 3>& j) {
        return std::complex<double>(0.0, detail::deriv_wavenumber(g, j[d]));
    });
}

inline VectorField gradient(const ScalarField& f) {
    std::vector<ScalarField> c;
    for (int d = 0; d < f.grid().dim(); d++) c.push_back(partial(f, d));
    return VectorField(std::move(c));
}

/// Component-gradient tensor (i,j) = d u_i / d x_j.
inline TensorField gradient(const VectorField& u) {
    std::vector<ScalarField> c;
    for (int i = 0; i < u.dim(); i++)
        for (int j = 0; j < u.dim(); j++) c.push_back(partial(u[i], j));
    return TensorField(u.grid(), std::move(c));
}

inline ScalarField divergence(const VectorField& u) {
    ScalarField s = partial(u[0], 0);
    for (int d = 1; d < u.dim(); d++) s = s + partial(u[d], d);
    return s;
}

/// Row-wise divergence of a tensor: (div T)_i = d T_{ij} / d x_j.
inline VectorField divergence(const TensorField& t) {
    std::vector<ScalarField> c;
    for (int i = 0; i < t.dim(); i++) {
        ScalarField s = partial(t(i, 0), 0);
        for (int j = 1; j < t.dim(); j++) s = s + partial(t(i, j), j);
        c.push_back(std::move(s));
    }
    return VectorField(std::move(c));
}

inline ScalarField laplacian(const ScalarField& f) {
    const auto& g = f.grid();
    return detail::apply_multiplier(f, [&](const std::array<int, 3>& j) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim(); d++) {
            double k = detail::deriv_wavenumber(g, j[d]);
            k2 += k * k;
        }
        return std::complex<double>(-k2, 0.0);
    });
}

inline VectorField laplacian(const VectorField& u) {
    std::vector<ScalarField> c;
    for (int d = 0; d < u.dim(); d++) c.push_back(laplacian(u[d]));
    return VectorField(std::move(c));
}

/// Exact integral of the trigonometric interpolant: (2*pi)^N times the
/// node mean.
inline double integrate(const ScalarField& f) {
    return f.grid().volume() * f.mean();
}

inline double l2_norm(const ScalarField& f) {
    return std::sqrt(integrate(f * f));
}

inline double l2_norm(const VectorField& u) {
    return std::sqrt(integrate(dot(u, u)));
}

/// Gaussian mollifier [f]_l: mode k scaled by exp(-l^2 |k|^2 / 2).
/// l = 0 is the identity; the mean (k = 0) is always preserved exactly.
inline ScalarField mollify(const ScalarField& f, double l) {
    if (l < 0.0) throw error("mollify: radius must be >= 0");
    if (l == 0.0) return f;
    const auto& g = f.grid();
    return detail::apply_multiplier(f, [&](const std::array<int, 3>& j) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim(); d++) {
            double k = g.wavenumber(j[d]);
            k2 += k * k;
        }
        return std::complex<double>(std::exp(-0.5 * l * l * k2), 0.0);
    });
}

inline VectorField mollify(const VectorField& u, double l) {
    std::vector<ScalarField> c;
    for (int d = 0; d < u.dim(); d++) c.push_back(mollify(u[d], l));
    return VectorField(std::move(c));
}

/// Mean-zero solution of -Delta u = f - mean(f). Requires f to be
/// (numerically) mean-free: |integral of f| <= mean_tol * sup|f|.
inline ScalarField inv_laplace(const ScalarField& f, double mean_tol = 1e-10) {
    const double mass = std::fabs(integrate(f));
    const double scale = f.max_abs();
    if (scale > 0.0 && mass > mean_tol * scale)
        throw mean_violation_error("inv_laplace: field has nonzero mean");
    const auto& g = f.grid();
    return detail::apply_multiplier(f, [&](const std::array<int, 3>& j) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim(); d++) {
            double k = detail::deriv_wavenumber(g, j[d]);
            k2 += k * k;
        }
        return std::complex<double>(k2 > 0.0 ? 1.0 / k2 : 0.0, 0.0);
    });
}

/// Diagonal solve of (I - c*Delta) u = f, c >= 0.
inline ScalarField helmholtz_solve(const ScalarField& f, double c) {
    const auto& g = f.grid();
    return detail::apply_multiplier(f, [&](const std::array<int, 3>& j) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim(); d++) {
            double k = detail::deriv_wavenumber(g, j[d]);
            k2 += k * k;
        }
        return std::complex<double>(1.0 / (1.0 + c * k2), 0.0);
    });
}

/// 2/3-rule dealiasing: zero every mode with any |k_d| > M/3.
inline ScalarField dealias(const ScalarField& f) {
    const auto& g = f.grid();
    const int kmax = g.resolution() / 3;
    return detail::apply_multiplier(f, [&](const std::array<int, 3>& j) {
        for (int d = 0; d < g.dim(); d++)
            if (std::abs(g.wavenumber(j[d])) > kmax)
                return std::complex<double>(0.0, 0.0);
        return std::complex<double>(1.0, 0.0);
    });
}

}  // namespace torusns

#endif
