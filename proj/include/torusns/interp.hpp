#ifndef TORUSNS_INTERP_HPP
#define TORUSNS_INTERP_HPP

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "torusns/field.hpp"

namespace torusns {

enum class InterpScheme { trig, cubic };

/// Off-grid evaluator for the trigonometric interpolant of a real field.
///
/// Modes with |c_k| below prune_tol * max|c_k| (or below the absolute
/// floor abs_floor) are dropped, which makes evaluation cheap for
/// near-band-limited data (flow displacements, stream-function noise).
/// The absolute floor matters for fields carrying an accumulated
/// round-off noise spectrum -- e.g. displacements integrated over many
/// steps, whose true content is a handful of modes sitting on a ~1e-14
/// white floor; a purely relative threshold keeps thousands of noise
/// modes when the signal amplitude is small. The Nyquist bin k = -M/2
/// is evaluated with cos((M/2)x) per axis so the interpolant is real
/// and matches the grid samples exactly.
class TrigInterpolant {
  public:
    explicit TrigInterpolant(const ScalarField& f, double prune_tol = 1e-14,
                             double abs_floor = 1e-13)
        : dim_(f.grid().dim()), nyq_(f.grid().resolution() / 2) {
        const auto& g = f.grid();
        const auto& spec = f.spectrum();
        double cmax = 0.0;
        for (const auto& c : spec) cmax = std::max(cmax, std::abs(c));
        const double cutoff = std::max(prune_tol * cmax, abs_floor);
        for (std::size_t idx = 0; idx < g.size(); idx++) {
            if (std::abs(spec[idx]) <= cutoff) continue;
            auto j = g.unflatten(idx);
            Mode m;
            m.coef = spec[idx];
            for (int d = 0; d < dim_; d++) {
                m.k[d] = g.wavenumber(j[d]);
                m.nyquist[d] = (j[d] == nyq_);
            }
            modes_.push_back(m);
        }
    }

    double operator()(const std::array<double, 3>& x) const {
        std::complex<double> acc(0.0, 0.0);
        for (const auto& m : modes_) {
            std::complex<double> term = m.coef;
            for (int d = 0; d < dim_; d++) {
                if (m.nyquist[d])
                    term *= std::cos(static_cast<double>(nyq_) * x[d]);
                else if (m.k[d] != 0)
                    term *= std::polar(1.0, m.k[d] * x[d]);
            }
            acc += term;
        }
        return acc.real();
    }

    std::size_t mode_count() const { return modes_.size(); }

  private:
    struct Mode {
        std::complex<double> coef;
        std::array<int, 3> k{0, 0, 0};
        std::array<bool, 3> nyquist{false, false, false};
    };
    int dim_;
    int nyq_;
    std::vector<Mode> modes_;
};

namespace detail {

/// Catmull-Rom weights for fractional offset t in [0,1).
inline std::array<double, 4> catmull_rom(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0,
            -1.5 * t3 + 2.0 * t2 + 0.5 * t, 0.5 * t3 - 0.5 * t2};
}

}  // namespace detail

/// Periodic cubic (Catmull-Rom) evaluation at an arbitrary point.
inline double cubic_eval(const ScalarField& f, const std::array<double, 3>& x) {
    const auto& g = f.grid();
    const int m = g.resolution();
    const double h = g.spacing();
    std::array<std::array<double, 4>, 3> w{};
    std::array<std::array<int, 4>, 3> jj{};
    for (int d = 0; d < g.dim(); d++) {
        const double s = wrap_angle(x[d]) / h;
        const int j0 = static_cast<int>(std::floor(s));
        w[d] = detail::catmull_rom(s - j0);
        for (int o = 0; o < 4; o++) jj[d][o] = ((j0 - 1 + o) % m + m) % m;
    }
    double acc = 0.0;
    if (g.dim() == 2) {
        for (int a = 0; a < 4; a++)
            for (int b = 0; b < 4; b++)
                acc += w[0][a] * w[1][b] *
                       f[g.flatten({jj[0][a], jj[1][b], 0})];
    } else {
        for (int a = 0; a < 4; a++)
            for (int b = 0; b < 4; b++)
                for (int c = 0; c < 4; c++)
                    acc += w[0][a] * w[1][b] * w[2][c] *
                           f[g.flatten({jj[0][a], jj[1][b], jj[2][c]})];
    }
    return acc;
}

/// f composed with a point-valued map, evaluated node by node.
inline ScalarField compose(const ScalarField& f, const VectorField& map,
                           InterpScheme scheme = InterpScheme::trig) {
    const auto& g = f.grid();
    std::vector<double> out(g.size());
    if (scheme == InterpScheme::trig) {
        TrigInterpolant interp(f);
        for (std::size_t i = 0; i < g.size(); i++) {
            std::array<double, 3> p{map[0][i], g.dim() > 1 ? map[1][i] : 0.0,
                                    g.dim() > 2 ? map[2][i] : 0.0};
            out[i] = interp(p);
        }
    } else {
        for (std::size_t i = 0; i < g.size(); i++) {
            std::array<double, 3> p{map[0][i], g.dim() > 1 ? map[1][i] : 0.0,
                                    g.dim() > 2 ? map[2][i] : 0.0};
            out[i] = cubic_eval(f, p);
        }
    }
    return ScalarField(g, std::move(out));
}

inline VectorField compose(const VectorField& u, const VectorField& map,
                           InterpScheme scheme = InterpScheme::trig) {
    std::vector<ScalarField> c;
    for (int d = 0; d < u.dim(); d++) c.push_back(compose(u[d], map, scheme));
    return VectorField(std::move(c));
}

inline TensorField compose(const TensorField& t, const VectorField& map,
                           InterpScheme scheme = InterpScheme::trig) {
    std::vector<ScalarField> c;
    for (int i = 0; i < t.dim(); i++)
        for (int j = 0; j < t.dim(); j++)
            c.push_back(compose(t(i, j), map, scheme));
    return TensorField(t.grid(), std::move(c));
}

}  // namespace torusns

#endif
