#ifndef TORUSNS_SOLENOIDAL_HPP
#define TORUSNS_SOLENOIDAL_HPP

#include <cmath>
#include <vector>

#include "torusns/spectral.hpp"

namespace torusns {

/// One real Fourier mode of a stream function / vector-potential
/// component: amp_cos * cos(k.x) + amp_sin * sin(k.x).
struct StreamMode {
    std::array<int, 3> k{0, 0, 0};
    double amp_cos = 0.0;
    double amp_sin = 0.0;
};

/// Specification of one divergence-free channel field Q_k.
///
/// 2D: Q = constant + (d_2 psi, -d_1 psi) from the stream modes in
/// potential[0]. 3D: Q = constant + curl A with A_i built from
/// potential[i]. Constant vectors are solenoidal and cover the paper's
/// constant-field special case, which no periodic potential produces.
struct ChannelSpec {
    std::array<double, 3> constant{0.0, 0.0, 0.0};
    std::array<std::vector<StreamMode>, 3> potential;
};

namespace detail {

inline ScalarField build_modes(const TorusGrid& g,
                               const std::vector<StreamMode>& modes) {
    return ScalarField::from_function(g, [&](double x, double y, double z) {
        double s = 0.0;
        for (const auto& m : modes) {
            const double ph = m.k[0] * x + m.k[1] * y + m.k[2] * z;
            s += m.amp_cos * std::cos(ph) + m.amp_sin * std::sin(ph);
        }
        return s;
    });
}

}  // namespace detail

/// The K smooth solenoidal fields driving the flow SDE.
class SolenoidalFieldSet {
  public:
    SolenoidalFieldSet(const TorusGrid& grid,
                       const std::vector<ChannelSpec>& specs) {
        if (specs.empty()) throw error("SolenoidalFieldSet: need K >= 1");
        for (const auto& spec : specs) fields_.push_back(build(grid, spec));
        for (const auto& q : fields_) {
            if (divergence(q).max_abs() > 1e-12 * (1.0 + q.max_abs()))
                throw error("SolenoidalFieldSet: field is not solenoidal");
        }
    }

    int channels() const { return static_cast<int>(fields_.size()); }
    const VectorField& Q(int k) const { return fields_[k]; }

  private:
    static VectorField build(const TorusGrid& g, const ChannelSpec& spec) {
        std::vector<ScalarField> comps;
        if (g.dim() == 2) {
            ScalarField psi = detail::build_modes(g, spec.potential[0]);
            comps.push_back(shift(partial(psi, 1), spec.constant[0]));
            comps.push_back(shift(-1.0 * partial(psi, 0), spec.constant[1]));
        } else {
            std::vector<ScalarField> a;
            for (int i = 0; i < 3; i++)
                a.push_back(detail::build_modes(g, spec.potential[i]));
            comps.push_back(
                shift(partial(a[2], 1) - partial(a[1], 2), spec.constant[0]));
            comps.push_back(
                shift(partial(a[0], 2) - partial(a[2], 0), spec.constant[1]));
            comps.push_back(
                shift(partial(a[1], 0) - partial(a[0], 1), spec.constant[2]));
        }
        return VectorField(std::move(comps));
    }

    std::vector<VectorField> fields_;
};

}  // namespace torusns

#endif
