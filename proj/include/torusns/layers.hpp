#ifndef TORUSNS_LAYERS_HPP
#define TORUSNS_LAYERS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "torusns/spectral.hpp"

namespace torusns {

/// Parameters of the layered approximation: artificial viscosity eps_n,
/// mollification radius l, artificial pressure weight delta, plus the
/// physical constants.
struct LayerParams {
    double eps_n = 1e-2;         // artificial (parabolic) viscosity
    double l = 0.0;              // mollification radius, 0 = off
    double delta = 0.0;          // artificial pressure weight
    double Gamma = 4.0;          // artificial pressure exponent, [4,6)
    double a = 1.0;              // pressure coefficient
    double gamma = 1.4;          // adiabatic exponent
    double mu = 1.0;             // shear viscosity
    double lambda = 1.0;         // bulk viscosity
    double density_floor = 1e-8;
    double floor_lift = 0.0;     // strict-positivity lift for initial data

    /// Throws on hard violations; returns soft warnings (e.g. gamma
    /// below the N/2 integrability threshold).
    std::vector<std::string> validate(int dim) const {
        if (eps_n < 0.0) throw error("layers: eps_n must be >= 0");
        if (l < 0.0) throw error("layers: l must be >= 0");
        if (delta < 0.0) throw error("layers: delta must be >= 0");
        if (delta > 0.0 && (Gamma < 4.0 || Gamma >= 6.0))
            throw error("layers: Gamma must lie in [4,6) when delta > 0");
        if (a <= 0.0) throw error("layers: a must be > 0");
        if (gamma <= 1.0) throw error("layers: gamma must be > 1");
        if (mu <= 0.0) throw error("layers: mu must be > 0");
        if (lambda <= 0.0) throw error("layers: lambda must be > 0");
        if (density_floor < 0.0) throw error("layers: density_floor < 0");
        std::vector<std::string> warnings;
        if (gamma <= 0.5 * dim)
            warnings.push_back("gamma <= N/2: below the integrability "
                               "threshold of the existence theory");
        return warnings;
    }
};

/// p_delta(eta) = a eta^gamma + delta eta^2 + delta eta^Gamma.
inline ScalarField pressure_delta(const ScalarField& eta,
                                  const LayerParams& p) {
    std::vector<double> v(eta.size());
    for (std::size_t i = 0; i < eta.size(); i++) {
        const double z = eta[i];
        if (z < 0.0) throw error("pressure_delta: negative density");
        v[i] = p.a * std::pow(z, p.gamma) +
               p.delta * (z * z + std::pow(z, p.Gamma));
    }
    return ScalarField(eta.grid(), std::move(v));
}

/// P_delta(eta) = delta/(Gamma-1) eta^Gamma + delta eta^2
///              + a/(gamma-1) eta^gamma.
inline ScalarField pressure_potential_delta(const ScalarField& eta,
                                            const LayerParams& p) {
    std::vector<double> v(eta.size());
    for (std::size_t i = 0; i < eta.size(); i++) {
        const double z = eta[i];
        if (z < 0.0) throw error("pressure_potential_delta: negative density");
        v[i] = p.delta * (std::pow(z, p.Gamma) / (p.Gamma - 1.0) + z * z) +
               p.a * std::pow(z, p.gamma) / (p.gamma - 1.0);
    }
    return ScalarField(eta.grid(), std::move(v));
}

/// Derivative p_delta'(eta), used by the parabolic dissipation bracket.
inline ScalarField pressure_delta_prime(const ScalarField& eta,
                                        const LayerParams& p) {
    std::vector<double> v(eta.size());
    for (std::size_t i = 0; i < eta.size(); i++) {
        const double z = eta[i];
        if (z < 0.0) throw error("pressure_delta_prime: negative density");
        v[i] = p.a * p.gamma * std::pow(z, p.gamma - 1.0) +
               p.delta * (2.0 * z + p.Gamma * std::pow(z, p.Gamma - 1.0));
    }
    return ScalarField(eta.grid(), std::move(v));
}

}  // namespace torusns

#endif
