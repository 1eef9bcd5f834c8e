#ifndef TORUSNS_WIENER_HPP
#define TORUSNS_WIENER_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "torusns/common.hpp"

namespace torusns {

/// K-channel Wiener path on a uniform grid of S steps over [0,T].
///
/// Increments come from stateless counter-based streams keyed by
/// (seed, channel, refinement level), so sampling is reproducible and
/// order-independent, and refine() of the same path always injects the
/// same bridge noise.
class WienerPath {
  public:
    int channels = 0;
    double horizon = 0.0;
    int steps = 0;
    std::uint64_t seed = 0;
    int level = 0;  // number of bridge refinements applied
    // increments[k][s], s = 0..steps-1; values[k][s], s = 0..steps
    std::vector<std::vector<double>> increments;
    std::vector<std::vector<double>> values;

    double dt() const { return horizon / steps; }
    double time(int s) const { return horizon * s / steps; }

    void rebuild_values() {
        values.assign(channels, std::vector<double>(steps + 1, 0.0));
        for (int k = 0; k < channels; k++)
            for (int s = 0; s < steps; s++)
                values[k][s + 1] = values[k][s] + increments[k][s];
    }
};

namespace detail {

inline std::uint64_t stream_key(std::uint64_t seed, int channel, int level) {
    return mix_key(mix_key(seed, static_cast<std::uint64_t>(channel)),
                   static_cast<std::uint64_t>(level) + 0x9177f2d5ULL);
}

}  // namespace detail

inline WienerPath sample_path(int K, double T, int S, std::uint64_t seed) {
    if (K < 1 || S < 1 || T <= 0.0)
        throw error("sample_path: need K >= 1, S >= 1, T > 0");
    WienerPath p;
    p.channels = K;
    p.horizon = T;
    p.steps = S;
    p.seed = seed;
    p.increments.assign(K, std::vector<double>(S));
    const double sdt = std::sqrt(T / S);
    for (int k = 0; k < K; k++) {
        const std::uint64_t key = detail::stream_key(seed, k, 0);
        for (int s = 0; s < S; s++)
            p.increments[k][s] = sdt * gaussian_at(key, s);
    }
    p.rebuild_values();
    return p;
}

/// Brownian-bridge midpoint refinement: each coarse increment dW over a
/// step of size dt splits into dW/2 + xi and dW/2 - xi with
/// xi ~ N(0, dt/4), so coarse increments are preserved exactly.
/// zero_bridge suppresses xi (test mode).
inline WienerPath refine(const WienerPath& path, bool zero_bridge = false) {
    WienerPath p;
    p.channels = path.channels;
    p.horizon = path.horizon;
    p.steps = 2 * path.steps;
    p.seed = path.seed;
    p.level = path.level + 1;
    p.increments.assign(p.channels, std::vector<double>(p.steps));
    const double sig = zero_bridge ? 0.0 : 0.5 * std::sqrt(path.dt());
    for (int k = 0; k < p.channels; k++) {
        const std::uint64_t key = detail::stream_key(path.seed, k, p.level);
        for (int s = 0; s < path.steps; s++) {
            const double half = 0.5 * path.increments[k][s];
            const double xi = sig * gaussian_at(key, s);
            p.increments[k][2 * s] = half + xi;
            p.increments[k][2 * s + 1] = half - xi;
        }
    }
    p.rebuild_values();
    return p;
}

/// Restriction of the path to step range [s0, s1): a path on
/// [time(s0), time(s1)] whose values start at zero.
inline WienerPath segment(const WienerPath& path, int s0, int s1) {
    if (s0 < 0 || s1 > path.steps || s0 >= s1)
        throw error("segment: invalid step range");
    WienerPath p;
    p.channels = path.channels;
    p.horizon = (s1 - s0) * path.dt();
    p.steps = s1 - s0;
    p.seed = path.seed;
    p.level = path.level;
    p.increments.assign(p.channels, std::vector<double>(p.steps));
    for (int k = 0; k < p.channels; k++)
        for (int s = s0; s < s1; s++)
            p.increments[k][s - s0] = path.increments[k][s];
    p.rebuild_values();
    return p;
}

}  // namespace torusns

#endif
