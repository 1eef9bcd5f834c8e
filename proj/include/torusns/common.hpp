#ifndef TORUSNS_COMMON_HPP
#define TORUSNS_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace torusns {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A field or argument contained NaN/Inf.
struct non_finite_error : error {
    using error::error;
};

/// Solvability condition |mean| <= tol violated for an inverse Laplacian.
struct mean_violation_error : error {
    using error::error;
};

/// An iterative procedure failed to converge.
struct convergence_error : error {
    using error::error;
};

/// A time step was rejected (displacement or positivity bound breached).
struct step_rejected_error : error {
    int step_index;
    double offending_value;
    step_rejected_error(const std::string& msg, int step, double value)
        : error(msg), step_index(step), offending_value(value) {}
};

/// Invalid run configuration; carries a machine-readable JSON error list.
struct config_error : error {
    std::string details_json;
    config_error(const std::string& msg, std::string details)
        : error(msg), details_json(std::move(details)) {}
};

/// SplitMix64: stateless counter-based mixing, used for RNG stream keys
/// and raw uniform draws.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Combine a key and a counter into an independent 64-bit word.
inline std::uint64_t mix_key(std::uint64_t key, std::uint64_t counter) {
    return splitmix64(key ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

/// Uniform in (0,1); never returns exactly 0.
inline double uniform01(std::uint64_t word) {
    return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw at (key, counter) via Box-Muller on two counter
/// words. Fully deterministic and order-independent.
inline double gaussian_at(std::uint64_t key, std::uint64_t counter) {
    const double u1 = uniform01(mix_key(key, 2 * counter));
    const double u2 = uniform01(mix_key(key, 2 * counter + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Wrap a coordinate into [0, 2*pi).
inline double wrap_angle(double x) {
    x = std::fmod(x, two_pi);
    if (x < 0.0) x += two_pi;
    return x;
}

}  // namespace torusns

#endif
