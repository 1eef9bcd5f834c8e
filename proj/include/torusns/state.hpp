#ifndef TORUSNS_STATE_HPP
#define TORUSNS_STATE_HPP

#include <memory>
#include <vector>

#include "torusns/flow.hpp"
#include "torusns/layers.hpp"

namespace torusns {

/// Transformed density/velocity pair at one time node.
struct FluidState {
    double t = 0.0;
    ScalarField eta;
    VectorField v;

    FluidState(double time, ScalarField density, VectorField velocity)
        : t(time), eta(std::move(density)), v(std::move(velocity)) {
        if (eta.grid() != v.grid()) throw error("FluidState: mixed grids");
    }
};

/// Ordered states at the path time nodes plus the layer parameters and
/// the flow they were computed under.
struct Trajectory {
    std::vector<FluidState> states;
    LayerParams params;
    std::shared_ptr<const FlowMap> flow;

    int nodes() const { return static_cast<int>(states.size()); }
    const FluidState& at(int s) const { return states[s]; }
    double dt(int s) const { return states[s + 1].t - states[s].t; }
};

}  // namespace torusns

#endif
