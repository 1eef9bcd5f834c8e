#ifndef TORUSNS_GRID_HPP
#define TORUSNS_GRID_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "torusns/common.hpp"

namespace torusns {

/// Uniform periodic grid on [0,2*pi)^N, N in {2,3}, M nodes per axis.
///
/// Node layout is row-major with the last axis fastest: in 2D the flat
/// index of (j0,j1) is j0*M + j1, in 3D (j0*M + j1)*M + j2. Signed
/// wavenumbers follow the usual DFT convention k in {-M/2,...,M/2-1}.
class TorusGrid {
  public:
    TorusGrid(int dim, int resolution) : dim_(dim), m_(resolution) {
        if (dim != 2 && dim != 3)
            throw error("TorusGrid: dim must be 2 or 3");
        if (m_ < 8 || (m_ & (m_ - 1)) != 0)
            throw error("TorusGrid: resolution must be a power of two >= 8");
        size_ = 1;
        for (int d = 0; d < dim_; d++) size_ *= static_cast<std::size_t>(m_);
    }

    int dim() const { return dim_; }
    int resolution() const { return m_; }
    std::size_t size() const { return size_; }
    double spacing() const { return two_pi / m_; }
    double cell_volume() const {
        double v = 1.0;
        for (int d = 0; d < dim_; d++) v *= spacing();
        return v;
    }
    double volume() const {
        double v = 1.0;
        for (int d = 0; d < dim_; d++) v *= two_pi;
        return v;
    }

    /// Coordinate of node index j along one axis.
    double coord(int j) const { return spacing() * j; }

    /// Multi-index of a flat node index.
    std::array<int, 3> unflatten(std::size_t idx) const {
        std::array<int, 3> j{0, 0, 0};
        for (int d = dim_ - 1; d >= 0; d--) {
            j[d] = static_cast<int>(idx % m_);
            idx /= m_;
        }
        return j;
    }

    std::size_t flatten(const std::array<int, 3>& j) const {
        std::size_t idx = 0;
        for (int d = 0; d < dim_; d++)
            idx = idx * m_ + static_cast<std::size_t>(j[d]);
        return idx;
    }

    /// Signed wavenumber for DFT bin j (Nyquist bin maps to -M/2).
    int wavenumber(int j) const { return j < m_ / 2 ? j : j - m_; }

    /// Cartesian coordinates of a flat node index.
    std::array<double, 3> point(std::size_t idx) const {
        auto j = unflatten(idx);
        return {coord(j[0]), coord(j[1]), dim_ == 3 ? coord(j[2]) : 0.0};
    }

    bool operator==(const TorusGrid& o) const {
        return dim_ == o.dim_ && m_ == o.m_;
    }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }

  private:
    int dim_;
    int m_;
    std::size_t size_;
};

}  // namespace torusns

#endif
