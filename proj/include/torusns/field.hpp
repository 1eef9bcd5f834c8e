#ifndef TORUSNS_FIELD_HPP
#define TORUSNS_FIELD_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "torusns/fft.hpp"
#include "torusns/grid.hpp"

namespace torusns {

/// Real scalar field sampled at the grid nodes. Values are immutable
/// after construction; the Fourier coefficients are computed lazily on
/// first access and cached (thread-safe via call_once), so read-only
/// sharing across workers is fine.
class ScalarField {
  public:
    ScalarField(TorusGrid grid, std::vector<double> values)
        : grid_(grid),
          values_(std::move(values)),
          cache_(std::make_shared<SpecCache>()) {
        if (values_.size() != grid_.size())
            throw error("ScalarField: value count does not match grid");
        check_finite();
    }

    ScalarField(TorusGrid grid, double constant)
        : ScalarField(grid, std::vector<double>(grid.size(), constant)) {}

    static ScalarField from_function(
        const TorusGrid& grid,
        const std::function<double(double, double, double)>& f) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); i++) {
            auto p = grid.point(i);
            v[i] = f(p[0], p[1], p[2]);
        }
        return ScalarField(grid, std::move(v));
    }

    const TorusGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    const std::vector<std::complex<double>>& spectrum() const {
        std::call_once(cache_->flag, [this] {
            FftEngine::forward(grid_, values_, cache_->spec);
        });
        return cache_->spec;
    }

    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::fabs(v));
        return m;
    }

    double min() const {
        double m = values_[0];
        for (double v : values_) m = std::min(m, v);
        return m;
    }

  private:
    struct SpecCache {
        std::once_flag flag;
        std::vector<std::complex<double>> spec;
    };

    void check_finite() const {
        for (double v : values_)
            if (!std::isfinite(v))
                throw non_finite_error("ScalarField: non-finite value");
    }

    TorusGrid grid_;
    std::vector<double> values_;
    std::shared_ptr<SpecCache> cache_;
};

/// Build a scalar field directly from Fourier coefficients.
inline ScalarField field_from_spectrum(
    const TorusGrid& grid, const std::vector<std::complex<double>>& spec) {
    std::vector<double> v;
    FftEngine::backward(grid, spec, v);
    return ScalarField(grid, std::move(v));
}

/// Vector field: N scalar components sharing one grid.
class VectorField {
  public:
    explicit VectorField(std::vector<ScalarField> comps)
        : comps_(std::move(comps)) {
        if (static_cast<int>(comps_.size()) != comps_[0].grid().dim())
            throw error("VectorField: component count must equal grid dim");
        for (const auto& c : comps_)
            if (c.grid() != comps_[0].grid())
                throw error("VectorField: mixed grids");
    }

    VectorField(const TorusGrid& grid, double constant)
        : VectorField(std::vector<ScalarField>(grid.dim(),
                                               ScalarField(grid, constant))) {}

    const TorusGrid& grid() const { return comps_[0].grid(); }
    int dim() const { return static_cast<int>(comps_.size()); }
    const ScalarField& operator[](int c) const { return comps_[c]; }

    double max_abs() const {
        double m = 0.0;
        for (const auto& c : comps_) m = std::max(m, c.max_abs());
        return m;
    }

  private:
    std::vector<ScalarField> comps_;
};

/// Tensor field: N x N scalar components, row-major.
class TensorField {
  public:
    TensorField(const TorusGrid& grid, std::vector<ScalarField> comps)
        : dim_(grid.dim()), comps_(std::move(comps)) {
        if (static_cast<int>(comps_.size()) != dim_ * dim_)
            throw error("TensorField: need dim*dim components");
        for (const auto& c : comps_)
            if (c.grid() != grid) throw error("TensorField: mixed grids");
    }

    static TensorField identity(const TorusGrid& grid) {
        std::vector<ScalarField> comps;
        comps.reserve(grid.dim() * grid.dim());
        for (int i = 0; i < grid.dim(); i++)
            for (int j = 0; j < grid.dim(); j++)
                comps.emplace_back(grid, i == j ? 1.0 : 0.0);
        return TensorField(grid, std::move(comps));
    }

    const TorusGrid& grid() const { return comps_[0].grid(); }
    int dim() const { return dim_; }
    const ScalarField& operator()(int i, int j) const {
        return comps_[i * dim_ + j];
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& c : comps_) m = std::max(m, c.max_abs());
        return m;
    }

  private:
    int dim_;
    std::vector<ScalarField> comps_;
};

}  // namespace torusns

#endif
