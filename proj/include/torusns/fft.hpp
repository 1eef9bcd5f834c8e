#ifndef TORUSNS_FFT_HPP
#define TORUSNS_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "torusns/grid.hpp"

namespace torusns {

/// Thin wrapper around FFTW complex transforms with a process-wide plan
/// cache. Plan creation is serialized (FFTW planning is not thread-safe);
/// execution uses fftw_execute_dft on caller-local buffers, which is.
///
/// Forward transform normalization: c_k = (1/M^N) sum_j f_j e^{-i k.x_j},
/// so the k=0 coefficient is the mean and backward(forward(f)) = f.
class FftEngine {
  public:
    static void forward(const TorusGrid& g, const std::vector<double>& values,
                        std::vector<std::complex<double>>& spec) {
        std::vector<std::complex<double>> in(g.size());
        for (std::size_t i = 0; i < g.size(); i++) in[i] = values[i];
        spec.resize(g.size());
        execute(g, FFTW_FORWARD, in.data(), spec.data());
        const double scale = 1.0 / static_cast<double>(g.size());
        for (auto& c : spec) c *= scale;
    }

    static void backward(const TorusGrid& g,
                         const std::vector<std::complex<double>>& spec,
                         std::vector<double>& values) {
        std::vector<std::complex<double>> out(g.size());
        std::vector<std::complex<double>> in(spec);
        execute(g, FFTW_BACKWARD, in.data(), out.data());
        values.resize(g.size());
        for (std::size_t i = 0; i < g.size(); i++) values[i] = out[i].real();
    }

  private:
    static void execute(const TorusGrid& g, int sign,
                        std::complex<double>* in, std::complex<double>* out) {
        fftw_plan plan = get_plan(g, sign);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in),
                         reinterpret_cast<fftw_complex*>(out));
    }

    static fftw_plan get_plan(const TorusGrid& g, int sign) {
        static std::mutex mtx;
        static std::map<std::tuple<int, int, int>, fftw_plan> cache;
        std::lock_guard<std::mutex> lock(mtx);
        auto key = std::make_tuple(g.dim(), g.resolution(), sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        // Plan on scratch buffers; FFTW_ESTIMATE leaves them untouched and
        // the plan stays valid for any same-shape arrays via execute_dft.
        std::size_t n = g.size();
        fftw_complex* a = fftw_alloc_complex(n);
        fftw_complex* b = fftw_alloc_complex(n);
        int dims[3] = {g.resolution(), g.resolution(), g.resolution()};
        fftw_plan p = fftw_plan_dft(g.dim(), dims, a, b, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(a);
        fftw_free(b);
        cache[key] = p;
        return p;
    }
};

}  // namespace torusns

#endif
