#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "nsv/wave_grid.hpp"

namespace nsv {

using Complex = std::complex<double>;

/// Cached rank-4 complex-to-complex FFTW plans, one pair per lattice size.
///
/// Plans are created with FFTW_ESTIMATE so planning never depends on timing
/// measurements (identical runs stay bit-identical), and FFTW_UNALIGNED so
/// they can execute on any heap buffer.  Plan creation is serialized; the
/// execute calls are the thread-safe fftw_execute_dft variants, though the
/// rest of this library is single-threaded anyway.
class FftEngine {
public:
    static const FftEngine& get(int n_per_dim) {
        static std::mutex mtx;
        static std::map<int, std::unique_ptr<FftEngine>> cache;
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(n_per_dim);
        if (it == cache.end())
            it = cache.emplace(n_per_dim, std::unique_ptr<FftEngine>(new FftEngine(n_per_dim))).first;
        return *it->second;
    }

    /// Physical samples -> Fourier coefficients of the exponential series,
    /// i.e. the forward DFT scaled by 1/n^4.  in and out must be distinct.
    void to_coefficients(const Complex* in, Complex* out) const {
        fftw_execute_dft(forward_,
                         reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
        const double s = 1.0 / static_cast<double>(size_);
        for (std::size_t i = 0; i < size_; ++i) out[i] *= s;
    }

    /// Fourier coefficients -> physical samples (plain exponential sum).
    /// in and out must be distinct.
    void to_physical(const Complex* in, Complex* out) const {
        fftw_execute_dft(backward_,
                         reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    std::size_t size() const noexcept { return size_; }

    ~FftEngine() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

private:
    explicit FftEngine(int n) {
        size_ = static_cast<std::size_t>(n) * n * n * n;
        // throwaway buffers just for planning; FFTW_UNALIGNED lets the
        // plans run later on whatever the caller hands us
        std::vector<Complex> a(size_), b(size_);
        const int dims[4] = {n, n, n, n};
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        forward_ = fftw_plan_dft(4, dims, reinterpret_cast<fftw_complex*>(a.data()),
                                 reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD, flags);
        backward_ = fftw_plan_dft(4, dims, reinterpret_cast<fftw_complex*>(a.data()),
                                  reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD, flags);
        if (!forward_ || !backward_) throw std::runtime_error("FftEngine: plan creation failed");
    }

    fftw_plan forward_;
    fftw_plan backward_;
    std::size_t size_;
};

/// Synthesize the real physical samples of one Hermitian coefficient array.
/// The imaginary parts of the synthesis are roundoff and are dropped.
inline void coeffs_to_real(const WaveGrid& grid, const std::vector<Complex>& coeff,
                           std::vector<double>& out, std::vector<Complex>& scratch) {
    const auto& eng = FftEngine::get(grid.n());
    scratch.resize(grid.size());
    out.resize(grid.size());
    eng.to_physical(coeff.data(), scratch.data());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = scratch[i].real();
}

/// Analyze real physical samples into Fourier coefficients.
inline void real_to_coeffs(const WaveGrid& grid, const std::vector<double>& in,
                           std::vector<Complex>& coeff, std::vector<Complex>& scratch) {
    const auto& eng = FftEngine::get(grid.n());
    scratch.resize(grid.size());
    coeff.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) scratch[i] = Complex(in[i], 0.0);
    eng.to_coefficients(scratch.data(), coeff.data());
}

}  // namespace nsv
