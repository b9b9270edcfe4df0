#include "roomeq/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "roomeq/common.hpp"

namespace roomeq {

namespace {
// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
    if (n == 0) throw Error("RealFft: size must be positive");
    real_buf_ = fftw_alloc_real(n);
    cplx_buf_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_buf_,
                                     static_cast<fftw_complex*>(cplx_buf_),
                                     FFTW_ESTIMATE);
    inv_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                     static_cast<fftw_complex*>(cplx_buf_),
                                     real_buf_, FFTW_ESTIMATE);
    if (!fwd_plan_ || !inv_plan_) throw Error("RealFft: plan creation failed");
}

RealFft::~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_plan_));
    fftw_free(real_buf_);
    fftw_free(cplx_buf_);
}

std::vector<std::complex<double>> RealFft::forward(const std::vector<double>& in) {
    if (in.size() != n_) throw Error("RealFft::forward: size mismatch");
    std::memcpy(real_buf_, in.data(), n_ * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(fwd_plan_));
    std::vector<std::complex<double>> out(n_ / 2 + 1);
    std::memcpy(out.data(), cplx_buf_, out.size() * sizeof(fftw_complex));
    return out;
}

std::vector<double> RealFft::inverse(const std::vector<std::complex<double>>& in) {
    if (in.size() != n_ / 2 + 1) throw Error("RealFft::inverse: size mismatch");
    std::memcpy(cplx_buf_, in.data(), in.size() * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(inv_plan_));
    std::vector<double> out(n_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_buf_[i] * scale;
    return out;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace roomeq
