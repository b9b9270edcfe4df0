#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace roomeq {

/// Real-to-complex FFT of fixed size backed by FFTW. Plan creation is
/// serialized internally; an instance may be used from one thread at a time.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();

    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return n_; }

    // in: n real samples -> n/2+1 complex bins
    std::vector<std::complex<double>> forward(const std::vector<double>& in);

    // in: n/2+1 complex bins -> n real samples (unnormalized inverse is
    // divided by n here, so inverse(forward(x)) == x)
    std::vector<double> inverse(const std::vector<std::complex<double>>& in);

private:
    std::size_t n_;
    void* fwd_plan_;
    void* inv_plan_;
    double* real_buf_;
    void* cplx_buf_;
};

std::size_t next_pow2(std::size_t n);

}  // namespace roomeq
