#pragma once

#include <array>
#include <vector>

#include "roomeq/audio.hpp"
#include "roomeq/spectral.hpp"

namespace roomeq {

inline constexpr int kFirTaps = 511;
inline constexpr int kFirDelay = 255;  // (511 - 1) / 2
inline constexpr double kGainClampDb = 30.0;

// Linear-phase (type I) EQ compensation filter.
struct FirFilter {
    std::vector<double> taps;                  // exactly 511, symmetric
    std::array<double, 8> design_gains_db{};   // the requested sub-band gains
    bool clamped = false;                      // any request hit the +-30 dB clamp
};

// Desired one-sided magnitude grid (257 linear-amplitude values). Gains are
// clamped into [-30, +30] dB, interpolated linearly in dB over log-frequency
// between 62.5 and 8000 Hz, and held constant outside that span.
std::array<double, kSpectrumBins> interpolate_desired_response(
    const std::array<double, 8>& gains_db);

// Window-method design: frequency-sampled linear-phase kernel, 511 centered
// taps, Hamming window; the 8 control gains are then refined with a damped
// Gauss-Newton loop until the filter's measured sub-band EQ matches the
// request (tolerance 0.02 dB or 30 rounds).
FirFilter design_eq_filter(const std::array<double, 8>& gains_db);

// Full linear convolution of two signals. convolve() picks the direct form
// for short outputs and the FFT form otherwise; the two agree to 1e-9.
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> convolve_direct(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b);

// Applies the filter; with trim_delay the first 255 samples are dropped so
// direct-path timing is preserved (output length n + 255).
AudioBuffer apply_fir(const AudioBuffer& signal, const FirFilter& filter, bool trim_delay);

// Plain-text tap dump: a comment line with the 8 requested gains, then one
// coefficient per line at 17 significant digits.
void dump_filter(const FirFilter& filter, const std::string& path);

}  // namespace roomeq
