#pragma once

#include <array>
#include <string>
#include <vector>

#include "roomeq/audio.hpp"

namespace roomeq {

// Impulse response at the pipeline rate, with an opaque id for bookkeeping.
struct ImpulseResponse {
    AudioBuffer buffer;
    std::string id;
};

// Throws unless the IR is non-empty with at least one nonzero sample.
void validate_impulse_response(const ImpulseResponse& ir);

inline constexpr int kSpectrumBins = 257;   // one-sided bins of a 512 transform
inline constexpr double kBinWidthHz = 31.25;
inline constexpr double kSpectrumFloorDb = -120.0;

// One-sided magnitude response in dB, 257 bins at 31.25 Hz spacing.
struct SpectrumDb {
    std::array<double, kSpectrumBins> gains_db{};
};

// The 8 sub-band sample frequencies; they land exactly on bins
// {2, 4, 8, 16, 32, 64, 128, 256}.
inline constexpr std::array<double, 8> kSubBandFreqsHz = {62.5, 125.0,  250.0,  500.0,
                                                          1000.0, 2000.0, 4000.0, 8000.0};
inline constexpr std::array<int, 8> kSubBandBins = {2, 4, 8, 16, 32, 64, 128, 256};
inline constexpr int kReferenceBand = 4;  // 1000 Hz

// Sub-band EQ gains in dB, referenced to 1000 Hz (entry 4 is always 0, so
// the representation has 7 degrees of freedom).
struct SubBandEq {
    std::array<double, 8> gains_db{};

    std::array<double, 7> free_vector() const {
        return {gains_db[0], gains_db[1], gains_db[2], gains_db[3],
                gains_db[5], gains_db[6], gains_db[7]};
    }
    static SubBandEq from_free_vector(const std::array<double, 7>& v) {
        return SubBandEq{{v[0], v[1], v[2], v[3], 0.0, v[4], v[5], v[6]}};
    }
};

// Magnitude frequency response on the 512-point grid.
//
// Signals that fit within one transform are measured exactly (zero-padded
// 512-point FFT). Longer signals are measured by overlapped Hann frames
// (hop 256, per-frame mean removal), magnitude-summed with unit overlap
// normalization, then smoothed over a fractional-octave neighborhood per
// bin. Values are floored at -120 dB.
SpectrumDb magnitude_response_db(const ImpulseResponse& ir);

SpectrumDb magnitude_response_db(const std::vector<double>& samples, int sample_rate);

// Reads the spectrum at the 8 sample-point bins and references to 1000 Hz.
SubBandEq extract_subband_eq(const ImpulseResponse& ir);
SubBandEq extract_subband_eq(const std::vector<double>& samples, int sample_rate);

// Reverberation time from the Schroeder backward-integrated decay curve,
// line fit over the [-5, -35] dB segment. Throws "unreliable estimate" when
// the decay segment is shorter than 10 ms or never reaches -35 dB.
double estimate_t60(const ImpulseResponse& ir);
double estimate_t60(const std::vector<double>& samples, int sample_rate);

}  // namespace roomeq
