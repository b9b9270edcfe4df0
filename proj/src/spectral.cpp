#include "roomeq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roomeq/common.hpp"
#include "roomeq/fft.hpp"

namespace roomeq {

namespace {

constexpr int kN = 512;
constexpr int kHop = 256;
constexpr double kPi = 3.14159265358979323846;

const std::vector<double>& hann_periodic_512() {
    static const std::vector<double> w = [] {
        std::vector<double> v(kN);
        for (int j = 0; j < kN; ++j) {
            v[j] = 0.5 * (1.0 - std::cos(2.0 * kPi * j / kN));
        }
        return v;
    }();
    return w;
}

// Fractional-octave magnitude smoothing (1/3 octave, at least +-1 bin,
// +-2 bins below 250 Hz). Bins 0 and 1 carry the near-DC content and are
// excluded from every neighborhood; the top end mirrors around Nyquist.
void smooth_fractional_octave(std::vector<double>& mag) {
    static const double half = std::pow(2.0, 1.0 / 6.0);
    std::vector<double> in = mag;
    for (int k = 2; k < kSpectrumBins; ++k) {
        const int hw = k < 8 ? 2 : 1;
        int lo = std::min(static_cast<int>(std::floor(k / half)), k - hw);
        int hi = std::max(static_cast<int>(std::ceil(k * half)), k + hw);
        lo = std::max(lo, 2);
        double acc = 0.0;
        int cnt = 0;
        for (int j = lo; j <= hi; ++j) {
            const int jj = j > 256 ? 512 - j : j;
            acc += in[jj];
            ++cnt;
        }
        mag[k] = acc / cnt;
    }
}

std::vector<double> magnitude_estimate(const std::vector<double>& x) {
    const auto len = static_cast<long long>(x.size());
    RealFft fft(kN);
    std::vector<double> frame(kN);
    std::vector<double> est(kSpectrumBins, 0.0);

    if (len <= 4 * kN) {
        // Exact path for compact signals (filters, cascades, short kernels):
        // folding onto the 512 grid samples the true transform at the bin
        // frequencies, so magnitudes are shift-exact and multiplicative
        // under convolution.
        for (long long i = 0; i < len; ++i) {
            frame[static_cast<std::size_t>(i % kN)] += x[static_cast<std::size_t>(i)];
        }
        auto spec = fft.forward(frame);
        for (int k = 0; k < kSpectrumBins; ++k) est[k] = std::abs(spec[k]);
        return est;
    }

    // Overlapped frames, front-padded so every sample gets unit total window
    // weight (periodic Hann at 50% overlap sums to 1).
    const auto& w = hann_periodic_512();
    const long long frames = (len + kHop - 1) / kHop + 1;
    for (long long f = 0; f < frames; ++f) {
        const long long start = f * kHop - kHop;
        double mean = 0.0;
        for (int j = 0; j < kN; ++j) {
            const long long idx = start + j;
            frame[j] = (idx >= 0 && idx < len) ? x[static_cast<std::size_t>(idx)] : 0.0;
            mean += frame[j];
        }
        mean /= kN;
        for (int j = 0; j < kN; ++j) frame[j] = (frame[j] - mean) * w[j];
        auto spec = fft.forward(frame);
        for (int k = 0; k < kSpectrumBins; ++k) est[k] += std::abs(spec[k]);
    }
    for (double& v : est) v *= 0.5;
    smooth_fractional_octave(est);
    return est;
}

}  // namespace

void validate_impulse_response(const ImpulseResponse& ir) {
    if (ir.buffer.samples.empty()) {
        throw Error("impulse response is empty (id: " + ir.id + ")");
    }
    const bool any_nonzero =
        std::any_of(ir.buffer.samples.begin(), ir.buffer.samples.end(),
                    [](double v) { return v != 0.0; });
    if (!any_nonzero) {
        throw Error("impulse response is all zero (id: " + ir.id + ")");
    }
}

SpectrumDb magnitude_response_db(const std::vector<double>& samples, int sample_rate) {
    if (sample_rate != kPipelineRate) {
        throw Error("magnitude_response_db: expected " + std::to_string(kPipelineRate) +
                    " Hz, got " + std::to_string(sample_rate));
    }
    if (samples.empty()) throw Error("magnitude_response_db: empty signal");

    auto est = magnitude_estimate(samples);
    SpectrumDb out;
    for (int k = 0; k < kSpectrumBins; ++k) {
        const double db = est[k] > 0.0 ? 20.0 * std::log10(est[k]) : kSpectrumFloorDb;
        out.gains_db[k] = std::max(db, kSpectrumFloorDb);
    }
    return out;
}

SpectrumDb magnitude_response_db(const ImpulseResponse& ir) {
    validate_impulse_response(ir);
    return magnitude_response_db(ir.buffer.samples, ir.buffer.sample_rate);
}

SubBandEq extract_subband_eq(const std::vector<double>& samples, int sample_rate) {
    const SpectrumDb spec = magnitude_response_db(samples, sample_rate);
    SubBandEq eq;
    const double ref = spec.gains_db[kSubBandBins[kReferenceBand]];
    for (int b = 0; b < 8; ++b) {
        eq.gains_db[b] = spec.gains_db[kSubBandBins[b]] - ref;
    }
    return eq;
}

SubBandEq extract_subband_eq(const ImpulseResponse& ir) {
    validate_impulse_response(ir);
    return extract_subband_eq(ir.buffer.samples, ir.buffer.sample_rate);
}

double estimate_t60(const std::vector<double>& samples, int sample_rate) {
    if (samples.empty()) throw Error("estimate_t60: empty signal");
    const std::size_t n = samples.size();

    // Schroeder backward integration of energy.
    std::vector<double> edc(n);
    double acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        acc += samples[i] * samples[i];
        edc[i] = acc;
    }
    if (acc <= 0.0) throw Error("estimate_t60: silent signal");
    const double total = acc;

    std::size_t i1 = n, i2 = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double db = 10.0 * std::log10(edc[i] / total);
        if (i1 == n && db <= -5.0) i1 = i;
        if (db <= -35.0) {
            i2 = i;
            break;
        }
    }
    const std::size_t min_len = static_cast<std::size_t>(0.010 * sample_rate);
    if (i1 == n || i2 == n || i2 <= i1 || i2 - i1 < min_len) {
        throw Error("estimate_t60: unreliable estimate (decay segment too short)");
    }

    // Least-squares line through the [-5, -35] dB segment.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto count = static_cast<double>(i2 - i1);
    for (std::size_t i = i1; i < i2; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double db = 10.0 * std::log10(edc[i] / total);
        sx += t;
        sy += db;
        sxx += t * t;
        sxy += t * db;
    }
    const double denom = count * sxx - sx * sx;
    if (denom <= 0.0) throw Error("estimate_t60: unreliable estimate (degenerate fit)");
    const double slope = (count * sxy - sx * sy) / denom;  // dB per second
    if (slope >= 0.0) throw Error("estimate_t60: unreliable estimate (no decay)");
    return 60.0 / -slope;
}

double estimate_t60(const ImpulseResponse& ir) {
    validate_impulse_response(ir);
    return estimate_t60(ir.buffer.samples, ir.buffer.sample_rate);
}

}  // namespace roomeq
