#include "roomeq/fir.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "roomeq/common.hpp"
#include "roomeq/fft.hpp"

namespace roomeq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kN = 512;

std::array<double, 8> clamp_gains(const std::array<double, 8>& gains_db, bool* clamped) {
    std::array<double, 8> g{};
    for (int i = 0; i < 8; ++i) {
        if (!std::isfinite(gains_db[i])) throw Error("filter design: non-finite gain");
        g[i] = std::clamp(gains_db[i], -kGainClampDb, kGainClampDb);
        if (clamped && g[i] != gains_db[i]) *clamped = true;
    }
    return g;
}

// One pass of the window method for a given set of control gains.
std::vector<double> window_design(const std::array<double, 8>& control_db) {
    const auto grid = interpolate_desired_response(control_db);

    // Zero-phase kernel from the real grid; exact tap symmetry by mirroring.
    RealFft fft(kN);
    std::vector<std::complex<double>> spec(kN / 2 + 1);
    for (int k = 0; k <= kN / 2; ++k) spec[k] = grid[k];
    const auto h0 = fft.inverse(spec);

    std::vector<double> taps(kFirTaps);
    taps[kFirDelay] = h0[0];
    for (int m = 1; m <= kFirDelay; ++m) {
        taps[kFirDelay + m] = h0[m];
        taps[kFirDelay - m] = h0[m];
    }
    for (int n = 0; n < kFirTaps; ++n) {
        const double w = 0.54 - 0.46 * std::cos(2.0 * kPi * n / (kFirTaps - 1));
        taps[n] *= w;
    }
    return taps;
}

std::array<double, 7> measure_free(const std::vector<double>& taps) {
    return extract_subband_eq(taps, kPipelineRate).free_vector();
}

// Solve J x = b for a 7x7 system (Gaussian elimination, partial pivoting).
bool solve7(std::array<std::array<double, 7>, 7> J, std::array<double, 7>& b) {
    for (int col = 0; col < 7; ++col) {
        int piv = col;
        for (int r = col + 1; r < 7; ++r) {
            if (std::abs(J[r][col]) > std::abs(J[piv][col])) piv = r;
        }
        if (std::abs(J[piv][col]) < 1e-12) return false;
        std::swap(J[piv], J[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 7; ++r) {
            const double f = J[r][col] / J[col][col];
            for (int c = col; c < 7; ++c) J[r][c] -= f * J[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 6; r >= 0; --r) {
        for (int c = r + 1; c < 7; ++c) b[r] -= J[r][c] * b[c];
        b[r] /= J[r][r];
    }
    return true;
}

constexpr std::array<int, 7> kFreeBands = {0, 1, 2, 3, 5, 6, 7};

}  // namespace

std::array<double, kSpectrumBins> interpolate_desired_response(
    const std::array<double, 8>& gains_db) {
    const auto g = clamp_gains(gains_db, nullptr);

    std::array<double, 8> logf{};
    for (int i = 0; i < 8; ++i) logf[i] = std::log(kSubBandFreqsHz[i]);

    std::array<double, kSpectrumBins> grid{};
    for (int k = 0; k < kSpectrumBins; ++k) {
        const double f = kBinWidthHz * k;
        double db;
        if (f <= kSubBandFreqsHz.front()) {
            db = g.front();
        } else if (f >= kSubBandFreqsHz.back()) {
            db = g.back();
        } else {
            int i = 0;
            while (f >= kSubBandFreqsHz[i + 1]) ++i;
            const double t = (std::log(f) - logf[i]) / (logf[i + 1] - logf[i]);
            db = g[i] + t * (g[i + 1] - g[i]);
        }
        grid[k] = std::pow(10.0, db / 20.0);
    }
    return grid;
}

FirFilter design_eq_filter(const std::array<double, 8>& gains_db) {
    FirFilter filter;
    filter.design_gains_db = gains_db;
    const auto request = clamp_gains(gains_db, &filter.clamped);

    std::array<double, 7> target{};
    for (int i = 0; i < 7; ++i) target[i] = request[kFreeBands[i]];

    // The window method smooths the response near closely spaced sample
    // points, so the control gains are refined against the measured EQ.
    std::array<double, 8> control = request;
    std::vector<double> taps = window_design(control);
    std::vector<double> best_taps = taps;
    double best_err = 1e300;
    std::array<std::array<double, 7>, 7> J{};
    bool have_jacobian = false;

    constexpr int kMaxRounds = 30;
    constexpr double kTolDb = 0.02;
    for (int round = 0; round < kMaxRounds; ++round) {
        const auto measured = measure_free(taps);
        std::array<double, 7> err{};
        double max_err = 0.0;
        for (int i = 0; i < 7; ++i) {
            err[i] = target[i] - measured[i];
            max_err = std::max(max_err, std::abs(err[i]));
        }
        if (max_err < best_err) {
            best_err = max_err;
            best_taps = taps;
        }
        if (max_err < kTolDb) break;

        if (round % 4 == 0 || !have_jacobian) {
            // Finite-difference Jacobian of measured EQ wrt control gains.
            constexpr double kDelta = 0.5;
            for (int a = 0; a < 7; ++a) {
                auto u = control;
                u[kFreeBands[a]] += kDelta;
                const auto m = measure_free(window_design(u));
                for (int i = 0; i < 7; ++i) J[i][a] = (m[i] - measured[i]) / kDelta;
            }
            have_jacobian = true;
        }

        std::array<double, 7> step = err;
        if (!solve7(J, step)) step = err;  // fall back to unit-gain update
        for (int i = 0; i < 7; ++i) {
            const double s = std::clamp(step[i], -6.0, 6.0);
            control[kFreeBands[i]] =
                std::clamp(control[kFreeBands[i]] + s, -kGainClampDb, kGainClampDb);
        }
        taps = window_design(control);
    }

    filter.taps = std::move(best_taps);
    return filter;
}

std::vector<double> convolve_direct(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw Error("convolve: empty signal");
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
    }
    return out;
}

std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw Error("convolve: empty signal");
    const std::size_t out_len = a.size() + b.size() - 1;
    const std::size_t n = next_pow2(out_len);
    RealFft fft(n);
    std::vector<double> pa(n, 0.0), pb(n, 0.0);
    std::copy(a.begin(), a.end(), pa.begin());
    std::copy(b.begin(), b.end(), pb.begin());
    auto fa = fft.forward(pa);
    const auto fb = fft.forward(pb);
    for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
    auto full = fft.inverse(fa);
    full.resize(out_len);
    return full;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw Error("convolve: empty signal");
    const std::size_t longer = std::max(a.size(), b.size());
    return longer <= 4096 ? convolve_direct(a, b) : convolve_fft(a, b);
}

AudioBuffer apply_fir(const AudioBuffer& signal, const FirFilter& filter, bool trim_delay) {
    if (signal.samples.empty()) throw Error("apply_fir: empty signal");
    if (filter.taps.size() != static_cast<std::size_t>(kFirTaps)) {
        throw Error("apply_fir: filter must have 511 taps");
    }
    auto full = convolve(signal.samples, filter.taps);
    AudioBuffer out;
    out.sample_rate = signal.sample_rate;
    if (trim_delay) {
        out.samples.assign(full.begin() + kFirDelay, full.end());
    } else {
        out.samples = std::move(full);
    }
    return out;
}

void dump_filter(const FirFilter& filter, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("dump_filter: cannot open for writing: " + path);
    char line[512];
    std::snprintf(line, sizeof(line),
                  "# gains_db: %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  filter.design_gains_db[0], filter.design_gains_db[1],
                  filter.design_gains_db[2], filter.design_gains_db[3],
                  filter.design_gains_db[4], filter.design_gains_db[5],
                  filter.design_gains_db[6], filter.design_gains_db[7]);
    f << line;
    for (double t : filter.taps) {
        std::snprintf(line, sizeof(line), "%.17g\n", t);
        f << line;
    }
    if (!f) throw Error("dump_filter: write failed: " + path);
}

}  // namespace roomeq
