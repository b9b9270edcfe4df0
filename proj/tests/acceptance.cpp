// Acceptance suite: one line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "roomeq/audio.hpp"
#include "roomeq/common.hpp"
#include "roomeq/augment.hpp"
#include "roomeq/compensate.hpp"
#include "roomeq/eq_gmm.hpp"
#include "roomeq/fir.hpp"
#include "roomeq/manifest.hpp"
#include "roomeq/rng.hpp"
#include "roomeq/room.hpp"
#include "roomeq/spectral.hpp"

using namespace roomeq;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

RoomSpec acceptance_room(int variant) {
    RoomSpec spec;
    spec.dims = {6.0, 5.0, 3.2};
    spec.source = {1.4 + 0.33 * (variant % 7), 1.1 + 0.35 * (variant % 5), 1.55};
    spec.mic = {4.4 - 0.28 * (variant % 6), 3.7 - 0.31 * (variant % 4), 1.30};
    spec.id = "acc-room-" + std::to_string(variant);
    return spec;
}

AudioBuffer speech_like(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    AudioBuffer buf;
    buf.sample_rate = kPipelineRate;
    buf.samples.resize(n);
    double state = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        state = 0.95 * state + 0.08 * rng.normal();
        buf.samples[i] = state;
    }
    return buf;
}

double rms(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

std::string read_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) {
            ++i;
        } else {
            ++j;
        }
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

// ---------------------------------------------------------------------------

Outcome criterion_filter_accuracy() {
    Outcome out;
    Rng rng(4242);
    std::vector<double> times_ms;
    double worst_interior = 0.0, worst_edge = 0.0, worst_asym = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 8> g{};
        for (double& v : g) v = rng.uniform(-12.0, 12.0);
        g[4] = 0.0;
        const auto t0 = Clock::now();
        const FirFilter f = design_eq_filter(g);
        times_ms.push_back(ms_since(t0));

        for (int i = 0; i < 256; ++i) {
            worst_asym = std::max(worst_asym, std::abs(f.taps[i] - f.taps[510 - i]));
        }
        const SubBandEq eq = extract_subband_eq(f.taps, kPipelineRate);
        for (int b : {1, 2, 3, 5, 6}) {
            worst_interior = std::max(worst_interior, std::abs(eq.gains_db[b] - g[b]));
        }
        worst_edge = std::max(worst_edge, std::abs(eq.gains_db[0] - g[0]));
        worst_edge = std::max(worst_edge, std::abs(eq.gains_db[7] - g[7]));
    }
    std::sort(times_ms.begin(), times_ms.end());
    const double median_ms = times_ms[times_ms.size() / 2];

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "interior %.3f dB (<=1.0), edge %.3f dB (<=2.0), median %.2f ms "
                  "(<50), symmetry %.2e (<1e-12)",
                  worst_interior, worst_edge, median_ms, worst_asym);
    out.detail = buf;
    out.pass = worst_interior <= 1.0 && worst_edge <= 2.0 && median_ms < 50.0 &&
               worst_asym < 1e-12;
    return out;
}

Outcome criterion_round_trip() {
    Outcome out;
    Eigen::VectorXd mean(7);
    mean << 7.0, 4.5, 2.5, 1.0, -1.0, -2.0, -3.0;
    const EqGmm model({1.0}, {mean}, {Eigen::MatrixXd::Identity(7, 7) * 1e-12});

    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        RoomSpec spec = acceptance_room(trial);
        spec.id = "rt-" + std::to_string(trial);
        const ImpulseResponse ir = simulate_shoebox_ir(spec, 0.5, 0.7);
        const auto [comp, rec] = compensate_ir(ir, model, 500 + trial);
        const auto achieved = rec.achieved_eq.free_vector();
        const auto target = rec.target_eq.free_vector();
        for (int i : {1, 2, 3, 4, 5}) {  // free dims of the 125..4000 Hz bands
            worst = std::max(worst, std::abs(achieved[i] - target[i]));
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "worst interior error %.3f dB (<=1.5) over 50 IRs",
                  worst);
    out.detail = buf;
    out.pass = worst <= 1.5;
    return out;
}

Outcome criterion_distribution_match() {
    Outcome out;
    const auto t0 = Clock::now();

    Eigen::VectorXd m1(7), m2(7), m3(7);
    m1 << 6, 4, 2, 1, -1, -2, -3;
    m2 << -2, 0, 1, 0.5, 0, 1, 2;
    m3 << 2, 2, -1, -2, 1, -1, 0;
    Eigen::MatrixXd c1(7, 7), c2(7, 7), c3(7, 7);
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) {
            c1(i, j) = 4.0 * std::pow(0.6, std::abs(i - j));
            c2(i, j) = 2.0 * std::pow(0.5, std::abs(i - j));
            c3(i, j) = 3.0 * std::pow(0.4, std::abs(i - j));
        }
    }
    const EqGmm source({0.5, 0.3, 0.2}, {m1, m2, m3}, {c1, c2, c3});

    const int n = 2000;
    Rng src_rng(31337);
    std::vector<SubBandEq> data;
    data.reserve(n);
    for (int i = 0; i < n; ++i) data.push_back(sample_eq(source, src_rng));

    const EqGmm fitted = fit_gmm(data, 7, 2024);

    Rng fit_rng(77001);
    std::vector<SubBandEq> resampled;
    resampled.reserve(n);
    for (int i = 0; i < n; ++i) resampled.push_back(sample_eq(fitted, fit_rng));

    double worst_mean = 0.0, worst_std_rel = 0.0, worst_ks = 0.0;
    for (int d = 0; d < 7; ++d) {
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = data[i].free_vector()[d];
            b[i] = resampled[i].free_vector()[d];
        }
        const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
        const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
        double va = 0.0, vb = 0.0;
        for (int i = 0; i < n; ++i) {
            va += (a[i] - ma) * (a[i] - ma);
            vb += (b[i] - mb) * (b[i] - mb);
        }
        const double sa = std::sqrt(va / (n - 1));
        const double sb = std::sqrt(vb / (n - 1));
        worst_mean = std::max(worst_mean, std::abs(ma - mb));
        worst_std_rel = std::max(worst_std_rel, std::abs(sa - sb) / sa);
        worst_ks = std::max(worst_ks, ks_statistic(a, b));
    }
    const double secs = ms_since(t0) / 1000.0;

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "mean %.3f dB (<=0.2), stddev %.1f%% (<=10%%), KS %.3f (<0.08), "
                  "%.1f s (<60)",
                  worst_mean, 100.0 * worst_std_rel, worst_ks, secs);
    out.detail = buf;
    out.pass =
        worst_mean <= 0.2 && worst_std_rel <= 0.10 && worst_ks < 0.08 && secs < 60.0;
    return out;
}

Outcome criterion_gmm_recovery() {
    Outcome out;
    Eigen::VectorXd m1(7), m2(7), m3(7);
    m1 << 0, 0, 0, 0, 0, 0, 0;
    m2 << 12, 12, 12, 12, 12, 12, 12;
    m3 << -12, 12, -12, 12, -12, 12, -12;
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(7, 7) * 0.8;
    const EqGmm source({0.5, 0.3, 0.2}, {m1, m2, m3}, {cov, cov, cov});

    Rng rng(99);
    std::vector<SubBandEq> data;
    for (int i = 0; i < 9000; ++i) data.push_back(sample_eq(source, rng));

    const EqGmm model = fit_gmm(data, 3, 7);

    // match components to the truth
    const std::array<Eigen::VectorXd, 3> truth = {m1, m2, m3};
    const std::array<double, 3> true_w = {0.5, 0.3, 0.2};
    std::array<int, 3> perm = {0, 1, 2}, best = perm;
    double best_cost = 1e300;
    std::sort(perm.begin(), perm.end());
    do {
        double cost = 0.0;
        for (int c = 0; c < 3; ++c) cost += (model.means()[perm[c]] - truth[c]).norm();
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    double worst_mean = 0.0, worst_w = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (int d = 0; d < 7; ++d) {
            worst_mean =
                std::max(worst_mean, std::abs(model.means()[best[c]][d] - truth[c][d]));
        }
        worst_w = std::max(worst_w, std::abs(model.weights()[best[c]] - true_w[c]));
    }
    bool monotone = true;
    const auto& trace = model.training_log_likelihood();
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i] < trace[i - 1] - 1e-9) monotone = false;
    }
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "means %.3f dB (<=0.1), weights %.4f (<=0.02), LL monotone %s",
                  worst_mean, worst_w, monotone ? "yes" : "NO");
    out.detail = buf;
    out.pass = worst_mean <= 0.1 && worst_w <= 0.02 && monotone;
    return out;
}

Outcome criterion_t60_control() {
    Outcome out;
    double worst_rel = 0.0, worst_flat = 0.0;
    for (double target : {0.3, 0.6, 1.2}) {
        for (int variant = 0; variant < 3; ++variant) {
            RoomSpec spec = acceptance_room(variant);
            spec.id = "t60-" + std::to_string(target) + "-" + std::to_string(variant);
            const ImpulseResponse ir = simulate_shoebox_ir(spec, target, 1.5 * target);
            const double measured = estimate_t60(ir);
            worst_rel = std::max(worst_rel, std::abs(measured - target) / target);
            if (target >= 0.4) {  // flatness holds for T60 >= 0.4 s
                const SubBandEq eq = extract_subband_eq(ir);
                for (double g : eq.gains_db) {
                    worst_flat = std::max(worst_flat, std::abs(g));
                }
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "T60 error %.1f%% (<=20%%), pre-compensation |EQ| %.2f dB (<=3)",
                  100.0 * worst_rel, worst_flat);
    out.detail = buf;
    out.pass = worst_rel <= 0.20 && worst_flat <= 3.0;
    return out;
}

Outcome criterion_identity_alignment() {
    Outcome out;

    // Eq. (1) identity with a delta IR
    AugmentationSpec id_spec;
    id_spec.speech = speech_like(8000, 55);
    id_spec.speech_ir.id = "delta";
    id_spec.speech_ir.buffer.sample_rate = kPipelineRate;
    id_spec.speech_ir.buffer.samples.assign(64, 0.0);
    id_spec.speech_ir.buffer.samples[0] = 1.0;
    const AugmentResult id_res = augment_utterance(id_spec);
    double max_err = 0.0, max_abs = 0.0;
    for (std::size_t i = 0; i < id_spec.speech.samples.size(); ++i) {
        max_err = std::max(max_err,
                           std::abs(id_res.output.samples[i] - id_spec.speech.samples[i]));
        max_abs = std::max(max_abs, std::abs(id_spec.speech.samples[i]));
    }
    const double rel_err = max_err / max_abs;

    // alignment across 50 simulated IRs
    const AudioBuffer speech = speech_like(6000, 56);
    long long worst_lag = 0;
    bool durations_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        RoomSpec spec = acceptance_room(trial);
        spec.id = "align-" + std::to_string(trial);
        AugmentationSpec aspec;
        aspec.speech = speech;
        aspec.speech_ir = simulate_shoebox_ir(spec, 0.4, 0.55);
        const AugmentResult res = augment_utterance(aspec);
        if (res.output.samples.size() != speech.samples.size()) durations_ok = false;

        long long best_lag = 0;
        double best = -1e300;
        for (long long lag = -24; lag <= 24; ++lag) {
            double acc = 0.0;
            for (std::size_t i = 0; i < speech.samples.size(); ++i) {
                const long long j = static_cast<long long>(i) + lag;
                if (j >= 0 && j < static_cast<long long>(res.output.samples.size())) {
                    acc += speech.samples[i] * res.output.samples[j];
                }
            }
            if (acc > best) {
                best = acc;
                best_lag = lag;
            }
        }
        if (std::abs(best_lag) > std::abs(worst_lag)) worst_lag = best_lag;
    }

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "delta identity %.2e (<1e-6), worst xcorr lag %lld (|.|<=1), "
                  "durations %s",
                  rel_err, worst_lag, durations_ok ? "equal" : "MISMATCH");
    out.detail = buf;
    out.pass = rel_err < 1e-6 && std::llabs(worst_lag) <= 1 && durations_ok;
    return out;
}

Outcome criterion_snr_contract() {
    Outcome out;
    const AudioBuffer sig = speech_like(16000, 60);
    const AudioBuffer noise = speech_like(16000, 61);
    double worst = 0.0;
    for (double snr : {-5.0, 0.0, 10.0, 20.0}) {
        const double gain = snr_noise_gain(sig, noise, snr);
        const double measured = 10.0 * std::log10(std::pow(rms(sig.samples), 2) /
                                                  std::pow(gain * rms(noise.samples), 2));
        worst = std::max(worst, std::abs(measured - snr));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst |measured - requested| %.4f dB (<=0.01)",
                  worst);
    out.detail = buf;
    out.pass = worst <= 0.01;
    return out;
}

Outcome criterion_determinism() {
    Outcome out;
    const auto dir = fs::temp_directory_path() / "roomeq_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir / "irs");
    fs::create_directories(dir / "speech");
    fs::create_directories(dir / "noise");

    Manifest irs, speech, noises;
    for (int i = 0; i < 6; ++i) {
        RoomSpec spec = acceptance_room(i);
        spec.id = "det-" + std::to_string(i);
        const ImpulseResponse ir = simulate_shoebox_ir(spec, 0.4, 0.55);
        const auto path = (dir / "irs" / (spec.id + ".wav")).string();
        write_audio(path, ir.buffer, WavFormat::Float32);
        irs.entries.push_back({spec.id, path, EntryKind::Ir, {}});
    }
    for (int i = 0; i < 8; ++i) {
        const auto path = (dir / "speech" / ("u" + std::to_string(i) + ".wav")).string();
        write_audio(path, speech_like(5000 + 300 * i, 700 + i), WavFormat::Float32);
        speech.entries.push_back({"u" + std::to_string(i), path, EntryKind::Speech, {}});
    }
    for (int i = 0; i < 2; ++i) {
        const auto path = (dir / "noise" / ("n" + std::to_string(i) + ".wav")).string();
        write_audio(path, speech_like(7000, 800 + i), WavFormat::Float32);
        noises.entries.push_back({"n" + std::to_string(i), path, EntryKind::Noise, {}});
    }

    Eigen::VectorXd mean(7);
    mean << 5, 3, 2, 1, -1, -2, -3;
    Eigen::MatrixXd cov(7, 7);
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) cov(i, j) = 4.0 * std::pow(0.7, std::abs(i - j));
    }
    const EqGmm model({1.0}, {mean}, {cov});

    bool comp_ok = true;
    const BatchReport c1 =
        batch_compensate(irs, model, (dir / "c1").string(), 1234, 1);
    const BatchReport c8 =
        batch_compensate(irs, model, (dir / "c8").string(), 1234, 8);
    save_report(c1, (dir / "c1.jsonl").string());
    save_report(c8, (dir / "c8.jsonl").string());
    for (const auto& e : irs.entries) {
        if (read_bytes((dir / "c1" / e.id).string()) !=
            read_bytes((dir / "c8" / e.id).string())) {
            comp_ok = false;
        }
    }
    // reports must agree once the (intentionally different) output
    // directories are normalized away
    std::string rep8 = read_bytes((dir / "c8.jsonl").string());
    for (std::size_t p = rep8.find("/c8/"); p != std::string::npos;
         p = rep8.find("/c8/", p)) {
        rep8.replace(p, 4, "/c1/");
    }
    if (read_bytes((dir / "c1.jsonl").string()) != rep8 || rep8.empty()) {
        comp_ok = false;
    }

    bool aug_ok = true;
    AugmentConfig config;
    const AugmentBatchReport a1 = build_augmented_dataset(
        speech, irs, noises, config, (dir / "a1").string(), 777, 1);
    const AugmentBatchReport a8 = build_augmented_dataset(
        speech, irs, noises, config, (dir / "a8").string(), 777, 8);
    save_report(a1, (dir / "a1.jsonl").string());
    save_report(a8, (dir / "a8.jsonl").string());
    for (const auto& e : speech.entries) {
        if (read_bytes((dir / "a1" / e.id).string()) !=
            read_bytes((dir / "a8" / e.id).string())) {
            aug_ok = false;
        }
    }
    std::string arep8 = read_bytes((dir / "a8.jsonl").string());
    for (std::size_t p = arep8.find("/a8/"); p != std::string::npos;
         p = arep8.find("/a8/", p)) {
        arep8.replace(p, 4, "/a1/");
    }
    if (read_bytes((dir / "a1.jsonl").string()) != arep8 || arep8.empty()) {
        aug_ok = false;
    }

    out.detail = std::string("compensate bytes ") + (comp_ok ? "identical" : "DIFFER") +
                 ", augment bytes " + (aug_ok ? "identical" : "DIFFER") +
                 " across 1 vs 8 workers";
    out.pass = comp_ok && aug_ok;
    return out;
}

Outcome criterion_split() {
    Outcome out;
    Manifest m;
    for (int i = 0; i < 1209; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "ir%04d", i);
        m.entries.push_back({buf, std::string("/corpus/") + buf + ".wav",
                             EntryKind::Ir, {}});
    }
    auto [train, dev, test] = split_manifest(m, 773, 194, 242, 17);
    std::set<std::string> seen;
    for (const auto& part : {train, dev, test}) {
        for (const auto& e : part.entries) seen.insert(e.id);
    }
    const bool ok = train.size() == 773 && dev.size() == 194 && test.size() == 242 &&
                    seen.size() == 1209;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu/%zu/%zu, union %zu of 1209 (disjoint: %s)",
                  train.size(), dev.size(), test.size(), seen.size(),
                  ok ? "yes" : "NO");
    out.detail = buf;
    out.pass = ok;
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"filter accuracy (100 random requests)", criterion_filter_accuracy},
        {"round-trip compensation (50 IRs)", criterion_round_trip},
        {"distribution match (fit + resample)", criterion_distribution_match},
        {"GMM recovery (3 components, 9000 points)", criterion_gmm_recovery},
        {"T60 control and pre-compensation flatness", criterion_t60_control},
        {"augmentation identity and alignment", criterion_identity_alignment},
        {"SNR contract", criterion_snr_contract},
        {"batch determinism (1 vs 8 workers)", criterion_determinism},
        {"split contract (773/194/242)", criterion_split},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        if (!out.pass) ++failures;
        std::printf("[%s] criterion %zu: %s — %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), out.detail.c_str());
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d of %zu acceptance criteria FAILED\n", failures, criteria.size());
    }
    return failures == 0 ? 0 : 1;
}
