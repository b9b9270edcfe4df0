#include "roomeq/augment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "roomeq/common.hpp"
#include "roomeq/fir.hpp"
#include "roomeq/parallel.hpp"
#include "roomeq/rng.hpp"

namespace fs = std::filesystem;

namespace roomeq {

namespace {

double mean_power(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

// Loop or crop to the requested length starting at a (seeded) offset.
std::vector<double> fit_length(const std::vector<double>& x, std::size_t len,
                               std::size_t offset) {
    std::vector<double> out(len);
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < len; ++i) out[i] = x[(offset + i) % n];
    return out;
}

}  // namespace

std::size_t detect_direct_path(const ImpulseResponse& ir) {
    validate_impulse_response(ir);
    const auto& h = ir.buffer.samples;
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double a = std::abs(h[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

AudioBuffer align_convolved(std::size_t speech_len, const AudioBuffer& convolved,
                            std::size_t direct_idx) {
    if (direct_idx >= convolved.samples.size()) {
        throw Error("align_convolved: direct index beyond signal");
    }
    AudioBuffer out;
    out.sample_rate = convolved.sample_rate;
    out.samples.assign(speech_len, 0.0);
    const std::size_t avail = convolved.samples.size() - direct_idx;
    const std::size_t n = std::min(speech_len, avail);
    std::copy_n(convolved.samples.begin() + static_cast<long>(direct_idx), n,
                out.samples.begin());
    return out;
}

double snr_noise_gain(const AudioBuffer& signal, const AudioBuffer& noise,
                      double snr_db) {
    if (signal.samples.empty() || noise.samples.empty()) {
        throw Error("mix_at_snr: empty signal");
    }
    if (!std::isfinite(snr_db)) throw Error("mix_at_snr: non-finite snr");
    const auto fitted = fit_length(noise.samples, signal.samples.size(), 0);
    const double p_signal = mean_power(signal.samples);
    const double p_noise = mean_power(fitted);
    if (p_noise <= 0.0) throw Error("mix_at_snr: silent noise buffer");
    return std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));
}

AudioBuffer mix_at_snr(const AudioBuffer& signal, const AudioBuffer& noise,
                       double snr_db) {
    const double gain = snr_noise_gain(signal, noise, snr_db);
    const auto fitted = fit_length(noise.samples, signal.samples.size(), 0);
    AudioBuffer out;
    out.sample_rate = signal.sample_rate;
    out.samples.resize(signal.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] = signal.samples[i] + gain * fitted[i];
    }
    return out;
}

AugmentResult augment_utterance(const AugmentationSpec& spec) {
    if (spec.speech.samples.empty()) throw Error("augment: empty speech");
    if (!std::isfinite(spec.snr_db)) throw Error("augment: non-finite snr");
    validate_impulse_response(spec.speech_ir);
    const std::size_t len = spec.speech.samples.size();

    // Reverberant speech, shifted so it starts with the clean signal.
    AudioBuffer conv;
    conv.sample_rate = spec.speech.sample_rate;
    conv.samples = convolve(spec.speech.samples, spec.speech_ir.buffer.samples);
    const std::size_t direct = detect_direct_path(spec.speech_ir);
    AudioBuffer reverberant = align_convolved(len, conv, direct);

    // Combined noise: point sources through their IRs plus ambient.
    Rng rng(spec.seed);
    std::vector<double> noise_sum(len, 0.0);
    bool have_noise = false;
    for (const auto& [noise_buf, noise_ir] : spec.point_noises) {
        if (noise_buf.samples.empty()) throw Error("augment: empty point noise");
        validate_impulse_response(noise_ir);
        const std::size_t offset = rng.below(noise_buf.samples.size());
        const auto fitted = fit_length(noise_buf.samples, len, offset);
        const auto convolved = convolve(fitted, noise_ir.buffer.samples);
        for (std::size_t i = 0; i < len; ++i) noise_sum[i] += convolved[i];
        have_noise = true;
    }
    if (spec.ambient) {
        if (spec.ambient->samples.empty()) throw Error("augment: empty ambient noise");
        const std::size_t offset = rng.below(spec.ambient->samples.size());
        const auto fitted = fit_length(spec.ambient->samples, len, offset);
        for (std::size_t i = 0; i < len; ++i) noise_sum[i] += fitted[i];
        have_noise = true;
    }

    AugmentResult result;
    result.output.sample_rate = spec.speech.sample_rate;
    if (have_noise) {
        AudioBuffer noise;
        noise.sample_rate = spec.speech.sample_rate;
        noise.samples = std::move(noise_sum);
        result.noise_gain = snr_noise_gain(reverberant, noise, spec.snr_db);
        result.output.samples.resize(len);
        for (std::size_t i = 0; i < len; ++i) {
            result.output.samples[i] =
                reverberant.samples[i] + result.noise_gain * noise.samples[i];
        }
    } else {
        result.noiseless = true;  // snr request ignored
        result.output.samples = std::move(reverberant.samples);
    }

    double peak = 0.0;
    for (double v : result.output.samples) peak = std::max(peak, std::abs(v));
    if (peak > 1.0) {
        result.scale = 0.95 / peak;
        for (double& v : result.output.samples) v *= result.scale;
    }
    return result;
}

AugmentBatchReport build_augmented_dataset(const Manifest& speech, const Manifest& irs,
                                           const Manifest& noises,
                                           const AugmentConfig& config,
                                           const std::string& out_dir,
                                           std::uint64_t master_seed, int workers) {
    speech.validate();
    irs.validate();
    noises.validate();
    if (irs.entries.empty()) throw Error("build_augmented_dataset: no IRs");
    fs::create_directories(out_dir);

    AugmentBatchReport report;
    report.records.resize(speech.size());

    parallel_for(speech.size(), workers, [&](std::size_t i) {
        const ManifestEntry& utt = speech.entries[i];
        AugmentItemRecord& rec = report.records[i];
        rec.utterance_id = utt.id;
        rec.source_path = utt.path;
        try {
            const std::uint64_t item_seed = derive_seed(master_seed, utt.id);
            rec.seed = item_seed;
            Rng rng(item_seed);

            AugmentationSpec spec;
            spec.seed = derive_seed(item_seed, "mix");
            spec.speech = to_pipeline_rate(read_audio(utt.path));

            const auto& ir_entry = irs.entries[rng.below(irs.entries.size())];
            rec.ir_id = ir_entry.id;
            spec.speech_ir.id = ir_entry.id;
            spec.speech_ir.buffer = to_pipeline_rate(read_audio(ir_entry.path));

            spec.snr_db = rng.uniform(config.snr_min_db, config.snr_max_db);
            rec.snr_db = spec.snr_db;

            if (!noises.entries.empty()) {
                const int n_point = std::max(config.point_noises, 0);
                for (int p = 0; p < n_point; ++p) {
                    const auto& noise_entry = noises.entries[rng.below(noises.size())];
                    const auto& pn_ir_entry = irs.entries[rng.below(irs.size())];
                    rec.noise_ids.push_back(noise_entry.id);
                    AudioBuffer nb = to_pipeline_rate(read_audio(noise_entry.path));
                    ImpulseResponse nir;
                    nir.id = pn_ir_entry.id;
                    nir.buffer = to_pipeline_rate(read_audio(pn_ir_entry.path));
                    spec.point_noises.emplace_back(std::move(nb), std::move(nir));
                }
                if (n_point == 0) {
                    const auto& noise_entry = noises.entries[rng.below(noises.size())];
                    rec.noise_ids.push_back(noise_entry.id);
                    spec.ambient = to_pipeline_rate(read_audio(noise_entry.path));
                }
            }

            const AugmentResult out = augment_utterance(spec);
            rec.scale = out.scale;
            rec.duration_samples = out.output.samples.size();

            const fs::path out_path = fs::path(out_dir) / utt.id;
            fs::create_directories(out_path.parent_path());
            write_audio(out_path.string(), out.output, WavFormat::Float32);
            rec.output_path = out_path.generic_string();
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
    });

    for (const auto& r : report.records) {
        if (r.error) ++report.failures;
    }
    return report;
}

void save_report(const AugmentBatchReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_report: cannot open for writing: " + path);
    for (const auto& r : report.records) {
        nlohmann::json j;
        j["utterance_id"] = r.utterance_id;
        j["source_path"] = r.source_path;
        if (r.error) {
            j["error"] = *r.error;
        } else {
            j["ir_id"] = r.ir_id;
            j["noise_ids"] = r.noise_ids;
            j["snr_db"] = r.snr_db;
            j["seed"] = r.seed;
            j["scale"] = r.scale;
            j["output_path"] = r.output_path;
            j["duration_samples"] = r.duration_samples;
        }
        f << j.dump() << "\n";
    }
    if (!f) throw Error("save_report: write failed: " + path);
}

}  // namespace roomeq
