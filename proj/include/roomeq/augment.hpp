#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roomeq/audio.hpp"
#include "roomeq/manifest.hpp"
#include "roomeq/spectral.hpp"

namespace roomeq {

// Everything needed to build one far-field utterance: clean speech, the
// speech IR, optional point-source noises with their own IRs, optional
// ambient noise, and the target SNR for the combined noise.
struct AugmentationSpec {
    AudioBuffer speech;
    ImpulseResponse speech_ir;
    std::vector<std::pair<AudioBuffer, ImpulseResponse>> point_noises;
    std::optional<AudioBuffer> ambient;
    double snr_db = 20.0;
    std::uint64_t seed = 0;
};

struct AugmentResult {
    AudioBuffer output;
    double scale = 1.0;          // peak-normalization factor (1 = untouched)
    double noise_gain = 0.0;     // gain applied to the combined noise
    bool noiseless = false;      // no noise sources; snr was ignored
};

// Index of the maximum absolute sample (first on ties).
std::size_t detect_direct_path(const ImpulseResponse& ir);

// Drops the first direct_idx samples, then truncates or zero-pads to
// exactly speech_len samples.
AudioBuffer align_convolved(std::size_t speech_len, const AudioBuffer& convolved,
                            std::size_t direct_idx);

// Scales noise so that 10 log10(P_signal / P_noise) = snr_db (full-buffer
// RMS power) and returns signal + scaled noise. Noise shorter than the
// signal is looped; longer noise is truncated.
AudioBuffer mix_at_snr(const AudioBuffer& signal, const AudioBuffer& noise,
                       double snr_db);
double snr_noise_gain(const AudioBuffer& signal, const AudioBuffer& noise,
                      double snr_db);

// Far-field augmentation: reverberant speech aligned to the clean signal,
// point noises convolved with their IRs, ambient added, the combined noise
// scaled to the requested SNR against the aligned reverberant speech.
// Output length equals the input speech length; conditional peak
// normalization to 0.95 applies only if the mix would exceed full scale.
AugmentResult augment_utterance(const AugmentationSpec& spec);

struct AugmentConfig {
    double snr_min_db = 5.0;
    double snr_max_db = 25.0;
    int point_noises = 0;  // noises drawn as point sources (with an extra IR)
                           // instead of ambient
};

struct AugmentItemRecord {
    std::string utterance_id;
    std::string source_path;
    std::string ir_id;
    std::vector<std::string> noise_ids;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::string output_path;
    std::size_t duration_samples = 0;
    std::optional<std::string> error;
};

struct AugmentBatchReport {
    std::vector<AugmentItemRecord> records;
    std::size_t failures = 0;
};

// Pairs every utterance with an IR and a noise draw via per-item seeds;
// writes float32 WAVE outputs under out_dir and returns the output manifest
// records in input order (schedule-invariant).
AugmentBatchReport build_augmented_dataset(const Manifest& speech,
                                           const Manifest& irs,
                                           const Manifest& noises,
                                           const AugmentConfig& config,
                                           const std::string& out_dir,
                                           std::uint64_t master_seed,
                                           int workers = 0);

void save_report(const AugmentBatchReport& report, const std::string& path);

}  // namespace roomeq
