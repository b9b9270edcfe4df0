#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace roomeq {

// Mono sampled signal, amplitudes nominally in [-1, 1].
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 0;

    std::size_t size() const { return samples.size(); }
    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

enum class WavFormat { Pcm16, Float32 };

struct WriteResult {
    std::size_t clipped = 0;  // samples outside [-1, 1], clipped on write
};

// Reads a RIFF/WAVE file (PCM16 or IEEE float32). Multi-channel input is
// downmixed by per-sample channel average. Sample values are scaled to
// [-1, 1] (PCM16 full scale -32768 -> -1.0).
AudioBuffer read_audio(const std::string& path);

WriteResult write_audio(const std::string& path, const AudioBuffer& buf,
                        WavFormat format = WavFormat::Float32);

// Windowed-sinc resampler (64-tap kernel, Hann window). Output length is
// round(n * target / source).
AudioBuffer resample(const AudioBuffer& buf, int target_rate);

// Resamples to the canonical 16 kHz pipeline rate when needed.
AudioBuffer to_pipeline_rate(const AudioBuffer& buf);

}  // namespace roomeq
