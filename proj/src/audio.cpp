#include "roomeq/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "roomeq/common.hpp"

namespace roomeq {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 24) & 0xff);
}

void put_u16(std::vector<unsigned char>& v, std::uint16_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
}

}  // namespace

AudioBuffer read_audio(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("read_audio: cannot open file: " + path);
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
        throw Error("read_audio: not a RIFF/WAVE file: " + path);
    }

    std::uint16_t audio_format = 0, num_channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    const unsigned char* pcm = nullptr;
    std::size_t pcm_bytes = 0;
    bool have_fmt = false;

    std::size_t off = 12;
    while (off + 8 <= data.size()) {
        const unsigned char* id = data.data() + off;
        std::uint32_t chunk_size = read_u32(data.data() + off + 4);
        std::size_t body = off + 8;
        if (body + chunk_size > data.size()) {
            throw Error("read_audio: truncated chunk in " + path);
        }
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw Error("read_audio: corrupt fmt chunk in " + path);
            audio_format = read_u16(data.data() + body);
            num_channels = read_u16(data.data() + body + 2);
            sample_rate = read_u32(data.data() + body + 4);
            bits = read_u16(data.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            pcm = data.data() + body;
            pcm_bytes = chunk_size;
        }
        off = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }

    if (!have_fmt || pcm == nullptr) {
        throw Error("read_audio: missing fmt or data chunk in " + path);
    }
    if (num_channels == 0 || sample_rate == 0) {
        throw Error("read_audio: corrupt header in " + path);
    }
    const bool pcm16 = audio_format == 1 && bits == 16;
    const bool float32 = audio_format == 3 && bits == 32;
    if (!pcm16 && !float32) {
        throw Error("read_audio: unsupported codec (format " +
                    std::to_string(audio_format) + ", " + std::to_string(bits) +
                    " bit) in " + path);
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * num_channels;
    const std::size_t frames = pcm_bytes / frame_bytes;
    if (frames == 0) throw Error("read_audio: empty data chunk in " + path);

    AudioBuffer out;
    out.sample_rate = static_cast<int>(sample_rate);
    out.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t ch = 0; ch < num_channels; ++ch) {
            const unsigned char* p = pcm + i * frame_bytes + ch * bytes_per_sample;
            if (pcm16) {
                std::int16_t v;
                std::memcpy(&v, p, 2);
                acc += v / 32768.0;
            } else {
                float v;
                std::memcpy(&v, p, 4);
                acc += v;
            }
        }
        out.samples[i] = acc / num_channels;
    }
    return out;
}

WriteResult write_audio(const std::string& path, const AudioBuffer& buf, WavFormat format) {
    if (buf.samples.empty()) throw Error("write_audio: empty signal");
    if (buf.sample_rate <= 0) throw Error("write_audio: invalid sample rate");

    WriteResult result;
    const std::size_t n = buf.samples.size();
    const std::uint16_t bits = format == WavFormat::Pcm16 ? 16 : 32;
    const std::uint16_t fmt_code = format == WavFormat::Pcm16 ? 1 : 3;
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(n * bits / 8);

    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put_u32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put_u32(out, 16);
    put_u16(out, fmt_code);
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(buf.sample_rate) * bits / 8);
    put_u16(out, bits / 8);
    put_u16(out, bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put_u32(out, data_bytes);

    for (double x : buf.samples) {
        double clipped = x;
        if (x > 1.0) {
            clipped = 1.0;
            ++result.clipped;
        } else if (x < -1.0) {
            clipped = -1.0;
            ++result.clipped;
        }
        if (format == WavFormat::Pcm16) {
            double scaled = std::round(clipped * 32768.0);
            scaled = std::clamp(scaled, -32768.0, 32767.0);
            auto v = static_cast<std::int16_t>(scaled);
            out.push_back(static_cast<unsigned char>(v & 0xff));
            out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        } else {
            float v = static_cast<float>(clipped);
            unsigned char b[4];
            std::memcpy(b, &v, 4);
            out.insert(out.end(), b, b + 4);
        }
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_audio: cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    if (!f) throw Error("write_audio: write failed: " + path);
    return result;
}

AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
    if (target_rate <= 0) throw Error("resample: target rate must be positive");
    if (buf.sample_rate <= 0) throw Error("resample: invalid source rate");
    if (target_rate == buf.sample_rate) return buf;

    const double ratio = static_cast<double>(target_rate) / buf.sample_rate;
    const std::size_t in_len = buf.samples.size();
    const auto out_len =
        static_cast<std::size_t>(std::llround(static_cast<double>(in_len) * ratio));

    // Anti-aliasing cutoff relative to the source Nyquist.
    const double fc = std::min(1.0, ratio);
    constexpr int kHalf = 32;  // 64-tap kernel

    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.resize(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const double t = static_cast<double>(i) / ratio;
        const auto j0 = static_cast<long long>(std::floor(t)) - kHalf + 1;
        double acc = 0.0;
        for (long long j = j0; j < j0 + 2 * kHalf; ++j) {
            if (j < 0 || j >= static_cast<long long>(in_len)) continue;
            const double u = t - static_cast<double>(j);
            const double su = kPi * fc * u;
            const double sinc = su == 0.0 ? 1.0 : std::sin(su) / su;
            const double w = 0.5 * (1.0 + std::cos(kPi * u / kHalf));
            acc += buf.samples[static_cast<std::size_t>(j)] * fc * sinc * w;
        }
        out.samples[i] = acc;
    }
    return out;
}

AudioBuffer to_pipeline_rate(const AudioBuffer& buf) {
    if (buf.sample_rate == kPipelineRate) return buf;
    return resample(buf, kPipelineRate);
}

}  // namespace roomeq
