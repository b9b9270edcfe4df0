#include "roomeq/room.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>

#include "roomeq/common.hpp"
#include "roomeq/rng.hpp"

namespace roomeq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kJitterSeconds = 0.005;
constexpr double kMinSourceMicDistance = 0.01;

double distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::uint64_t geometry_seed(const RoomSpec& spec) {
    std::uint64_t h = fnv1a64(spec.id);
    auto mix = [&h](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h = splitmix64(h ^ bits);
    };
    for (double v : spec.dims) mix(v);
    for (double v : spec.source) mix(v);
    for (double v : spec.mic) mix(v);
    return h;
}

}  // namespace

double room_volume(const RoomSpec& spec) {
    return spec.dims[0] * spec.dims[1] * spec.dims[2];
}

double room_surface(const RoomSpec& spec) {
    const auto& d = spec.dims;
    return 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
}

std::vector<std::string> validate_room(const RoomSpec& spec) {
    for (double d : spec.dims) {
        if (!(d > 0.0)) throw Error("room: dimensions must be positive");
    }
    for (int i = 0; i < 3; ++i) {
        if (!(spec.source[i] > 0.0 && spec.source[i] < spec.dims[i])) {
            throw Error("room: source must be strictly inside the room");
        }
        if (!(spec.mic[i] > 0.0 && spec.mic[i] < spec.dims[i])) {
            throw Error("room: mic must be strictly inside the room");
        }
    }
    std::vector<std::string> warnings;
    const double v = room_volume(spec);
    if (v < 100.0 || v > 2000.0) {
        warnings.push_back("room volume " + std::to_string(v) +
                           " m^3 outside the 100..2000 m^3 range");
    }
    return warnings;
}

double absorption_for_t60(const std::array<double, 3>& dims, double target_t60) {
    if (!(target_t60 >= 0.1 && target_t60 <= 4.0)) {
        throw Error("absorption_for_t60: target must be in [0.1, 4.0] s");
    }
    const double v = dims[0] * dims[1] * dims[2];
    const double s = 2.0 * (dims[0] * dims[1] + dims[0] * dims[2] + dims[1] * dims[2]);
    const double alpha = 1.0 - std::exp(-0.161 * v / (s * target_t60));
    if (alpha > 0.99) {
        std::cerr << "absorption_for_t60: warning: target " << target_t60
                  << " s is unreachable in this room, absorption clamped to 0.99\n";
        return 0.99;
    }
    return std::max(alpha, 1e-9);
}

ImpulseResponse render_shoebox_ir(const RoomSpec& spec, double absorption,
                                  double max_length_s, std::uint64_t seed) {
    validate_room(spec);
    if (!(absorption > 0.0 && absorption <= 1.0)) {
        throw Error("render_shoebox_ir: absorption must be in (0, 1]");
    }
    const double d_direct = distance(spec.source, spec.mic);
    if (d_direct < kMinSourceMicDistance) {
        throw Error("render_shoebox_ir: source and mic coincide");
    }

    const double beta = std::sqrt(1.0 - absorption);
    const auto n_samp = static_cast<long long>(max_length_s * kPipelineRate);
    const double d_max = max_length_s * kSpeedOfSound;
    const double samples_per_meter = kPipelineRate / kSpeedOfSound;

    const auto& L = spec.dims;
    const int nx = static_cast<int>(std::ceil(d_max / (2.0 * L[0]))) + 1;
    const int ny = static_cast<int>(std::ceil(d_max / (2.0 * L[1]))) + 1;
    const int nz = static_cast<int>(std::ceil(d_max / (2.0 * L[2]))) + 1;

    // beta^order lookup; order is bounded by the lattice extents.
    const int max_order = 2 * (nx + ny + nz) + 6;
    std::vector<double> beta_pow(max_order + 1);
    beta_pow[0] = 1.0;
    for (int i = 1; i <= max_order; ++i) beta_pow[i] = beta_pow[i - 1] * beta;

    const double t_direct = d_direct * samples_per_meter;
    const double jitter_samples = kJitterSeconds * kPipelineRate;

    ImpulseResponse ir;
    ir.id = spec.id;
    ir.buffer.sample_rate = kPipelineRate;
    ir.buffer.samples.assign(static_cast<std::size_t>(n_samp), 0.0);
    auto& h = ir.buffer.samples;

    // Fixed lexicographic iteration order keeps per-sample accumulation
    // bit-stable; jitter is drawn from per-image hashes, not a stream.
    std::uint64_t img_index = 0;
    for (int mx = -nx; mx <= nx; ++mx) {
        const double rx0 = 2.0 * mx * L[0];
        for (int my = -ny; my <= ny; ++my) {
            const double ry0 = 2.0 * my * L[1];
            for (int mz = -nz; mz <= nz; ++mz) {
                const double rz0 = 2.0 * mz * L[2];
                for (int q = 0; q <= 1; ++q) {
                    const double px = (1 - 2 * q) * spec.source[0] + rx0 - spec.mic[0];
                    const int ex = std::abs(mx - q) + std::abs(mx);
                    for (int j = 0; j <= 1; ++j) {
                        const double py = (1 - 2 * j) * spec.source[1] + ry0 - spec.mic[1];
                        const int ey = std::abs(my - j) + std::abs(my);
                        for (int kk = 0; kk <= 1; ++kk) {
                            ++img_index;
                            const double pz =
                                (1 - 2 * kk) * spec.source[2] + rz0 - spec.mic[2];
                            const int ez = std::abs(mz - kk) + std::abs(mz);
                            const double d = std::sqrt(px * px + py * py + pz * pz);
                            if (d >= d_max || d < 1e-9) continue;
                            const int order = ex + ey + ez;
                            const double amp = beta_pow[order] / (4.0 * kPi * d);
                            double t = d * samples_per_meter;
                            if (order > 0) {
                                const std::uint64_t hv = derive_seed(seed, img_index);
                                const double u =
                                    static_cast<double>(hv >> 11) * 0x1.0p-53;
                                t += (2.0 * u - 1.0) * jitter_samples;
                                t = std::max(t, t_direct + 4.0);
                            }
                            const auto idx = static_cast<long long>(std::llround(t));
                            if (idx >= 0 && idx < n_samp) {
                                h[static_cast<std::size_t>(idx)] += amp;
                            }
                        }
                    }
                }
            }
        }
    }
    return ir;
}

ImpulseResponse simulate_shoebox_ir(const RoomSpec& spec, double target_t60,
                                    double max_length_s) {
    if (max_length_s < 1.2 * target_t60) {
        throw Error("simulate_shoebox_ir: max_length must be >= 1.2 * target T60");
    }
    const std::uint64_t seed = geometry_seed(spec);

    double t_eff = target_t60;
    ImpulseResponse ir;
    for (int round = 0; round < 4; ++round) {
        const double alpha = absorption_for_t60(spec.dims, t_eff);
        ir = render_shoebox_ir(spec, alpha, max_length_s, seed);
        const double measured = estimate_t60(ir);
        if (std::abs(measured - target_t60) / target_t60 < 0.05) break;
        t_eff = std::clamp(t_eff * target_t60 / measured, 0.1, 4.0);
    }
    return ir;
}

}  // namespace roomeq
