#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "roomeq/spectral.hpp"

namespace roomeq {

// Shoebox room with uniform, frequency-independent surface absorption.
struct RoomSpec {
    std::array<double, 3> dims{};    // meters
    std::array<double, 3> source{};  // meters
    std::array<double, 3> mic{};     // meters
    std::string id;
};

// Throws on invalid geometry; returns warnings (e.g. volume outside the
// 100..2000 m^3 range) without failing.
std::vector<std::string> validate_room(const RoomSpec& spec);

double room_volume(const RoomSpec& spec);
double room_surface(const RoomSpec& spec);

// Eyring inversion: alpha = 1 - exp(-0.161 V / (S * t60)), clamped to
// (0, 0.99]. Valid for 0.1 <= target_t60 <= 4.0.
double absorption_for_t60(const std::array<double, 3>& dims, double target_t60);

// Single image-method pass at the given absorption. Image delays (reflections
// only; the direct path is placed exactly) carry a seeded +-5 ms jitter that
// breaks the mirror lattice's coherent comb, mimicking the flat response of
// diffuse geometric simulation.
ImpulseResponse render_shoebox_ir(const RoomSpec& spec, double absorption,
                                  double max_length_s, std::uint64_t seed);

// Image-method IR targeted at a T60: absorption from the Eyring inversion,
// then up to three refinement passes against the Schroeder measurement
// (geometric image sums decay slower than the diffuse-field prediction).
ImpulseResponse simulate_shoebox_ir(const RoomSpec& spec, double target_t60,
                                    double max_length_s);

}  // namespace roomeq
