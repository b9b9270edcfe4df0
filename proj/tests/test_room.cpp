#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "roomeq/common.hpp"
#include "roomeq/room.hpp"
#include "roomeq/spectral.hpp"

using namespace roomeq;

namespace {

RoomSpec standard_room() {
    RoomSpec spec;
    spec.dims = {6.0, 5.0, 3.2};
    spec.source = {1.8, 1.4, 1.6};
    spec.mic = {4.1, 3.6, 1.3};
    spec.id = "room";
    return spec;
}

}  // namespace

TEST_CASE("eyring inversion against the hand-evaluated example") {
    // 5x4x3: V=60, S=94. Sabine alpha for T60=0.5 is 0.161*60/(94*0.5) = 0.2055;
    // the Eyring result is 1 - exp(-0.2055) = 0.1858.
    const double sabine = 0.161 * 60.0 / (94.0 * 0.5);
    CHECK(sabine == doctest::Approx(0.20553).epsilon(1e-4));
    const double alpha = absorption_for_t60({5.0, 4.0, 3.0}, 0.5);
    CHECK(alpha == doctest::Approx(1.0 - std::exp(-sabine)).epsilon(1e-12));
    CHECK(alpha == doctest::Approx(0.18578).epsilon(1e-4));
}

TEST_CASE("absorption tends to zero for long reverberation targets") {
    const double a = absorption_for_t60({5.0, 4.0, 3.0}, 4.0);
    CHECK(a < 0.03);
    CHECK(a > 0.0);
}

TEST_CASE("small target in a large room clamps at 0.99") {
    const double a = absorption_for_t60({20.0, 20.0, 20.0}, 0.1);
    CHECK(a == 0.99);
}

TEST_CASE("target out of range is rejected") {
    CHECK_THROWS_AS(absorption_for_t60({5, 4, 3}, 0.05), Error);
    CHECK_THROWS_AS(absorption_for_t60({5, 4, 3}, 5.0), Error);
}

TEST_CASE("room validation") {
    RoomSpec spec = standard_room();
    const auto warnings = validate_room(spec);  // V = 96 m^3, below 100
    REQUIRE(warnings.size() == 1);

    spec.dims = {8.0, 6.0, 3.0};  // 144 m^3
    spec.mic = {4.0, 3.0, 1.5};
    CHECK(validate_room(spec).empty());

    spec.mic = {9.0, 3.0, 1.5};
    CHECK_THROWS_WITH_AS(validate_room(spec), doctest::Contains("inside"), Error);

    spec = standard_room();
    spec.dims = {6.0, -5.0, 3.2};
    CHECK_THROWS_AS(validate_room(spec), Error);
}

TEST_CASE("fully absorbing room keeps only the direct path") {
    RoomSpec spec = standard_room();
    const ImpulseResponse ir = render_shoebox_ir(spec, 1.0, 0.25, 7);
    std::size_t nonzero = 0, first = 0;
    for (std::size_t i = 0; i < ir.buffer.samples.size(); ++i) {
        if (ir.buffer.samples[i] != 0.0) {
            if (nonzero == 0) first = i;
            ++nonzero;
        }
    }
    CHECK(nonzero == 1);
    const double dist = std::sqrt(2.3 * 2.3 + 2.2 * 2.2 + 0.3 * 0.3);
    const auto expected = static_cast<std::size_t>(
        std::llround(dist / kSpeedOfSound * kPipelineRate));
    CHECK(first == expected);
}

TEST_CASE("direct-path delay: 3.43 m arrives at sample 160") {
    RoomSpec spec;
    spec.dims = {10.0, 8.0, 4.0};
    spec.source = {2.0, 4.0, 2.0};
    spec.mic = {5.43, 4.0, 2.0};  // distance 3.43 m -> 0.01 s -> sample 160
    spec.id = "delay";
    const ImpulseResponse ir = render_shoebox_ir(spec, 1.0, 0.2, 1);
    std::size_t first = 0;
    while (first < ir.buffer.samples.size() && ir.buffer.samples[first] == 0.0) ++first;
    CHECK(first == 160);
}

TEST_CASE("doubling distance halves the direct amplitude") {
    RoomSpec near;
    near.dims = {12.0, 9.0, 4.0};
    near.source = {2.0, 4.5, 2.0};
    near.mic = {3.5, 4.5, 2.0};  // 1.5 m
    near.id = "near";
    RoomSpec far = near;
    far.mic = {5.0, 4.5, 2.0};  // 3.0 m
    far.id = "far";

    auto direct_peak = [](const ImpulseResponse& ir) {
        double peak = 0.0;
        for (double v : ir.buffer.samples) peak = std::max(peak, std::abs(v));
        return peak;
    };
    const double a_near = direct_peak(render_shoebox_ir(near, 1.0, 0.2, 3));
    const double a_far = direct_peak(render_shoebox_ir(far, 1.0, 0.2, 3));
    CHECK(std::abs(a_near / a_far - 2.0) < 0.1);
}

TEST_CASE("higher absorption strictly shortens the measured T60") {
    const RoomSpec spec = standard_room();
    double prev = 1e9;
    for (double alpha : {0.1, 0.3, 0.5, 0.7}) {
        const ImpulseResponse ir = render_shoebox_ir(spec, alpha, 1.4, 11);
        const double t60 = estimate_t60(ir);
        CHECK(t60 < prev);
        prev = t60;
    }
}

TEST_CASE("t60-targeted simulation hits the target") {
    const RoomSpec spec = standard_room();
    for (double target : {0.6, 1.2}) {
        const ImpulseResponse ir = simulate_shoebox_ir(spec, target, 1.5 * target);
        const double measured = estimate_t60(ir);
        CHECK(measured > 0.8 * target);
        CHECK(measured < 1.2 * target);
    }
}

TEST_CASE("simulated IR has near-flat sub-band EQ for T60 >= 0.4") {
    RoomSpec spec = standard_room();
    for (double target : {0.5, 0.8}) {
        const ImpulseResponse ir = simulate_shoebox_ir(spec, target, 1.4 * target);
        const SubBandEq eq = extract_subband_eq(ir);
        for (double g : eq.gains_db) CHECK(std::abs(g) <= 3.0);
    }
}

TEST_CASE("simulation is deterministic for identical inputs") {
    const RoomSpec spec = standard_room();
    const ImpulseResponse a = simulate_shoebox_ir(spec, 0.5, 0.75);
    const ImpulseResponse b = simulate_shoebox_ir(spec, 0.5, 0.75);
    REQUIRE(a.buffer.samples.size() == b.buffer.samples.size());
    for (std::size_t i = 0; i < a.buffer.samples.size(); ++i) {
        CHECK(a.buffer.samples[i] == b.buffer.samples[i]);
    }
}

TEST_CASE("coincident source and mic are rejected") {
    RoomSpec spec = standard_room();
    spec.mic = spec.source;
    CHECK_THROWS_WITH_AS(render_shoebox_ir(spec, 0.5, 0.3, 1),
                         doctest::Contains("coincide"), Error);
}

TEST_CASE("max_length below 1.2x target is rejected") {
    CHECK_THROWS_AS(simulate_shoebox_ir(standard_room(), 1.0, 1.0), Error);
}
