#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roomeq/eq_gmm.hpp"
#include "roomeq/manifest.hpp"
#include "roomeq/spectral.hpp"

namespace roomeq {

struct CompensationRecord {
    std::string ir_id;
    SubBandEq original_eq;
    SubBandEq target_eq;
    std::array<double, 8> gain_diff{};  // target - original
    SubBandEq achieved_eq;
    std::uint64_t seed = 0;
    bool clamped = false;
    std::string output_path;
    std::optional<std::string> error;  // set when a batch item failed
};

// The compensation pipeline for one IR: sample a target EQ from the model
// (seeded by (seed, ir id)), design the difference filter, apply it with the
// group delay trimmed, and measure the achieved EQ.
std::pair<ImpulseResponse, CompensationRecord> compensate_ir(
    const ImpulseResponse& ir, const EqGmm& model, std::uint64_t seed);

struct BatchReport {
    std::vector<CompensationRecord> records;  // manifest order
    std::size_t failures = 0;
};

// Per-item seed = hash(master_seed, ir id); items run in parallel but the
// result is independent of worker count. Outputs are float32 WAVE files
// under out_dir mirroring the manifest ids. Item failures are recorded and
// the batch continues.
BatchReport batch_compensate(const Manifest& ir_manifest, const EqGmm& model,
                             const std::string& out_dir, std::uint64_t master_seed,
                             int workers = 0);

void save_report(const BatchReport& report, const std::string& path);

}  // namespace roomeq
