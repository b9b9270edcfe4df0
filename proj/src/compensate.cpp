#include "roomeq/compensate.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "roomeq/audio.hpp"
#include "roomeq/common.hpp"
#include "roomeq/fir.hpp"
#include "roomeq/parallel.hpp"
#include "roomeq/rng.hpp"

namespace fs = std::filesystem;

namespace roomeq {

std::pair<ImpulseResponse, CompensationRecord> compensate_ir(
    const ImpulseResponse& ir, const EqGmm& model, std::uint64_t seed) {
    validate_impulse_response(ir);

    CompensationRecord rec;
    rec.ir_id = ir.id;
    rec.seed = seed;
    rec.original_eq = extract_subband_eq(ir);

    Rng rng(derive_seed(seed, ir.id));
    rec.target_eq = sample_eq(model, rng);

    for (int b = 0; b < 8; ++b) {
        rec.gain_diff[b] = rec.target_eq.gains_db[b] - rec.original_eq.gains_db[b];
    }

    const FirFilter filter = design_eq_filter(rec.gain_diff);
    rec.clamped = filter.clamped;

    ImpulseResponse out;
    out.id = ir.id;
    out.buffer = apply_fir(ir.buffer, filter, /*trim_delay=*/true);
    rec.achieved_eq = extract_subband_eq(out);
    return {std::move(out), std::move(rec)};
}

BatchReport batch_compensate(const Manifest& ir_manifest, const EqGmm& model,
                             const std::string& out_dir, std::uint64_t master_seed,
                             int workers) {
    ir_manifest.validate();
    fs::create_directories(out_dir);

    BatchReport report;
    report.records.resize(ir_manifest.size());

    parallel_for(ir_manifest.size(), workers, [&](std::size_t i) {
        const ManifestEntry& entry = ir_manifest.entries[i];
        CompensationRecord& rec = report.records[i];
        try {
            ImpulseResponse ir;
            ir.id = entry.id;
            ir.buffer = to_pipeline_rate(read_audio(entry.path));

            const std::uint64_t item_seed = derive_seed(master_seed, entry.id);
            auto [out, r] = compensate_ir(ir, model, item_seed);
            rec = std::move(r);

            const fs::path out_path = fs::path(out_dir) / entry.id;
            fs::create_directories(out_path.parent_path());
            write_audio(out_path.string(), out.buffer, WavFormat::Float32);
            rec.output_path = out_path.generic_string();
        } catch (const std::exception& e) {
            rec.ir_id = entry.id;
            rec.error = e.what();
        }
    });

    for (const auto& r : report.records) {
        if (r.error) ++report.failures;
    }
    return report;
}

void save_report(const BatchReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_report: cannot open for writing: " + path);
    for (const auto& r : report.records) {
        nlohmann::json j;
        j["ir_id"] = r.ir_id;
        if (r.error) {
            j["error"] = *r.error;
        } else {
            j["original_eq"] = r.original_eq.gains_db;
            j["target_eq"] = r.target_eq.gains_db;
            j["gain_diff"] = r.gain_diff;
            j["achieved_eq"] = r.achieved_eq.gains_db;
            j["seed"] = r.seed;
            j["clamped"] = r.clamped;
            j["output_path"] = r.output_path;
        }
        f << j.dump() << "\n";
    }
    if (!f) throw Error("save_report: write failed: " + path);
}

}  // namespace roomeq
