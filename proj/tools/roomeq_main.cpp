// roomeq: batch pipeline for room-EQ analysis, modeling, compensation, and
// far-field speech augmentation.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "roomeq/audio.hpp"
#include "roomeq/augment.hpp"
#include "roomeq/common.hpp"
#include "roomeq/compensate.hpp"
#include "roomeq/eq_gmm.hpp"
#include "roomeq/fir.hpp"
#include "roomeq/manifest.hpp"
#include "roomeq/parallel.hpp"
#include "roomeq/rng.hpp"
#include "roomeq/room.hpp"

namespace fs = std::filesystem;
using namespace roomeq;

namespace {

struct EqTableRow {
    std::string id;
    std::array<double, 8> gains{};
};

void write_eq_table(const std::vector<EqTableRow>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open for writing: " + path);
    f << "id";
    for (double freq : kSubBandFreqsHz) f << "," << freq;
    f << "\n";
    char buf[64];
    for (const auto& row : rows) {
        f << row.id;
        for (double g : row.gains) {
            std::snprintf(buf, sizeof(buf), ",%.17g", g);
            f << buf;
        }
        f << "\n";
    }
    if (!f) throw Error("write failed: " + path);
}

std::vector<EqTableRow> read_eq_table(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open: " + path);
    std::vector<EqTableRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        EqTableRow row;
        std::stringstream ss(line);
        std::string field;
        if (!std::getline(ss, field, ',')) throw Error("bad EQ table row: " + line);
        row.id = field;
        for (int i = 0; i < 8; ++i) {
            if (!std::getline(ss, field, ',')) {
                throw Error("EQ table row has fewer than 8 gains: " + line);
            }
            row.gains[i] = std::stod(field);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::array<double, 8> parse_gains(const std::string& csv) {
    std::array<double, 8> g{};
    std::stringstream ss(csv);
    std::string field;
    for (int i = 0; i < 8; ++i) {
        if (!std::getline(ss, field, ',')) {
            throw Error("expected 8 comma-separated gains, got: " + csv);
        }
        g[i] = std::stod(field);
    }
    return g;
}

int cmd_analyze_eq(const std::string& manifest_path, const std::string& output,
                   int workers) {
    const Manifest m = load_manifest(manifest_path);
    std::vector<EqTableRow> rows(m.size());
    std::vector<std::string> errors(m.size());
    parallel_for(m.size(), workers, [&](std::size_t i) {
        try {
            ImpulseResponse ir;
            ir.id = m.entries[i].id;
            ir.buffer = to_pipeline_rate(read_audio(m.entries[i].path));
            rows[i].id = ir.id;
            rows[i].gains = extract_subband_eq(ir).gains_db;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    std::vector<EqTableRow> ok;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (errors[i].empty()) {
            ok.push_back(rows[i]);
        } else {
            ++failed;
            std::cerr << "analyze-eq: " << m.entries[i].id << ": " << errors[i] << "\n";
        }
    }
    write_eq_table(ok, output);
    std::cerr << "analyze-eq: " << ok.size() << " analyzed, " << failed << " failed\n";
    return (ok.empty() && failed > 0) ? 1 : 0;
}

int cmd_fit_gmm(const std::string& input, const std::string& output, int k,
                std::uint64_t seed) {
    const auto rows = read_eq_table(input);
    std::vector<SubBandEq> eqs;
    eqs.reserve(rows.size());
    for (const auto& row : rows) {
        SubBandEq eq;
        eq.gains_db = row.gains;
        eqs.push_back(eq);
    }
    const EqGmm model = fit_gmm(eqs, k, seed);
    save_model(model, output);
    std::cerr << "fit-gmm: k=" << k << " on " << eqs.size() << " vectors, "
              << model.training_log_likelihood().size() << " EM iterations, "
              << "final avg log-likelihood "
              << model.training_log_likelihood().back() << "\n";
    return 0;
}

int cmd_sample_eq(const std::string& model_path, const std::string& output,
                  std::size_t count, std::uint64_t seed) {
    const EqGmm model = load_model(model_path);
    Rng rng(seed);
    std::vector<EqTableRow> rows(count);
    char name[32];
    for (std::size_t i = 0; i < count; ++i) {
        std::snprintf(name, sizeof(name), "sample-%06zu", i);
        rows[i].id = name;
        rows[i].gains = sample_eq(model, rng).gains_db;
    }
    write_eq_table(rows, output);
    return 0;
}

int cmd_design_filter(const std::string& gains_csv, const std::string& output) {
    const FirFilter filter = design_eq_filter(parse_gains(gains_csv));
    dump_filter(filter, output);
    if (filter.clamped) {
        std::cerr << "design-filter: requested gains were clamped to +-30 dB\n";
    }
    return 0;
}

int cmd_simulate_ir(const std::string& rooms_path, const std::string& out_dir,
                    const std::string& manifest_out, double t60_min, double t60_max,
                    double max_length, std::uint64_t seed, int workers) {
    std::ifstream f(rooms_path);
    if (!f) throw Error("cannot open: " + rooms_path);
    struct RoomJob {
        RoomSpec spec;
        double target_t60;
    };
    std::vector<RoomJob> jobs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("bad room record at " + rooms_path + ":" +
                        std::to_string(lineno) + ": " + e.what());
        }
        RoomJob job;
        job.spec.id = j.value("id", "room-" + std::to_string(lineno));
        const auto dims = j.at("dims").get<std::vector<double>>();
        const auto src = j.at("source").get<std::vector<double>>();
        const auto mic = j.at("mic").get<std::vector<double>>();
        if (dims.size() != 3 || src.size() != 3 || mic.size() != 3) {
            throw Error("room record needs 3-element dims/source/mic: " + line);
        }
        std::copy(dims.begin(), dims.end(), job.spec.dims.begin());
        std::copy(src.begin(), src.end(), job.spec.source.begin());
        std::copy(mic.begin(), mic.end(), job.spec.mic.begin());
        if (j.contains("target_t60")) {
            job.target_t60 = j["target_t60"].get<double>();
        } else {
            // T60 drawn uniformly per room, seeded by (seed, room id).
            Rng rng(derive_seed(seed, job.spec.id));
            job.target_t60 = rng.uniform(t60_min, t60_max);
        }
        jobs.push_back(std::move(job));
    }

    fs::create_directories(out_dir);
    Manifest out_manifest;
    out_manifest.entries.resize(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        try {
            for (const auto& w : validate_room(jobs[i].spec)) {
                std::cerr << "simulate-ir: " << jobs[i].spec.id << ": warning: " << w
                          << "\n";
            }
            const double len = max_length > 0.0 ? max_length
                                                : std::max(1.3 * jobs[i].target_t60, 0.25);
            const ImpulseResponse ir =
                simulate_shoebox_ir(jobs[i].spec, jobs[i].target_t60, len);
            const fs::path out_path = fs::path(out_dir) / (jobs[i].spec.id + ".wav");
            write_audio(out_path.string(), ir.buffer, WavFormat::Float32);
            ManifestEntry& e = out_manifest.entries[i];
            e.id = jobs[i].spec.id;
            e.path = out_path.generic_string();
            e.kind = EntryKind::Ir;
            e.metadata["target_t60"] = std::to_string(jobs[i].target_t60);
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    });

    Manifest ok;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (errors[i].empty()) {
            ok.entries.push_back(out_manifest.entries[i]);
        } else {
            ++failed;
            std::cerr << "simulate-ir: " << jobs[i].spec.id << ": " << errors[i] << "\n";
        }
    }
    if (!manifest_out.empty()) save_manifest(ok, manifest_out);
    std::cerr << "simulate-ir: " << ok.size() << " simulated, " << failed << " failed\n";
    return (ok.entries.empty() && failed > 0) ? 1 : 0;
}

int cmd_compensate(const std::string& manifest_path, const std::string& model_path,
                   const std::string& out_dir, const std::string& report_path,
                   std::uint64_t seed, int workers) {
    const Manifest m = load_manifest(manifest_path);
    const EqGmm model = load_model(model_path);
    const BatchReport report = batch_compensate(m, model, out_dir, seed, workers);
    if (!report_path.empty()) save_report(report, report_path);
    std::cerr << "compensate: " << (report.records.size() - report.failures)
              << " compensated, " << report.failures << " failed\n";
    return (report.failures == report.records.size() && !report.records.empty()) ? 1 : 0;
}

int cmd_augment(const std::string& speech_path, const std::string& irs_path,
                const std::string& noises_path, const std::string& out_dir,
                const std::string& manifest_out, double snr_min, double snr_max,
                int point_noises, std::uint64_t seed, int workers) {
    const Manifest speech = load_manifest(speech_path);
    const Manifest irs = load_manifest(irs_path);
    Manifest noises;
    if (!noises_path.empty()) noises = load_manifest(noises_path);
    AugmentConfig config;
    config.snr_min_db = snr_min;
    config.snr_max_db = snr_max;
    config.point_noises = point_noises;
    const AugmentBatchReport report =
        build_augmented_dataset(speech, irs, noises, config, out_dir, seed, workers);
    if (!manifest_out.empty()) save_report(report, manifest_out);
    std::cerr << "augment: " << (report.records.size() - report.failures)
              << " augmented, " << report.failures << " failed\n";
    return (report.failures == report.records.size() && !report.records.empty()) ? 1 : 0;
}

int cmd_split(const std::string& manifest_path, const std::string& counts_csv,
              const std::string& prefix, std::uint64_t seed) {
    const Manifest m = load_manifest(manifest_path);
    std::array<std::size_t, 3> counts{};
    std::stringstream ss(counts_csv);
    std::string field;
    for (int i = 0; i < 3; ++i) {
        if (!std::getline(ss, field, ',')) {
            throw Error("expected 3 comma-separated counts, got: " + counts_csv);
        }
        counts[i] = std::stoull(field);
    }
    auto [a, b, c] = split_manifest(m, counts[0], counts[1], counts[2], seed);
    save_manifest(a, prefix + ".train.jsonl");
    save_manifest(b, prefix + ".dev.jsonl");
    save_manifest(c, prefix + ".test.jsonl");
    std::cerr << "split: " << a.size() << "/" << b.size() << "/" << c.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Room-EQ toolkit: analyze recorded IRs, model their sub-band EQ, "
                 "compensate simulated IRs, and build far-field speech datasets"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int workers = 0;
    app.add_option("--seed", seed, "master seed; every random choice derives from it")
        ->capture_default_str();
    app.add_option("--workers", workers, "worker threads (0 = hardware parallelism)")
        ->capture_default_str();

    std::string in_manifest, output, model_path, out_dir, report_path;
    std::string speech_path, irs_path, noises_path, gains_csv, counts_csv, prefix;
    int k = 7;
    std::size_t count = 1000;
    double t60_min = 0.2, t60_max = 2.0, max_length = 0.0;
    double snr_min = 5.0, snr_max = 25.0;
    int point_noises = 0;

    auto* analyze = app.add_subcommand("analyze-eq", "IR manifest -> sub-band EQ table");
    analyze->add_option("--manifest", in_manifest)->required();
    analyze->add_option("--output", output)->required();

    auto* fit = app.add_subcommand("fit-gmm", "EQ table -> GMM model file");
    fit->add_option("--input", in_manifest)->required();
    fit->add_option("--output", output)->required();
    fit->add_option("--k", k, "mixture components")->capture_default_str();

    auto* sample = app.add_subcommand("sample-eq", "model -> table of EQ draws");
    sample->add_option("--model", model_path)->required();
    sample->add_option("--output", output)->required();
    sample->add_option("--count", count)->capture_default_str();

    auto* design = app.add_subcommand("design-filter", "8 gains -> 511-tap dump");
    design->add_option("--gains", gains_csv, "8 comma-separated dB gains")->required();
    design->add_option("--output", output)->required();

    auto* simulate = app.add_subcommand("simulate-ir", "room specs -> IR files");
    simulate->add_option("--rooms", in_manifest, "JSONL room records")->required();
    simulate->add_option("--out-dir", out_dir)->required();
    simulate->add_option("--manifest-out", output);
    simulate->add_option("--t60-min", t60_min)->capture_default_str();
    simulate->add_option("--t60-max", t60_max)->capture_default_str();
    simulate->add_option("--max-length", max_length, "IR length in seconds (0 = auto)");

    auto* comp = app.add_subcommand("compensate", "IR manifest + model -> compensated IRs");
    comp->add_option("--manifest", in_manifest)->required();
    comp->add_option("--model", model_path)->required();
    comp->add_option("--out-dir", out_dir)->required();
    comp->add_option("--report", report_path);

    auto* aug = app.add_subcommand("augment", "manifests -> far-field dataset");
    aug->add_option("--speech", speech_path)->required();
    aug->add_option("--irs", irs_path)->required();
    aug->add_option("--noises", noises_path);
    aug->add_option("--out-dir", out_dir)->required();
    aug->add_option("--manifest-out", output);
    aug->add_option("--snr-min", snr_min)->capture_default_str();
    aug->add_option("--snr-max", snr_max)->capture_default_str();
    aug->add_option("--point-noises", point_noises,
                    "noises rendered as point sources through an extra IR")
        ->capture_default_str();

    auto* split = app.add_subcommand("split", "manifest -> three disjoint manifests");
    split->add_option("--manifest", in_manifest)->required();
    split->add_option("--counts", counts_csv, "train,dev,test sizes")->required();
    split->add_option("--output-prefix", prefix)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (analyze->parsed()) return cmd_analyze_eq(in_manifest, output, workers);
        if (fit->parsed()) return cmd_fit_gmm(in_manifest, output, k, seed);
        if (sample->parsed()) return cmd_sample_eq(model_path, output, count, seed);
        if (design->parsed()) return cmd_design_filter(gains_csv, output);
        if (simulate->parsed()) {
            return cmd_simulate_ir(in_manifest, out_dir, output, t60_min, t60_max,
                                   max_length, seed, workers);
        }
        if (comp->parsed()) {
            return cmd_compensate(in_manifest, model_path, out_dir, report_path, seed,
                                  workers);
        }
        if (aug->parsed()) {
            return cmd_augment(speech_path, irs_path, noises_path, out_dir, output,
                               snr_min, snr_max, point_noises, seed, workers);
        }
        if (split->parsed()) return cmd_split(in_manifest, counts_csv, prefix, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
