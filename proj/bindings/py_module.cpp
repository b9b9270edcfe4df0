#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "roomeq/audio.hpp"
#include "roomeq/augment.hpp"
#include "roomeq/common.hpp"
#include "roomeq/compensate.hpp"
#include "roomeq/eq_gmm.hpp"
#include "roomeq/fir.hpp"
#include "roomeq/manifest.hpp"
#include "roomeq/rng.hpp"
#include "roomeq/room.hpp"
#include "roomeq/spectral.hpp"

namespace py = pybind11;
using namespace roomeq;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style |
                                                            py::array::forcecast>& a) {
    if (a.ndim() != 1) throw Error("expected a 1-d array");
    return std::vector<double>(a.data(), a.data() + a.shape(0));
}

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>({static_cast<py::ssize_t>(v.size())}, v.data());
}

template <std::size_t N>
py::array_t<double> to_array(const std::array<double, N>& v) {
    return py::array_t<double>({static_cast<py::ssize_t>(N)}, v.data());
}

ImpulseResponse ir_from(const py::array_t<double, py::array::c_style |
                                                      py::array::forcecast>& a,
                        const std::string& id) {
    ImpulseResponse ir;
    ir.id = id;
    ir.buffer.sample_rate = kPipelineRate;
    ir.buffer.samples = to_vector(a);
    return ir;
}

std::array<double, 8> gains_from(const py::array_t<double, py::array::c_style |
                                                               py::array::forcecast>& a) {
    if (a.ndim() != 1 || a.shape(0) != 8) throw Error("expected 8 gains");
    std::array<double, 8> g{};
    std::copy(a.data(), a.data() + 8, g.begin());
    return g;
}

FirFilter filter_from_taps(const py::array_t<double, py::array::c_style |
                                                         py::array::forcecast>& taps) {
    if (taps.ndim() != 1 || taps.shape(0) != kFirTaps) {
        throw Error("expected 511 taps");
    }
    FirFilter f;
    f.taps.assign(taps.data(), taps.data() + kFirTaps);
    return f;
}

py::dict record_to_dict(const CompensationRecord& rec) {
    py::dict d;
    d["ir_id"] = rec.ir_id;
    d["original_eq"] = to_array(rec.original_eq.gains_db);
    d["target_eq"] = to_array(rec.target_eq.gains_db);
    d["gain_diff"] = to_array(rec.gain_diff);
    d["achieved_eq"] = to_array(rec.achieved_eq.gains_db);
    d["seed"] = rec.seed;
    d["clamped"] = rec.clamped;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Room-EQ toolkit: sub-band EQ analysis of impulse responses, a "
              "generative EQ model, linear-phase compensation filters, shoebox "
              "IR simulation, and far-field speech augmentation.";

    py::register_exception<Error>(m, "RoomEqError");

    m.attr("PIPELINE_RATE") = kPipelineRate;
    m.attr("SUBBAND_FREQS_HZ") = to_array(kSubBandFreqsHz);
    m.attr("FIR_TAPS") = kFirTaps;

    // --- audio io ----------------------------------------------------------
    m.def(
        "read_wav",
        [](const std::string& path) {
            const AudioBuffer buf = read_audio(path);
            return py::make_tuple(to_array(buf.samples), buf.sample_rate);
        },
        py::arg("path"),
        "Read a RIFF/WAVE file (PCM16 or float32) as (mono samples, rate).");
    m.def(
        "write_wav",
        [](const std::string& path, const py::array_t<double>& samples, int rate,
           const std::string& format) {
            AudioBuffer buf;
            buf.sample_rate = rate;
            buf.samples = to_vector(samples);
            const WavFormat fmt = format == "pcm16" ? WavFormat::Pcm16
                                                    : WavFormat::Float32;
            if (format != "pcm16" && format != "float32") {
                throw Error("format must be 'pcm16' or 'float32'");
            }
            return write_audio(path, buf, fmt).clipped;
        },
        py::arg("path"), py::arg("samples"), py::arg("rate") = kPipelineRate,
        py::arg("format") = "float32",
        "Write mono samples; returns the number of clipped samples.");
    m.def(
        "resample",
        [](const py::array_t<double>& samples, int source_rate, int target_rate) {
            AudioBuffer buf;
            buf.sample_rate = source_rate;
            buf.samples = to_vector(samples);
            return to_array(resample(buf, target_rate).samples);
        },
        py::arg("samples"), py::arg("source_rate"), py::arg("target_rate"));

    // --- spectral ----------------------------------------------------------
    m.def(
        "spectrum_db",
        [](const py::array_t<double>& ir) {
            const SpectrumDb s = magnitude_response_db(to_vector(ir), kPipelineRate);
            return to_array(s.gains_db);
        },
        py::arg("ir"),
        "One-sided magnitude response in dB (257 bins, 31.25 Hz spacing).");
    m.def(
        "subband_eq",
        [](const py::array_t<double>& ir) {
            return to_array(extract_subband_eq(to_vector(ir), kPipelineRate).gains_db);
        },
        py::arg("ir"), "8 sub-band EQ gains in dB, referenced to 1 kHz.");
    m.def(
        "estimate_t60",
        [](const py::array_t<double>& ir) {
            return estimate_t60(to_vector(ir), kPipelineRate);
        },
        py::arg("ir"), "Reverberation time from the Schroeder decay curve.");

    // --- filters -----------------------------------------------------------
    m.def(
        "design_filter",
        [](const py::array_t<double>& gains) {
            return to_array(design_eq_filter(gains_from(gains)).taps);
        },
        py::arg("gains_db"),
        "511-tap linear-phase filter realizing the 8 requested sub-band gains.");
    m.def(
        "apply_fir",
        [](const py::array_t<double>& signal, const py::array_t<double>& taps,
           bool trim_delay) {
            AudioBuffer buf;
            buf.sample_rate = kPipelineRate;
            buf.samples = to_vector(signal);
            return to_array(apply_fir(buf, filter_from_taps(taps), trim_delay).samples);
        },
        py::arg("signal"), py::arg("taps"), py::arg("trim_delay") = true);
    m.def(
        "convolve",
        [](const py::array_t<double>& a, const py::array_t<double>& b) {
            return to_array(convolve(to_vector(a), to_vector(b)));
        },
        py::arg("a"), py::arg("b"), "Full linear convolution.");

    // --- room simulation -----------------------------------------------------
    m.def(
        "absorption_for_t60",
        [](const std::array<double, 3>& dims, double target_t60) {
            return absorption_for_t60(dims, target_t60);
        },
        py::arg("dims"), py::arg("target_t60"));
    m.def(
        "simulate_ir",
        [](const std::array<double, 3>& dims, const std::array<double, 3>& source,
           const std::array<double, 3>& mic, double target_t60, double max_length,
           const std::string& id) {
            RoomSpec spec;
            spec.dims = dims;
            spec.source = source;
            spec.mic = mic;
            spec.id = id;
            return to_array(simulate_shoebox_ir(spec, target_t60, max_length)
                                .buffer.samples);
        },
        py::arg("dims"), py::arg("source"), py::arg("mic"), py::arg("target_t60"),
        py::arg("max_length"), py::arg("id") = "room",
        "Image-method shoebox IR at 16 kHz, absorption targeted at the T60.");

    // --- generative EQ model -------------------------------------------------
    py::class_<EqGmm>(m, "EqGmm")
        .def_property_readonly("k", &EqGmm::components)
        .def_property_readonly("weights",
                               [](const EqGmm& g) { return to_array(g.weights()); })
        .def_property_readonly("training_log_likelihood",
                               [](const EqGmm& g) {
                                   return to_array(g.training_log_likelihood());
                               })
        .def("marginal_mean",
             [](const EqGmm& g) {
                 const Eigen::VectorXd v = g.marginal_mean();
                 return to_array(std::vector<double>(v.data(), v.data() + v.size()));
             })
        .def("marginal_stddev",
             [](const EqGmm& g) {
                 const Eigen::VectorXd v = g.marginal_stddev();
                 return to_array(std::vector<double>(v.data(), v.data() + v.size()));
             })
        .def("log_likelihood",
             [](const EqGmm& g, const py::array_t<double>& eq8) {
                 SubBandEq eq;
                 eq.gains_db = gains_from(eq8);
                 return log_likelihood(g, eq);
             })
        .def("sample",
             [](const EqGmm& g, std::size_t count, std::uint64_t seed) {
                 Rng rng(seed);
                 py::array_t<double> out({count, static_cast<std::size_t>(8)});
                 auto view = out.mutable_unchecked<2>();
                 for (std::size_t i = 0; i < count; ++i) {
                     const SubBandEq eq = sample_eq(g, rng);
                     for (int b = 0; b < 8; ++b) view(i, b) = eq.gains_db[b];
                 }
                 return out;
             },
             py::arg("count"), py::arg("seed"),
             "Draw sub-band EQ vectors (count x 8, seeded).")
        .def("save", &save_model, py::arg("path"));

    m.def(
        "fit_gmm",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data,
           int k, std::uint64_t seed) {
            if (data.ndim() != 2 || data.shape(1) != 8) {
                throw Error("fit_gmm expects an (n, 8) array of sub-band EQ gains");
            }
            const auto view = data.unchecked<2>();
            std::vector<SubBandEq> eqs(static_cast<std::size_t>(data.shape(0)));
            for (py::ssize_t i = 0; i < data.shape(0); ++i) {
                for (int b = 0; b < 8; ++b) eqs[i].gains_db[b] = view(i, b);
            }
            return fit_gmm(eqs, k, seed);
        },
        py::arg("eq_table"), py::arg("k") = 7, py::arg("seed") = 0,
        "Fit the mixture on an (n, 8) table of sub-band EQ gains.");
    m.def("load_gmm", &load_model, py::arg("path"));

    // --- compensation --------------------------------------------------------
    m.def(
        "compensate_ir",
        [](const py::array_t<double>& ir, const EqGmm& model, std::uint64_t seed,
           const std::string& id) {
            const auto [out, rec] = compensate_ir(ir_from(ir, id), model, seed);
            return py::make_tuple(to_array(out.buffer.samples), record_to_dict(rec));
        },
        py::arg("ir"), py::arg("model"), py::arg("seed"), py::arg("id") = "ir",
        "EQ-compensate one IR; returns (samples, record).");

    // --- augmentation --------------------------------------------------------
    m.def(
        "detect_direct_path",
        [](const py::array_t<double>& ir) {
            return detect_direct_path(ir_from(ir, "ir"));
        },
        py::arg("ir"));
    m.def(
        "align_convolved",
        [](std::size_t speech_len, const py::array_t<double>& convolved,
           std::size_t direct_idx) {
            AudioBuffer buf;
            buf.sample_rate = kPipelineRate;
            buf.samples = to_vector(convolved);
            return to_array(align_convolved(speech_len, buf, direct_idx).samples);
        },
        py::arg("speech_len"), py::arg("convolved"), py::arg("direct_idx"));
    m.def(
        "mix_at_snr",
        [](const py::array_t<double>& signal, const py::array_t<double>& noise,
           double snr_db) {
            AudioBuffer s, n;
            s.sample_rate = n.sample_rate = kPipelineRate;
            s.samples = to_vector(signal);
            n.samples = to_vector(noise);
            return to_array(mix_at_snr(s, n, snr_db).samples);
        },
        py::arg("signal"), py::arg("noise"), py::arg("snr_db"));
    m.def(
        "augment",
        [](const py::array_t<double>& speech, const py::array_t<double>& ir,
           const py::object& noise, double snr_db, std::uint64_t seed) {
            AugmentationSpec spec;
            spec.speech.sample_rate = kPipelineRate;
            spec.speech.samples = to_vector(speech);
            spec.speech_ir = ir_from(ir, "ir");
            if (!noise.is_none()) {
                AudioBuffer amb;
                amb.sample_rate = kPipelineRate;
                amb.samples = to_vector(noise.cast<py::array_t<double>>());
                spec.ambient = std::move(amb);
            }
            spec.snr_db = snr_db;
            spec.seed = seed;
            const AugmentResult res = augment_utterance(spec);
            py::dict info;
            info["scale"] = res.scale;
            info["noise_gain"] = res.noise_gain;
            info["noiseless"] = res.noiseless;
            return py::make_tuple(to_array(res.output.samples), info);
        },
        py::arg("speech"), py::arg("ir"), py::arg("noise") = py::none(),
        py::arg("snr_db") = 20.0, py::arg("seed") = 0,
        "Far-field augmentation of one utterance (aligned, noise at the "
        "requested SNR); output length equals the input length.");

    m.def("derive_seed",
          [](std::uint64_t master, const std::string& id) {
              return derive_seed(master, id);
          },
          py::arg("master"), py::arg("id"),
          "Per-item seed used by the batch pipelines.");
}
