"""Room-EQ toolkit.

Sub-band EQ analysis of room impulse responses, a generative Gaussian-mixture
model of real-world equalization, linear-phase compensation filters, shoebox
IR simulation, and aligned far-field speech augmentation. The heavy lifting
lives in the C++ extension module; this package re-exports its surface.
"""

from roomeq._core import (  # noqa: F401
    FIR_TAPS,
    PIPELINE_RATE,
    SUBBAND_FREQS_HZ,
    EqGmm,
    RoomEqError,
    absorption_for_t60,
    align_convolved,
    apply_fir,
    augment,
    compensate_ir,
    convolve,
    derive_seed,
    design_filter,
    detect_direct_path,
    estimate_t60,
    fit_gmm,
    load_gmm,
    mix_at_snr,
    read_wav,
    resample,
    simulate_ir,
    spectrum_db,
    subband_eq,
    write_wav,
)

__all__ = [
    "FIR_TAPS",
    "PIPELINE_RATE",
    "SUBBAND_FREQS_HZ",
    "EqGmm",
    "RoomEqError",
    "absorption_for_t60",
    "align_convolved",
    "apply_fir",
    "augment",
    "compensate_ir",
    "convolve",
    "derive_seed",
    "design_filter",
    "detect_direct_path",
    "estimate_t60",
    "fit_gmm",
    "load_gmm",
    "mix_at_snr",
    "read_wav",
    "resample",
    "simulate_ir",
    "spectrum_db",
    "subband_eq",
    "write_wav",
]

__version__ = "0.1.0"
