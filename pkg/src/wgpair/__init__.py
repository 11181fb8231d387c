"""Two qubits coupled to a waveguide: directional emission, photon bunching and heralding."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    SystemParams,
    classify_condition,
    derive_rates,
    jump_operator,
    kraus,
    named_state,
)
from .expsum import ExpSum  # noqa: E402
from .single import emission_probabilities, photon_waveform, r1, r1_result, survival_amplitudes  # noqa: E402
from .two_photon import bunching_report, noon_fidelity, noon_overlap, two_photon_kernel  # noqa: E402

__all__ = [
    "ExpSum",
    "SystemParams",
    "bunching_report",
    "classify_condition",
    "derive_rates",
    "emission_probabilities",
    "jump_operator",
    "kraus",
    "named_state",
    "noon_fidelity",
    "noon_overlap",
    "photon_waveform",
    "r1",
    "r1_result",
    "survival_amplitudes",
    "two_photon_kernel",
]
