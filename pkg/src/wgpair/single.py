"""Single-photon emission from the one-excitation sector."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import (
    CHANNELS,
    EG,
    GE,
    GG,
    PSI_MINUS,
    PSI_PLUS,
    Channel,
    SystemParams,
    derive_rates,
    in_single_excitation_span,
    jump_operator,
    kraus,
    named_state,
)
from .expsum import ExpSum, truncated_l2_inner

# p_right below this fraction of the emitted weight counts as exact zero
DIVERGENCE_FLOOR = 1e-12

R1States = Literal["psi_L", "psi_R", "eg", "ge"]


@dataclass(frozen=True)
class PhotonWaveform:
    """Emitted one-photon amplitude ``f(t)`` in one channel, for ``t >= 0``."""

    channel: Channel
    amplitude: ExpSum
    source_state: np.ndarray

    def __call__(self, t):
        return self.amplitude(t)

    def sample(self, times) -> np.ndarray:
        return self.amplitude(np.asarray(times, dtype=float))


@dataclass(frozen=True)
class DirectionalityResult:
    p_left: float
    p_right: float
    ratio: float
    divergent: bool

    @classmethod
    def from_probabilities(cls, p_left: float, p_right: float) -> "DirectionalityResult":
        total = p_left + p_right
        if total > 0 and p_right > DIVERGENCE_FLOOR * total:
            return cls(p_left, p_right, p_left / p_right, False)
        if p_left > 0:
            return cls(p_left, p_right, math.inf, True)
        return cls(p_left, p_right, math.nan, False)


def _check_single(initial: np.ndarray) -> np.ndarray:
    initial = np.asarray(initial, dtype=complex)
    if not in_single_excitation_span(initial):
        raise ValueError("initial state must lie in the single-excitation span {eg, ge}")
    norm = np.vdot(initial, initial).real
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"initial state must be normalized, got norm^2 = {norm}")
    return initial


def survival_amplitudes(params: SystemParams, initial: np.ndarray, t: float) -> tuple[complex, complex]:
    initial = _check_single(initial)
    out = kraus(params, t) @ initial
    return complex(out[EG]), complex(out[GE])


def photon_waveform(params: SystemParams, initial: np.ndarray, channel: Channel) -> PhotonWaveform:
    """``f(s) = <gg| J_channel K(s) |initial>`` as an exponential sum.

    ``K(s)`` is diagonal on the symmetric/antisymmetric Bell states, so the
    amplitude has one term per Bell component with rate ``mu_pm / 2``.
    """
    initial = _check_single(initial)
    unit = params.dimensionless()
    rates = derive_rates(unit)
    jump = jump_operator(channel, unit)
    terms = []
    for bell, mu in ((PSI_PLUS, rates.mu_plus), (PSI_MINUS, rates.mu_minus)):
        weight = np.vdot(bell, initial) * (jump @ bell)[GG]
        terms.append((weight, 0.5 * mu))
    amp = ExpSum.from_terms(terms).rescaled(params.gamma, math.sqrt(params.gamma))
    return PhotonWaveform(channel, amp, initial)


def phi_waveform_closed_form(params: SystemParams, sign: int, channel: Channel) -> ExpSum:
    """Explicit amplitudes for initial ``phi_pm = (|eg> +- i|ge>)/sqrt(2)``.

    Written out independently of :func:`photon_waveform`; used to cross-check it.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    th = params.theta
    r = derive_rates(params)
    s, c = math.sin(th / 2), math.cos(th / 2)
    amp = math.sqrt(params.gamma / 2) * np.exp(-sign * 1j * math.pi / 4)
    if channel == "R":
        pre = amp * np.exp(-0.5j * th)
        terms = [(pre * s, 0.5 * r.mu_minus), (pre * sign * c, 0.5 * r.mu_plus)]
    elif channel == "L":
        pre = -amp * np.exp(0.5j * th)
        terms = [(pre * s, 0.5 * r.mu_minus), (-pre * sign * c, 0.5 * r.mu_plus)]
    else:
        raise ValueError(f"unknown channel {channel!r}")
    return ExpSum.from_terms(terms)


def waveform_by_composition(params: SystemParams, initial: np.ndarray, channel: Channel, s) -> np.ndarray:
    """Pointwise ``<gg| J K(s) |initial>`` from the 4x4 matrices."""
    jump = jump_operator(channel, params)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.array([(jump @ kraus(params, x) @ initial)[GG] for x in s])


def emitted_probability(waveform: PhotonWaveform, horizon: float = math.inf) -> float:
    """``int_0^T |f|^2``; non-decaying terms carry no emission and are dropped."""
    decaying, _ = waveform.amplitude.split_stable()
    if math.isinf(horizon):
        return decaying.norm2()
    return float(truncated_l2_inner(decaying, decaying, horizon).real)


def emission_probabilities(
    params: SystemParams, initial: np.ndarray, horizon: float = math.inf
) -> DirectionalityResult:
    p = {ch: emitted_probability(photon_waveform(params, initial, ch), horizon) for ch in CHANNELS}
    return DirectionalityResult.from_probabilities(p["L"], p["R"])


def _r1_psi_l(params: SystemParams) -> DirectionalityResult:
    s = math.sin(params.theta)
    base = 1.0 + (params.g_c - s) ** 2
    num, den = base + s * s, base - s * s
    return DirectionalityResult.from_probabilities(num / (num + den), den / (num + den))


def _r1_eg(params: SystemParams) -> DirectionalityResult:
    s, c, g = math.sin(params.theta), math.cos(params.theta), params.g_c
    r = 3.0 - 2.0 * (g * g + c * c) / (1.0 + g * (g - s))
    return DirectionalityResult.from_probabilities(r / (1.0 + r), 1.0 / (1.0 + r))


def _swap(res: DirectionalityResult) -> DirectionalityResult:
    return DirectionalityResult.from_probabilities(res.p_right, res.p_left)


def r1_result(params: SystemParams, which: R1States, method: str = "closed") -> DirectionalityResult:
    """Left/right emission ratio for one of the reference initial states.

    ``method="closed"`` evaluates the analytic ratio formulas (with the
    ``psi_R`` and ``ge`` values as reciprocals under qubit exchange);
    ``method="integral"`` integrates the emitted waveforms.
    """
    if which not in ("psi_L", "psi_R", "eg", "ge"):
        raise ValueError(f"unknown state {which!r}")
    if method == "integral":
        return emission_probabilities(params, named_state(which, params))
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    if which == "psi_L":
        return _r1_psi_l(params)
    if which == "psi_R":
        return _swap(_r1_psi_l(params))
    if which == "eg":
        return _r1_eg(params)
    return _swap(_r1_eg(params))


def r1(params: SystemParams, which: R1States, method: str = "closed") -> float:
    return r1_result(params, which, method).ratio
