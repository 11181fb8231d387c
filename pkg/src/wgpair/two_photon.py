"""Two-photon decay of the doubly excited state ``|ee>``.

Kernels live on the time-ordered wedge ``t1 <= t2`` and factorize as
``prefactor * exp(-gamma t1) * relative(t2 - t1)``, so every wedge integral
splits into a trivial ``t1`` integral times an :class:`ExpSum` inner
product in the delay.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    EE,
    GG,
    SystemParams,
    classify_condition,
    derive_rates,
    jump_operator,
    kraus,
    DEFAULT_TOL,
)
from .expsum import ExpSum, NonIntegrableError, wedge_integral

PAIRS = ("RR", "LL", "RL", "LR")
# relative coefficient size below which a non-decaying term is treated as absent
STABLE_COEFF_TOL = 1e-12
FULL_DECAY_TOL = 1e-9


@dataclass(frozen=True)
class TwoPhotonKernel:
    """``lambda(t1, t2)`` for photons emitted into ``pair[0]`` at ``t1`` then ``pair[1]`` at ``t2``."""

    pair: str
    prefactor: complex
    first_rate: float
    relative: ExpSum

    def __call__(self, t1, t2):
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        delta = t2 - t1
        val = self.prefactor * np.exp(-self.first_rate * t1) * self.relative(np.maximum(delta, 0.0))
        return np.where(delta >= 0, val, 0.0)


def two_photon_kernel(params: SystemParams, pair: str, printed_phases: bool = False) -> TwoPhotonKernel:
    """Closed-form kernel for one ordered channel pair.

    The parallel kernels carry ``exp(-i theta)`` (RR) and ``exp(+i theta)`` (LL),
    which is what composing the jump operators produces. ``printed_phases=True``
    swaps them (the commonly quoted assignment); magnitudes are unaffected.
    """
    if pair not in PAIRS:
        raise ValueError(f"unknown channel pair {pair!r}")
    th, g = params.theta, params.gamma
    r = derive_rates(params)
    cos2 = math.cos(th / 2) ** 2
    sin2 = math.sin(th / 2) ** 2
    if pair in ("RR", "LL"):
        sign = -1.0 if pair == "RR" else 1.0
        if printed_phases:
            sign = -sign
        prefactor = -g * complex(math.cos(th), sign * math.sin(th))
        relative = ExpSum.from_terms([(sin2, 0.5 * r.mu_minus), (cos2, 0.5 * r.mu_plus)])
    else:
        prefactor = complex(g)
        relative = ExpSum.from_terms([(sin2, 0.5 * r.mu_minus), (-cos2, 0.5 * r.mu_plus)])
    return TwoPhotonKernel(pair, prefactor, g, relative)


def kernel_by_composition(params: SystemParams, pair: str, t1, t2) -> np.ndarray:
    """Pointwise ``<gg| K(t-t2) J_m K(t2-t1) J_l K(t1) |ee>`` from the operator matrices."""
    if pair not in PAIRS:
        raise ValueError(f"unknown channel pair {pair!r}")
    first = jump_operator(pair[0], params)
    second = jump_operator(pair[1], params)
    t1 = np.atleast_1d(np.asarray(t1, dtype=float))
    t2 = np.atleast_1d(np.asarray(t2, dtype=float))
    out = np.zeros(np.broadcast(t1, t2).shape, dtype=complex)
    for idx, (a, b) in enumerate(np.broadcast(t1, t2)):
        if b < a:
            continue
        # K on |gg> is the identity, so the final propagation to any t >= t2 drops out
        vec = second @ kraus(params, b - a) @ first @ kraus(params, a)[:, EE]
        out.flat[idx] = vec[GG]
    return out


def pair_probability(kernel: TwoPhotonKernel) -> float:
    """Wedge integral of ``|lambda|^2`` over ``0 <= t1 <= t2 < inf``."""
    rel = kernel.relative
    scale = max((abs(c) for c in rel.coefficients), default=0.0)
    decaying, stable = rel.split_stable()
    if any(abs(c) > STABLE_COEFF_TOL * scale for c in stable.coefficients):
        raise NonIntegrableError(f"kernel {kernel.pair} has a non-decaying component")
    return abs(kernel.prefactor) ** 2 / (2.0 * kernel.first_rate) * decaying.norm2()


def r2_printed(params: SystemParams) -> float:
    """Commonly quoted closed-form bunching ratio, kept for comparison.

    It is >= 1 everywhere, so it cannot be antiparallel/parallel as defined here.
    """
    s = math.sin(params.theta)
    base = (2.0 - s * s) * (1.0 + (s - params.g_c) ** 2)
    num, den = base + s ** 4, base - s ** 4
    if den == 0.0:
        return math.inf
    return num / den


@dataclass(frozen=True)
class BunchingReport:
    pair_probabilities: dict[str, float]
    p_parallel: float
    p_antiparallel: float
    r2_oracle: float
    r2_printed: float
    full_decay: bool


def bunching_report(params: SystemParams) -> BunchingReport:
    """Parallel vs antiparallel two-photon emission probabilities from ``|ee>``.

    ``r2_oracle`` is integrated from the kernels; ``r2_printed`` is the
    quoted closed form, kept alongside because the two disagree. When the
    four probabilities do not sum to one (part of the excitation is trapped)
    the ratio is omitted (nan). At a resonance ``|ee>`` only feeds the bright
    Bell state, so decay is still complete there.
    """
    probs = {p: pair_probability(two_photon_kernel(params, p)) for p in PAIRS}
    par = probs["RR"] + probs["LL"]
    anti = probs["RL"] + probs["LR"]
    full = abs(par + anti - 1.0) <= FULL_DECAY_TOL
    ratio = anti / par if full and par > 0 else math.nan
    return BunchingReport(probs, par, anti, ratio, r2_printed(params), full)


@dataclass(frozen=True)
class OutputMode:
    """Normalized temporal mode ``c = int conj(envelope(t)) b_channel(t) dt``."""

    channel: str
    envelope: ExpSum

    def __post_init__(self):
        if self.channel not in ("R", "L"):
            raise ValueError(f"unknown channel {self.channel!r}")
        norm = self.envelope.norm2()
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"mode envelope must have unit L2 norm, got {norm}")

    @classmethod
    def exponential(cls, channel: str, gamma: float = 1.0) -> "OutputMode":
        return cls(channel, ExpSum.from_terms([(math.sqrt(gamma), gamma / 2.0)]))


@dataclass(frozen=True)
class NoonOverlap:
    """Projections of the evolved state onto ``<gg|<2_R 0_L|`` and ``<gg|<0_R 2_L|``."""

    branch_r: complex
    branch_l: complex
    t: float

    @property
    def fidelity(self) -> float:
        return abs((self.branch_r - self.branch_l) / math.sqrt(2.0)) ** 2


def _mode_wedge(kernel: TwoPhotonKernel, mode: OutputMode, t: float) -> complex:
    total = 0j
    for c, z in kernel.relative.terms:
        for d1, w1 in mode.envelope.terms:
            for d2, w2 in mode.envelope.terms:
                a = kernel.first_rate - z + w1.conjugate()
                b = z + w2.conjugate()
                total += c * (d1 * d2).conjugate() * wedge_integral(a, b, t)
    return kernel.prefactor * total


def noon_overlap(
    params: SystemParams,
    t: float,
    modes: tuple[OutputMode, OutputMode] | None = None,
) -> NoonOverlap:
    """Overlap with the two-photon Fock states of the given output modes at time ``t``.

    ``<0| c c b^dag(t1) b^dag(t2) |0> = 2 u*(t1) u*(t2)`` on the wedge, which with
    the ``1/sqrt(2)`` of ``|2>`` leaves an overall ``sqrt(2)``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if modes is None:
        modes = (OutputMode.exponential("R", params.gamma), OutputMode.exponential("L", params.gamma))
    mode_r, mode_l = modes
    if (mode_r.channel, mode_l.channel) != ("R", "L"):
        raise ValueError("modes must be given as (R mode, L mode)")
    if t == 0:
        return NoonOverlap(0j, 0j, 0.0)
    br = math.sqrt(2.0) * _mode_wedge(two_photon_kernel(params, "RR"), mode_r, t)
    bl = math.sqrt(2.0) * _mode_wedge(two_photon_kernel(params, "LL"), mode_l, t)
    return NoonOverlap(complex(br), complex(bl), t)


def noon_fidelity(params: SystemParams, t: float, force: bool = False, tol: float = DEFAULT_TOL) -> float:
    """Fidelity of the evolved state with ``|gg> (|2_R 0_L> - |0_R 2_L>)/sqrt(2)``."""
    cond = classify_condition(params, tol)
    if cond.kind != "controlled_antiresonance" and not force:
        raise ValueError(f"N00N fidelity requires a controlled antiresonance, got {cond}")
    return noon_overlap(params, t).fidelity
