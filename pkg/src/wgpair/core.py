"""Parameters, operators and Bell states of a qubit pair in a bidirectional waveguide.

Basis ordering is fixed as ``ee, eg, ge, gg`` (indices 0..3); ``sigma_1``
lowers the first letter, ``sigma_2`` the second. Operators are plain
``(4, 4)`` complex arrays, qubit states ``(4,)`` complex arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

EE, EG, GE, GG = 0, 1, 2, 3
BASIS_LABELS = ("ee", "eg", "ge", "gg")
CHANNELS = ("R", "L")
DEFAULT_TOL = 1e-9

Channel = Literal["R", "L"]

SIGMA_1 = np.zeros((4, 4), dtype=complex)
SIGMA_1[GE, EE] = 1.0
SIGMA_1[GG, EG] = 1.0
SIGMA_2 = np.zeros((4, 4), dtype=complex)
SIGMA_2[EG, EE] = 1.0
SIGMA_2[GG, GE] = 1.0
EXCHANGE = SIGMA_1.conj().T @ SIGMA_2 + SIGMA_1 @ SIGMA_2.conj().T
EXCITATIONS = np.array([2, 1, 1, 0])


@dataclass(frozen=True)
class SystemParams:
    """Physical configuration.

    ``gamma`` is the single-qubit decay rate, ``theta`` the propagation
    phase ``omega_0 * tau`` in radians and ``g_c`` the dimensionless
    cancellation-coupling strength.
    """

    theta: float
    g_c: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise ValueError(f"theta must be finite and >= 0, got {self.theta}")
        if not math.isfinite(self.g_c):
            raise ValueError(f"g_c must be finite, got {self.g_c}")

    @classmethod
    def controlled_antiresonance(cls, n: int = 0, gamma: float = 1.0) -> "SystemParams":
        return cls(theta=(n + 0.5) * math.pi, g_c=(-1.0) ** n, gamma=gamma)

    def dimensionless(self) -> "SystemParams":
        return SystemParams(self.theta, self.g_c, 1.0)


@dataclass(frozen=True)
class Rates:
    gamma_plus: float
    gamma_minus: float
    delta: float

    @property
    def mu_plus(self) -> complex:
        return complex(self.gamma_plus, self.delta)

    @property
    def mu_minus(self) -> complex:
        return complex(self.gamma_minus, -self.delta)


def derive_rates(params: SystemParams) -> Rates:
    """Collective decay rates of the symmetric/antisymmetric Bell states and their splitting."""
    c = math.cos(params.theta)
    g = params.gamma
    return Rates(
        gamma_plus=g * (1.0 + c),
        gamma_minus=g * (1.0 - c),
        delta=g * (math.sin(params.theta) - params.g_c),
    )


def effective_hamiltonian(params: SystemParams) -> np.ndarray:
    """Waveguide-mediated exchange plus cancellation coupling."""
    return 0.5 * params.gamma * (math.sin(params.theta) - params.g_c) * EXCHANGE


def jump_operator(channel: Channel, params: SystemParams) -> np.ndarray:
    if channel == "R":
        phase = np.exp(-1j * params.theta)
    elif channel == "L":
        phase = np.exp(1j * params.theta)
    else:
        raise ValueError(f"unknown channel {channel!r}")
    return -1j * math.sqrt(params.gamma / 2.0) * (SIGMA_1 + phase * SIGMA_2)


def parity_jump_operators(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Jump operators for centrally symmetric (+) and antisymmetric (-) photons.

    Channel phases are referred to the midpoint between the qubits, so that
    ``+``/``-`` match the point-reflection parity of the emitted photon.
    """
    jr = np.exp(0.5j * params.theta) * jump_operator("R", params)
    jl = np.exp(-0.5j * params.theta) * jump_operator("L", params)
    return (jr + jl) / math.sqrt(2.0), (jr - jl) / math.sqrt(2.0)


def nonhermitian_hamiltonian(params: SystemParams) -> np.ndarray:
    """``H - (i/2) sum_l J_l^dag J_l``; generator of the no-emission propagator."""
    h = effective_hamiltonian(params)
    for ch in CHANNELS:
        j = jump_operator(ch, params)
        h = h - 0.5j * (j.conj().T @ j)
    return h


def kraus(params: SystemParams, t: float) -> np.ndarray:
    """Closed-form no-emission propagator ``K(t)``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    r = derive_rates(params)
    ep = np.exp(-0.5 * r.mu_plus * t)
    em = np.exp(-0.5 * r.mu_minus * t)
    k = np.zeros((4, 4), dtype=complex)
    k[EE, EE] = math.exp(-params.gamma * t)
    k[EG, EG] = k[GE, GE] = 0.5 * (ep + em)
    k[EG, GE] = k[GE, EG] = 0.5 * (ep - em)
    k[GG, GG] = 1.0
    return k


def basis_state(label: str) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[BASIS_LABELS.index(label)] = 1.0
    return v


def _single(a_eg: complex, a_ge: complex) -> np.ndarray:
    return np.array([0.0, a_eg, a_ge, 0.0], dtype=complex) / math.sqrt(2.0)


PSI_PLUS = _single(1.0, 1.0)
PSI_MINUS = _single(1.0, -1.0)
PHI_PLUS = _single(1.0, 1j)
PHI_MINUS = _single(1.0, -1j)
BELL_STATES = {"psi+": PSI_PLUS, "psi-": PSI_MINUS, "phi+": PHI_PLUS, "phi-": PHI_MINUS}


def directional_states(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """``(psi_L, psi_R)``: the single-excitation states dark to R and L emission respectively."""
    psi_l = _single(1.0, -np.exp(1j * params.theta))
    psi_r = _single(1.0, -np.exp(-1j * params.theta))
    return psi_l, psi_r


def named_state(name: str, params: SystemParams) -> np.ndarray:
    """Resolve ``ee/eg/ge/gg``, Bell state names and ``psiL``/``psiR``."""
    key = name.replace("_", "").lower()
    if key in BASIS_LABELS:
        return basis_state(key)
    if key in ("psil", "psir"):
        psi_l, psi_r = directional_states(params)
        return psi_l if key == "psil" else psi_r
    aliases = {"psi+": "psi+", "psiplus": "psi+", "psi-": "psi-", "psiminus": "psi-",
               "phi+": "phi+", "phiplus": "phi+", "phi-": "phi-", "phiminus": "phi-"}
    if key in aliases:
        return BELL_STATES[aliases[key]].copy()
    raise ValueError(f"unknown state {name!r}")


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2 / (|a|^2 |b|^2)``."""
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    if na == 0 or nb == 0:
        return 0.0
    return float(abs(np.vdot(a, b)) ** 2 / (na * nb))


@dataclass(frozen=True)
class ConditionClass:
    kind: Literal["resonance", "antiresonance", "controlled_antiresonance", "generic"]
    n: int | None
    tol: float

    def __str__(self) -> str:
        if self.n is None:
            return self.kind
        return f"{self.kind}({self.n})"


def classify_condition(params: SystemParams, tol: float = DEFAULT_TOL) -> ConditionClass:
    """Resonance ``theta = n pi``, antiresonance ``theta = (n + 1/2) pi``,
    and controlled antiresonance (antiresonance with ``g_c = (-1)^n``).

    ``n = 0`` at ``theta = 0`` is reported as a resonance: one Bell state is
    dark there as well.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = params.theta / math.pi
    n_res = round(x)
    if abs(params.theta - n_res * math.pi) <= tol:
        return ConditionClass("resonance", int(n_res), tol)
    n_anti = math.floor(x)
    if abs(params.theta - (n_anti + 0.5) * math.pi) <= tol:
        if abs(params.g_c - (-1.0) ** n_anti) <= tol:
            return ConditionClass("controlled_antiresonance", int(n_anti), tol)
        return ConditionClass("antiresonance", int(n_anti), tol)
    return ConditionClass("generic", None, tol)


def excitation_number(state: np.ndarray) -> float:
    """Mean qubit excitation number of a (possibly sub-normalized) qubit vector."""
    return float(np.sum(EXCITATIONS * np.abs(state) ** 2))


def in_single_excitation_span(state: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    state = np.asarray(state)
    return state.shape == (4,) and abs(state[EE]) <= tol and abs(state[GG]) <= tol
