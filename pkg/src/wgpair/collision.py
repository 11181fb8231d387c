"""Discrete-time collision model: the field is cut into time bins that each
interact once with both qubits through an exact per-bin unitary.

State amplitudes are kept in excitation sectors with at most two photons:

* ``a``: qubits with no photon emitted yet,
* one-photon histories ``v[m, c]``: qubit vector after a photon went into bin ``m``, channel ``c``,
* two-photon amplitudes with the qubits in ``|gg>``.

Streaming storage keeps only the emission-time one-photon vectors plus
running Gram matrices and mode projections of the histories, which is
enough for pair probabilities and mode overlaps in ``O(n_bins)`` memory.
Dense storage additionally keeps the full two-photon wedge.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .core import (
    CHANNELS,
    EE,
    EXCHANGE,
    EXCITATIONS,
    GG,
    SIGMA_1,
    SIGMA_2,
    SystemParams,
    kraus,
)
from .expsum import ExpSum, decay_integral
from .single import photon_waveform
from .two_photon import OutputMode, PAIRS, two_photon_kernel

MAX_BIN_OCCUPATION = 2
BIN_DIM = MAX_BIN_OCCUPATION + 1
PRODUCT_DIM = 4 * BIN_DIM * BIN_DIM
DEFAULT_MEMORY_BUDGET = 10_000_000  # complex entries of the dense wedge
_CH = {"R": 0, "L": 1}


def product_index(qubit: int, n_r: int, n_l: int) -> int:
    return qubit * BIN_DIM * BIN_DIM + n_r * BIN_DIM + n_l


def _bin_annihilator() -> np.ndarray:
    b = np.zeros((BIN_DIM, BIN_DIM), dtype=complex)
    for n in range(1, BIN_DIM):
        b[n - 1, n] = math.sqrt(n)
    return b


def product_excitations() -> np.ndarray:
    """Total excitation number of every product basis state."""
    out = np.zeros(PRODUCT_DIM, dtype=int)
    for q, nr, nl in itertools.product(range(4), range(BIN_DIM), range(BIN_DIM)):
        out[product_index(q, nr, nl)] = EXCITATIONS[q] + nr + nl
    return out


@dataclass(frozen=True)
class BinConfig:
    """Bin width ``dt`` (physical time) and number of bins."""

    dt: float
    n_bins: int
    gamma: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.gamma * self.dt > 0.1 + 1e-15:
            raise ValueError(f"gamma*dt = {self.gamma * self.dt} outside the collision regime (<= 0.1)")
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")

    @classmethod
    def from_horizon(cls, dt: float, horizon: float, gamma: float = 1.0) -> "BinConfig":
        return cls(dt, max(1, int(round(horizon / dt))), gamma)

    @property
    def horizon(self) -> float:
        return self.dt * self.n_bins


@dataclass(frozen=True)
class BinGenerator:
    """Per-bin generator on qubits x (R bin) x (L bin) and its exact exponential.

    ``generator`` is the Hermitian ``dt * (V + H_e + H_c)``; ``unitary`` its
    exponential ``exp(-i generator)``. The generator conserves the total
    excitation number, so the truncation at two photons per bin mode is
    exact on every sector with at most two excitations.
    """

    params: SystemParams
    dt: float
    generator: np.ndarray
    unitary: np.ndarray

    def element(self, out: tuple[int, int, int], inp: tuple[int, int, int]) -> complex:
        return complex(self.unitary[product_index(*out), product_index(*inp)])

    @cached_property
    def vacuum_map(self) -> np.ndarray:
        """Qubit map with the bin left empty; approximates ``K(dt)``."""
        idx = [product_index(q, 0, 0) for q in range(4)]
        return self.unitary[np.ix_(idx, idx)]

    @cached_property
    def emission_maps(self) -> np.ndarray:
        """Stacked R and L emission maps, shape ``(2, 4, 4)``."""
        return np.stack([self.emission_map(c) for c in CHANNELS])

    def emission_map(self, channel: str) -> np.ndarray:
        """Qubit map for one photon deposited into ``channel``."""
        out = [product_index(q, 1, 0) if channel == "R" else product_index(q, 0, 1) for q in range(4)]
        inp = [product_index(q, 0, 0) for q in range(4)]
        return self.unitary[np.ix_(out, inp)]

    @cached_property
    def same_bin_pairs(self) -> dict[str, complex]:
        """``|ee, vac> -> |gg>`` with two photons in this bin: keys RR (2_R), LL (2_L), RL (1_R 1_L)."""
        src = (EE, 0, 0)
        return {
            "RR": self.element((GG, 2, 0), src),
            "LL": self.element((GG, 0, 2), src),
            "RL": self.element((GG, 1, 1), src),
        }

    def magnus_unitary(self) -> np.ndarray:
        """Second-order truncation ``1 - iG - G^2/2`` for cross-checking."""
        g = self.generator
        return np.eye(PRODUCT_DIM) - 1j * g - 0.5 * g @ g


def build_bin_generator(params: SystemParams, dt: float) -> BinGenerator:
    BinConfig(dt, 1, params.gamma)
    b = _bin_annihilator()
    eye_q, eye_b = np.eye(4), np.eye(BIN_DIM)
    b_r = np.kron(eye_q, np.kron(b, eye_b))
    b_l = np.kron(eye_q, np.kron(eye_b, b))
    vertex = math.sqrt(params.gamma * dt / 2.0)
    lower_r = np.kron(SIGMA_1 + np.exp(-1j * params.theta) * SIGMA_2, np.eye(BIN_DIM * BIN_DIM))
    lower_l = np.kron(SIGMA_1 + np.exp(1j * params.theta) * SIGMA_2, np.eye(BIN_DIM * BIN_DIM))
    coupling = vertex * (lower_r @ b_r.conj().T + lower_l @ b_l.conj().T)
    coupling = coupling + coupling.conj().T
    h_exchange = 0.5 * params.gamma * math.sin(params.theta) * EXCHANGE
    h_cancel = -0.5 * params.gamma * params.g_c * EXCHANGE
    hamiltonian = np.kron(h_exchange + h_cancel, np.eye(BIN_DIM * BIN_DIM))
    gen = coupling + dt * hamiltonian
    return BinGenerator(params, dt, gen, expm(-1j * gen))


def _mode_weights(envelope: ExpSum, dt: float, n_bins: int) -> np.ndarray:
    """Bin-averaged mode function ``int_bin u(t) dt / sqrt(dt)``."""
    starts = dt * np.arange(n_bins)
    w = np.zeros(n_bins, dtype=complex)
    for d, z in envelope.terms:
        w += d * np.exp(-z * starts) * decay_integral(z, dt)
    return w / math.sqrt(dt)


class CollisionState:
    """Joint qubit + field state of a collision-model run, advanced bin by bin."""

    def __init__(
        self,
        params: SystemParams,
        initial: np.ndarray,
        config: BinConfig,
        storage: str = "streaming",
        modes: tuple[OutputMode, OutputMode] | None = None,
        memory_budget: int = DEFAULT_MEMORY_BUDGET,
    ):
        if storage not in ("streaming", "dense"):
            raise ValueError(f"unknown storage {storage!r}")
        initial = np.asarray(initial, dtype=complex)
        if initial.shape != (4,):
            raise ValueError("initial qubit state must have 4 amplitudes")
        n = config.n_bins
        if storage == "dense":
            entries = len(PAIRS) * n * (n + 1) // 2
            if entries > memory_budget:
                raise MemoryError(f"dense wedge needs {entries} entries, budget is {memory_budget}")
        self.params = params
        self.config = config
        self.storage = storage
        self.dt = config.dt
        self.a = initial.copy()
        self.emitted = np.zeros((n, 2, 4), dtype=complex)
        self.gram = np.zeros((2, 4, 4), dtype=complex)
        self.pair_prob = np.zeros((2, 2))
        if modes is None:
            modes = (OutputMode.exponential("R", params.gamma), OutputMode.exponential("L", params.gamma))
        self.weights = np.stack([_mode_weights(m.envelope, config.dt, n) for m in modes]).conj()
        self.mode_proj = np.zeros((2, 4), dtype=complex)
        self.cross_overlap = np.zeros((2, 2), dtype=complex)
        self.same_bin_overlap = np.zeros((2, 2), dtype=complex)
        self.next_bin = 0
        self.checkpoints: dict[int, np.ndarray] = {}
        if storage == "dense":
            self.history = np.zeros((n, 2, 4), dtype=complex)
            self.wedge = {p: np.zeros(n * (n + 1) // 2, dtype=complex) for p in PAIRS}

    # bookkeeping -----------------------------------------------------------------
    @property
    def one_photon_norm(self) -> float:
        return float(np.trace(self.gram, axis1=1, axis2=2).real.sum())

    @property
    def two_photon_norm(self) -> float:
        return float(self.pair_prob.sum())

    def norm(self) -> float:
        return float(np.vdot(self.a, self.a).real) + self.one_photon_norm + self.two_photon_norm

    def excitation_distribution(self) -> np.ndarray:
        """Probability of each total excitation number 0..2 (qubits + photons)."""
        dist = np.zeros(3)
        for q in range(4):
            dist[EXCITATIONS[q]] += abs(self.a[q]) ** 2
            one = self.gram[:, q, q].real.sum()
            if one:
                dist[EXCITATIONS[q] + 1] += one
        dist[2] += self.two_photon_norm
        return dist

    def pair_probabilities(self) -> dict[str, float]:
        return {p: float(self.pair_prob[_CH[p[0]], _CH[p[1]]]) for p in PAIRS}

    def emission_probabilities(self) -> dict[str, float]:
        """Probability of a photon in each channel, one-photon sector only."""
        return {c: float(np.sum(np.abs(self.emitted[: self.next_bin, _CH[c], :]) ** 2)) for c in CHANNELS}

    def one_photon_density(self, channel: str, qubit: int = GG) -> np.ndarray:
        """Emission-time amplitudes divided by ``sqrt(dt)``: samples of the continuum amplitude."""
        return self.emitted[: self.next_bin, _CH[channel], qubit] / math.sqrt(self.dt)

    def bin_midpoints(self) -> np.ndarray:
        return self.dt * (np.arange(self.next_bin) + 0.5)

    def noon_branches(self) -> tuple[complex, complex]:
        """Current ``<gg|<2_R 0_L|`` and ``<gg|<0_R 2_L|`` projections."""
        return self._branches(self.cross_overlap, self.same_bin_overlap)

    @staticmethod
    def _branches(cross, same) -> tuple[complex, complex]:
        r2 = math.sqrt(2.0)
        return complex(r2 * cross[0, 0] + same[0, 0]), complex(r2 * cross[1, 1] + same[1, 1])

    def two_photon_amplitude(self, pair: str, m: int, n: int) -> complex:
        if self.storage != "dense":
            raise RuntimeError("two-photon amplitudes are only kept in dense storage")
        if not 0 <= m <= n < self.config.n_bins:
            raise IndexError("need 0 <= m <= n < n_bins")
        return complex(self.wedge[pair][n * (n + 1) // 2 + m])

    # evolution -------------------------------------------------------------------
    def step(self, generator: BinGenerator, bin_index: int) -> "CollisionState":
        """Collide the qubits with field bin ``bin_index`` (bins are consumed in order)."""
        if bin_index != self.next_bin:
            raise ValueError(f"bin {bin_index} already consumed or out of order (next is {self.next_bin})")
        if bin_index >= self.config.n_bins:
            raise IndexError("run horizon exhausted")
        n = bin_index
        vac = generator.vacuum_map
        emit = generator.emission_maps
        w = self.weights[:, n]
        a_old = self.a

        # second photon out of the one-photon histories
        for c2 in range(2):
            row = emit[c2, GG, :]
            for c1 in range(2):
                self.pair_prob[c1, c2] += float(np.real(row @ self.gram[c1] @ row.conj()))
                self.cross_overlap[c1, c2] += w[c2] * (row @ self.mode_proj[c1])
                if self.storage == "dense" and n:
                    col = n * (n + 1) // 2
                    self.wedge[CHANNELS[c1] + CHANNELS[c2]][col: col + n] = self.history[:n, c1, :] @ row

        # both photons into this bin
        same = generator.same_bin_pairs
        amp = {k: v * a_old[EE] for k, v in same.items()}
        self.pair_prob[0, 0] += abs(amp["RR"]) ** 2
        self.pair_prob[1, 1] += abs(amp["LL"]) ** 2
        self.pair_prob[0, 1] += 0.5 * abs(amp["RL"]) ** 2
        self.pair_prob[1, 0] += 0.5 * abs(amp["RL"]) ** 2
        self.same_bin_overlap[0, 0] += amp["RR"] * w[0] ** 2
        self.same_bin_overlap[1, 1] += amp["LL"] * w[1] ** 2
        self.same_bin_overlap[0, 1] += amp["RL"] * w[0] * w[1]
        if self.storage == "dense":
            diag = n * (n + 1) // 2 + n
            self.wedge["RR"][diag] = amp["RR"]
            self.wedge["LL"][diag] = amp["LL"]
            self.wedge["RL"][diag] = amp["RL"]

        # histories see an empty bin
        self.gram = vac @ self.gram @ vac.conj().T
        self.mode_proj = self.mode_proj @ vac.T
        if self.storage == "dense" and n:
            self.history[:n] = self.history[:n] @ vac.T

        # first photon out of the no-photon part
        new = emit @ a_old
        self.emitted[n] = new
        self.gram += np.einsum("ci,cj->cij", new, new.conj())
        self.mode_proj += new * w[:, None]
        if self.storage == "dense":
            self.history[n] = new

        self.a = vac @ a_old
        self.next_bin += 1
        return self

    def record_checkpoint(self) -> None:
        self.checkpoints[self.next_bin] = np.array(self.noon_branches())


def run(
    params: SystemParams,
    initial: np.ndarray,
    config: BinConfig,
    storage: str = "streaming",
    modes: tuple[OutputMode, OutputMode] | None = None,
    checkpoints=(),
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    norm_log: list | None = None,
) -> CollisionState:
    """Propagate ``initial`` (qubits, field in vacuum) through ``config.n_bins`` collisions.

    ``checkpoints`` lists bin counts after which the N00N branch projections
    are stored; ``norm_log``, if given, receives the total norm after every step.
    """
    gen = build_bin_generator(params, config.dt)
    state = CollisionState(params, initial, config, storage, modes, memory_budget)
    marks = set(int(c) for c in checkpoints)
    for n in range(config.n_bins):
        state.step(gen, n)
        if state.next_bin in marks:
            state.record_checkpoint()
        if norm_log is not None:
            norm_log.append(state.norm())
    return state


@dataclass
class ErrorReport:
    """Discrepancies between discrete records and continuum amplitudes."""

    max_error: dict[str, float] = field(default_factory=dict)
    l2_error: dict[str, float] = field(default_factory=dict)
    survival_error: float = 0.0


def compare_to_analytic(state: CollisionState, initial: np.ndarray) -> ErrorReport:
    """Compare one-photon densities (single-excitation runs) or two-photon
    densities (dense runs from ``|ee>``) with the closed forms, sampled at bin midpoints."""
    params, dt = state.params, state.dt
    report = ErrorReport()
    t_mid = state.bin_midpoints()
    initial = np.asarray(initial, dtype=complex)
    if abs(initial[EE]) == 0 and abs(initial[GG]) == 0:
        for ch in CHANNELS:
            exact = photon_waveform(params, initial, ch)(t_mid)
            diff = state.one_photon_density(ch) - exact
            report.max_error[ch] = float(np.max(np.abs(diff)))
            report.l2_error[ch] = float(math.sqrt(np.sum(np.abs(diff) ** 2) * dt))
    elif state.storage == "dense":
        n = state.next_bin
        m_idx, n_idx = np.triu_indices(n, k=1)
        for pair in PAIRS:
            kern = two_photon_kernel(params, pair)
            exact = kern(t_mid[m_idx], t_mid[n_idx])
            disc = np.array([state.wedge[pair][j * (j + 1) // 2 + i] for i, j in zip(m_idx, n_idx)]) / dt
            diff = disc - exact
            report.max_error[pair] = float(np.max(np.abs(diff))) if diff.size else 0.0
            report.l2_error[pair] = float(math.sqrt(np.sum(np.abs(diff) ** 2) * dt * dt))
    exact_a = kraus(params, state.next_bin * dt) @ initial
    report.survival_error = float(np.max(np.abs(state.a - exact_a)))
    return report


@dataclass(frozen=True)
class ConvergenceStudy:
    dts: tuple[float, ...]
    errors: tuple[float, ...]
    survival_errors: tuple[float, ...]
    gamma: float = 1.0

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(a / b for a, b in zip(self.errors, self.errors[1:]))

    @property
    def orders(self) -> tuple[float, ...]:
        return tuple(
            math.log(e1 / e2) / math.log(d1 / d2)
            for e1, e2, d1, d2 in zip(self.errors, self.errors[1:], self.dts, self.dts[1:])
        )

    @property
    def survival_constant(self) -> float:
        """Largest ``C`` in ``|a_disc - a_exact| = C * gamma * dt`` over the study."""
        return max(e / (self.gamma * d) for e, d in zip(self.survival_errors, self.dts))


def convergence_study(
    params: SystemParams, initial: np.ndarray, dts, horizon: float = 10.0
) -> ConvergenceStudy:
    """One-excitation waveform error (max over channels and bins) for each ``dt``."""
    errs, surv = [], []
    for dt in dts:
        state = run(params, initial, BinConfig.from_horizon(dt, horizon, params.gamma))
        rep = compare_to_analytic(state, initial)
        errs.append(max(rep.max_error.values()))
        surv.append(rep.survival_error)
    return ConvergenceStudy(tuple(dts), tuple(errs), tuple(surv), params.gamma)
