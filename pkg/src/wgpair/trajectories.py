"""Quantum-jump unraveling of the emission dynamics and heralded Bell-state statistics.

Each step of width ``dt`` clicks in channel ``l`` with probability
``||J_l psi||^2 dt`` (at most one click per step, time stamped at the end of
the step); otherwise the state is propagated by the exact no-emission
operator ``K(dt)`` and renormalized. The scattering phase picked up by
already emitted photons is a global phase per click and is not tracked.

All trajectories of a batch advance in lockstep; their random numbers come
from :mod:`wgpair.rng`, so results do not depend on batching or threading.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BELL_STATES,
    EXCITATIONS,
    GG,
    SystemParams,
    jump_operator,
    kraus,
    parity_jump_operators,
)
from .rng import trajectory_keys, uniforms

DETECTION_LABELS = {"directional": ("R", "L"), "parity": ("+", "-")}


def detection_operators(params: SystemParams, detection: str) -> tuple[np.ndarray, np.ndarray]:
    if detection == "directional":
        return jump_operator("R", params), jump_operator("L", params)
    if detection == "parity":
        return parity_jump_operators(params)
    raise ValueError(f"unknown detection scheme {detection!r}")


@dataclass
class TrajectoryBatch:
    """Raw per-trajectory arrays; row ``i`` is trajectory ``indices[i]``."""

    params: SystemParams
    dt: float
    seed: int
    detection: str
    indices: np.ndarray
    keys: np.ndarray
    click_times: np.ndarray  # (n, max_clicks), nan when absent
    click_channels: np.ndarray  # (n, max_clicks), -1 when absent
    click_states: np.ndarray  # (n, max_clicks, 4) conditional state right after each click
    final_states: np.ndarray  # (n, 4)
    populations: np.ndarray | None = None  # (n_times, n, 4) |amplitude|^2 at record_times
    record_times: np.ndarray | None = None

    @property
    def n_clicks(self) -> np.ndarray:
        return np.sum(self.click_channels >= 0, axis=1)

    @classmethod
    def concatenate(cls, parts: list["TrajectoryBatch"]) -> "TrajectoryBatch":
        first = parts[0]
        pops = None
        if first.populations is not None:
            pops = np.concatenate([p.populations for p in parts], axis=1)
        return cls(
            first.params, first.dt, first.seed, first.detection,
            np.concatenate([p.indices for p in parts]),
            np.concatenate([p.keys for p in parts]),
            np.concatenate([p.click_times for p in parts]),
            np.concatenate([p.click_channels for p in parts]),
            np.concatenate([p.click_states for p in parts]),
            np.concatenate([p.final_states for p in parts]),
            pops,
            first.record_times,
        )


def _simulate(
    params: SystemParams,
    initial: np.ndarray,
    dt: float,
    seed: int,
    indices: np.ndarray,
    detection: str,
    tmax: float,
    freeze_after_first: bool,
    record_times,
) -> TrajectoryBatch:
    initial = np.asarray(initial, dtype=complex)
    initial = initial / math.sqrt(np.vdot(initial, initial).real)
    max_clicks = int(np.max(EXCITATIONS[np.abs(initial) > 0], initial=0))
    n = len(indices)
    keys = trajectory_keys(seed, indices)
    j1, j2 = detection_operators(params, detection)
    j1t, j2t = j1.T.copy(), j2.T.copy()
    kdt = kraus(params, dt).T.copy()
    n_steps = int(math.ceil(tmax / dt - 1e-9))

    psi = np.tile(initial, (n, 1))
    times = np.full((n, max(max_clicks, 1)), np.nan)
    channels = np.full((n, max(max_clicks, 1)), -1, dtype=np.int8)
    states = np.zeros((n, max(max_clicks, 1), 4), dtype=complex)
    count = np.zeros(n, dtype=np.int64)

    rec_steps: dict[int, int] = {}
    pops = None
    if record_times is not None:
        record_times = np.asarray(record_times, dtype=float)
        pops = np.zeros((len(record_times), n, 4))
        for k, t in enumerate(record_times):
            s = int(round(t / dt))
            if s == 0:
                pops[k] = np.abs(psi) ** 2
            else:
                rec_steps.setdefault(s, k)
                if rec_steps[s] != k:
                    raise ValueError("record times closer than dt")

    def finished(vecs: np.ndarray) -> np.ndarray:
        return np.abs(vecs[:, GG]) ** 2 >= 1.0 - 1e-14

    active = np.flatnonzero(~finished(psi)) if max_clicks else np.array([], dtype=np.int64)
    for step in range(n_steps):
        if active.size == 0 and not rec_steps:
            break
        if active.size:
            cur = psi[active]
            u = uniforms(keys[active], step)
            v1 = cur @ j1t
            v2 = cur @ j2t
            p1 = np.einsum("ij,ij->i", v1.conj(), v1).real * dt
            p2 = np.einsum("ij,ij->i", v2.conj(), v2).real * dt
            hit1 = u < p1
            hit2 = ~hit1 & (u < p1 + p2)
            quiet = ~(hit1 | hit2)
            t_click = (step + 1) * dt
            for hit, vec, label in ((hit1, v1, 0), (hit2, v2, 1)):
                if np.any(hit):
                    rows = active[hit]
                    new = vec[hit] / np.sqrt(np.sum(np.abs(vec[hit]) ** 2, axis=1))[:, None]
                    psi[rows] = new
                    slot = count[rows]
                    times[rows, slot] = t_click
                    channels[rows, slot] = label
                    states[rows, slot] = new
                    count[rows] += 1
            if np.any(quiet):
                nxt = cur[quiet] @ kdt
                nxt /= np.sqrt(np.sum(np.abs(nxt) ** 2, axis=1))[:, None]
                psi[active[quiet]] = nxt
            done = finished(psi[active]) | (count[active] >= max_clicks)
            if freeze_after_first:
                done |= count[active] >= 1
            if np.any(done):
                active = active[~done]
        if (step + 1) in rec_steps:
            pops[rec_steps.pop(step + 1)] = np.abs(psi) ** 2

    return TrajectoryBatch(
        params, dt, seed, detection, np.asarray(indices), keys,
        times[:, :max_clicks], channels[:, :max_clicks], states[:, :max_clicks], psi,
        pops, record_times,
    )


def run_trajectories(
    params: SystemParams,
    initial: np.ndarray,
    dt: float,
    n_trajectories: int,
    seed: int,
    detection: str = "directional",
    tmax: float | None = None,
    freeze_after_first: bool = False,
    record_times=None,
    chunk_size: int = 25_000,
    n_jobs: int = 1,
) -> TrajectoryBatch:
    """Simulate trajectories ``0 .. n_trajectories-1``.

    Chunking and ``n_jobs`` only change how the work is scheduled; the
    returned arrays are identical for every choice.
    """
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be >= 1")
    if params.gamma * dt > 1e-2 + 1e-15:
        raise ValueError(f"gamma*dt = {params.gamma * dt} too coarse for the jump unraveling (<= 1e-2)")
    if tmax is None:
        tmax = 30.0 / params.gamma
    bounds = list(range(0, n_trajectories, chunk_size)) + [n_trajectories]
    chunks = [np.arange(a, b, dtype=np.int64) for a, b in zip(bounds, bounds[1:])]

    def work(idx):
        return _simulate(params, initial, dt, seed, idx, detection, tmax, freeze_after_first, record_times)

    if n_jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return TrajectoryBatch.concatenate(parts)


@dataclass(frozen=True)
class TrajectoryRecord:
    seed: int
    params: SystemParams
    dt: float
    clicks: list[tuple[float, str]]
    conditional_states: list[np.ndarray]
    final_state: np.ndarray


def sample_trajectory(
    params: SystemParams,
    initial: np.ndarray,
    dt: float,
    seed: int,
    detection: str = "directional",
    index: int = 0,
    tmax: float | None = None,
    freeze_after_first: bool = False,
) -> TrajectoryRecord:
    """Trajectory number ``index`` of the batch keyed by ``seed``."""
    batch = run_trajectories(
        params, initial, dt, 1, seed, detection, tmax, freeze_after_first, chunk_size=1
    ) if index == 0 else _single(params, initial, dt, seed, detection, index, tmax, freeze_after_first)
    labels = DETECTION_LABELS[detection]
    k = int(batch.n_clicks[0])
    return TrajectoryRecord(
        seed=int(batch.keys[0]),
        params=params,
        dt=dt,
        clicks=[(float(batch.click_times[0, i]), labels[batch.click_channels[0, i]]) for i in range(k)],
        conditional_states=[batch.click_states[0, i].copy() for i in range(k)],
        final_state=batch.final_states[0].copy(),
    )


def _single(params, initial, dt, seed, detection, index, tmax, freeze):
    if tmax is None:
        tmax = 30.0 / params.gamma
    return _simulate(params, initial, dt, seed, np.array([index], dtype=np.int64), detection, tmax, freeze, None)


def _mean_sem(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), math.nan
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True)
class HeraldStatistics:
    n_trajectories: int
    detection: str
    first_click_mean: float
    first_click_sem: float
    channel_frequencies: dict[str, float]
    conditional_fidelity: dict[str, dict[str, float]]
    min_conditional_fidelity: dict[str, dict[str, float]]
    second_wait_mean: float
    second_wait_sem: float
    n_first_clicks: int
    n_second_clicks: int
    same_channel_pairs: int
    opposite_channel_pairs: int

    @property
    def antiparallel_fraction(self) -> float:
        total = self.same_channel_pairs + self.opposite_channel_pairs
        return self.opposite_channel_pairs / total if total else math.nan

    def as_rows(self) -> list[tuple[str, object]]:
        """Flat ``(key, value)`` pairs in a fixed order, for text/CSV export."""
        rows: list[tuple[str, object]] = [
            ("n_trajectories", self.n_trajectories),
            ("detection", self.detection),
            ("first_click_mean", self.first_click_mean),
            ("first_click_sem", self.first_click_sem),
        ]
        for ch, f in self.channel_frequencies.items():
            rows.append((f"freq_{ch}", f))
        rows += [
            ("second_wait_mean", self.second_wait_mean),
            ("second_wait_sem", self.second_wait_sem),
            ("n_first_clicks", self.n_first_clicks),
            ("n_second_clicks", self.n_second_clicks),
            ("same_channel_pairs", self.same_channel_pairs),
            ("opposite_channel_pairs", self.opposite_channel_pairs),
        ]
        for ch, fids in self.conditional_fidelity.items():
            for bell, f in fids.items():
                rows.append((f"fidelity_{ch}_{bell}", f))
        return rows


def summarize(batch: TrajectoryBatch) -> HeraldStatistics:
    labels = DETECTION_LABELS[batch.detection]
    n = len(batch.indices)
    first = batch.click_channels[:, 0] >= 0 if batch.click_channels.shape[1] else np.zeros(n, bool)
    t1 = batch.click_times[first, 0]
    ch1 = batch.click_channels[first, 0]
    freqs = {lab: float(np.mean(ch1 == k)) if ch1.size else math.nan for k, lab in enumerate(labels)}
    fid_mean: dict[str, dict[str, float]] = {}
    fid_min: dict[str, dict[str, float]] = {}
    cond = batch.click_states[first, 0] if first.any() else np.zeros((0, 4), complex)
    for k, lab in enumerate(labels):
        sel = cond[ch1 == k]
        fid_mean[lab], fid_min[lab] = {}, {}
        for name, bell in BELL_STATES.items():
            f = np.abs(sel @ bell.conj()) ** 2
            fid_mean[lab][name] = float(np.mean(f)) if f.size else math.nan
            fid_min[lab][name] = float(np.min(f)) if f.size else math.nan
    second = (batch.click_channels[:, 1] >= 0) if batch.click_channels.shape[1] > 1 else np.zeros(n, bool)
    waits = batch.click_times[second, 1] - batch.click_times[second, 0]
    same = int(np.sum(batch.click_channels[second, 0] == batch.click_channels[second, 1]))
    m1, s1 = _mean_sem(t1)
    m2, s2 = _mean_sem(waits)
    return HeraldStatistics(
        n_trajectories=n,
        detection=batch.detection,
        first_click_mean=m1,
        first_click_sem=s1,
        channel_frequencies=freqs,
        conditional_fidelity=fid_mean,
        min_conditional_fidelity=fid_min,
        second_wait_mean=m2,
        second_wait_sem=s2,
        n_first_clicks=int(first.sum()),
        n_second_clicks=int(second.sum()),
        same_channel_pairs=same,
        opposite_channel_pairs=int(second.sum()) - same,
    )


def herald_statistics(
    params: SystemParams,
    initial: np.ndarray,
    dt: float,
    n_trajectories: int,
    seed: int,
    detection: str = "directional",
    tmax: float | None = None,
    freeze_after_first: bool = False,
    n_jobs: int = 1,
) -> HeraldStatistics:
    batch = run_trajectories(
        params, initial, dt, n_trajectories, seed, detection, tmax, freeze_after_first, n_jobs=n_jobs
    )
    return summarize(batch)


def second_click_waits(batch: TrajectoryBatch) -> np.ndarray:
    second = batch.click_channels[:, 1] >= 0
    return batch.click_times[second, 1] - batch.click_times[second, 0]
