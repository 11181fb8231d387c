"""Grid evaluation of emission observables over (theta, g_c)."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, SystemParams, classify_condition, derive_rates
from .single import r1
from .two_photon import bunching_report

QUANTITIES = (
    "r1_eg", "r1_psiL", "r2_oracle", "r2_printed",
    "P_RR", "P_LL", "P_RL", "P_LR",
    "gamma_plus", "gamma_minus", "delta", "condition_class",
)
DEFAULT_QUANTITIES = ("r2_oracle", "r2_printed", "P_RR", "P_LL", "P_RL", "P_LR")


@dataclass(frozen=True)
class SweepSpec:
    theta_start: float
    theta_stop: float
    theta_count: int
    gc_start: float
    gc_stop: float
    gc_count: int
    quantities: tuple[str, ...] = DEFAULT_QUANTITIES
    gamma: float = 1.0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.theta_count < 1 or self.gc_count < 1:
            raise ValueError("grid counts must be >= 1")
        for v in (self.theta_start, self.theta_stop, self.gc_start, self.gc_stop):
            if not math.isfinite(v):
                raise ValueError("grid ranges must be finite")
        bad = [q for q in self.quantities if q not in QUANTITIES]
        if bad:
            raise ValueError(f"unknown quantities {bad}; choose from {QUANTITIES}")

    def thetas(self) -> np.ndarray:
        return np.linspace(self.theta_start, self.theta_stop, self.theta_count)

    def couplings(self) -> np.ndarray:
        return np.linspace(self.gc_start, self.gc_stop, self.gc_count)

    @property
    def header(self) -> tuple[str, ...]:
        return ("theta", "g_c") + tuple(self.quantities)


def evaluate_cell(theta: float, g_c: float, quantities, gamma: float = 1.0, tol: float = DEFAULT_TOL) -> list:
    params = SystemParams(float(theta), float(g_c), gamma)
    row: list = [float(theta), float(g_c)]
    report = None
    rates = None
    for q in quantities:
        if q in ("r2_oracle", "r2_printed") or q.startswith("P_"):
            report = report or bunching_report(params)
        if q in ("gamma_plus", "gamma_minus", "delta"):
            rates = rates or derive_rates(params)
        if q == "r1_eg":
            row.append(r1(params, "eg"))
        elif q == "r1_psiL":
            row.append(r1(params, "psi_L"))
        elif q == "r2_oracle":
            row.append(report.r2_oracle)
        elif q == "r2_printed":
            row.append(report.r2_printed)
        elif q.startswith("P_"):
            row.append(report.pair_probabilities[q[2:]])
        elif q == "condition_class":
            c = classify_condition(params, tol)
            row.append(c.kind if c.n is None else f"{c.kind}({c.n})")
        else:
            row.append(getattr(rates, q))
    return row


def _row_task(args):
    theta, couplings, quantities, gamma, tol = args
    return [evaluate_cell(theta, g, quantities, gamma, tol) for g in couplings]


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[list]:
    """All cells, theta-major. Parallel runs return the same rows in the same order."""
    couplings = spec.couplings()
    tasks = [(t, couplings, spec.quantities, spec.gamma, spec.tol) for t in spec.thetas()]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            blocks = list(pool.map(_row_task, tasks))
    else:
        blocks = [_row_task(t) for t in tasks]
    return [row for block in blocks for row in block]


def grid_minima(rows, spec: SweepSpec, quantity: str = "r2_oracle", atol: float = 1e-12) -> list[tuple[float, float]]:
    """Cells whose value is within ``atol`` of the global (nan-ignoring) minimum."""
    col = spec.header.index(quantity)
    values = np.array([r[col] for r in rows], dtype=float)
    best = np.nanmin(values)
    return [(rows[i][0], rows[i][1]) for i in np.flatnonzero(values <= best + atol)]
