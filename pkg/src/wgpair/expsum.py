"""Finite sums of complex exponentials, ``f(t) = sum_k c_k exp(-z_k t)``.

Every closed-form waveform and kernel in the package is carried as an
:class:`ExpSum`, so that L2 norms and overlaps reduce to exact rational
expressions in the rates instead of numerical quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

MERGE_TOL = 1e-12


class NonIntegrableError(ValueError):
    """Raised when an integral over ``[0, inf)`` does not converge."""


@dataclass(frozen=True)
class ExpSum:
    coefficients: tuple[complex, ...]
    rates: tuple[complex, ...]

    def __post_init__(self):
        if len(self.coefficients) != len(self.rates):
            raise ValueError("coefficients and rates must have equal length")
        for z in self.rates:
            if complex(z).real < -MERGE_TOL:
                raise ValueError(f"growing term with rate {z!r}")

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, complex]], merge_tol: float = MERGE_TOL) -> "ExpSum":
        """Build from ``(coefficient, rate)`` pairs, merging rates closer than ``merge_tol``."""
        coeffs: list[complex] = []
        rates: list[complex] = []
        for c, z in terms:
            c, z = complex(c), complex(z)
            for i, r in enumerate(rates):
                if abs(r - z) <= merge_tol:
                    coeffs[i] += c
                    break
            else:
                coeffs.append(c)
                rates.append(z)
        return cls(tuple(coeffs), tuple(rates))

    @classmethod
    def zero(cls) -> "ExpSum":
        return cls((), ())

    @property
    def terms(self) -> list[tuple[complex, complex]]:
        return list(zip(self.coefficients, self.rates))

    def __len__(self) -> int:
        return len(self.rates)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for c, z in self.terms:
            out = out + c * np.exp(-z * t)
        return out

    def __add__(self, other: "ExpSum") -> "ExpSum":
        return ExpSum.from_terms(self.terms + other.terms)

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "ExpSum":
        return ExpSum(tuple(factor * c for c in self.coefficients), self.rates)

    def rescaled(self, gamma: float, weight: complex = 1.0) -> "ExpSum":
        """Return ``t -> weight * f(gamma * t)`` (unit conversion out of 1/gamma)."""
        return ExpSum(
            tuple(weight * c for c in self.coefficients),
            tuple(gamma * z for z in self.rates),
        )

    def pruned(self, coeff_tol: float = 0.0) -> "ExpSum":
        """Drop terms whose coefficient magnitude is ``<= coeff_tol``."""
        keep = [(c, z) for c, z in self.terms if abs(c) > coeff_tol]
        return ExpSum(tuple(c for c, _ in keep), tuple(z for _, z in keep))

    def split_stable(self, rate_tol: float = 0.0) -> tuple["ExpSum", "ExpSum"]:
        """Split into ``(decaying, marginal)`` parts by ``Re(z) > rate_tol``."""
        dec = [(c, z) for c, z in self.terms if z.real > rate_tol]
        mar = [(c, z) for c, z in self.terms if z.real <= rate_tol]
        return ExpSum.from_terms(dec), ExpSum.from_terms(mar)

    def norm2(self) -> float:
        return float(l2_inner(self, self).real)


def l2_inner(a: ExpSum, b: ExpSum) -> complex:
    """Closed-form ``int_0^inf a(t) conj(b(t)) dt``.

    Raises
    ------
    NonIntegrableError
        If a pair of terms has ``Re(z_a + conj(z_b)) <= 0``.
    """
    total = 0j
    for c, z in a.terms:
        for d, w in b.terms:
            s = z + w.conjugate()
            if s.real <= 0.0:
                raise NonIntegrableError(f"pair rate {s!r} has no decay")
            total += c * d.conjugate() / s
    return total


def truncated_l2_inner(a: ExpSum, b: ExpSum, horizon: float) -> complex:
    """``int_0^T a(t) conj(b(t)) dt`` for finite ``T``; marginal terms allowed."""
    total = 0j
    for c, z in a.terms:
        for d, w in b.terms:
            total += c * d.conjugate() * decay_integral(z + w.conjugate(), horizon)
    return total


def decay_integral(s: complex, horizon: float) -> complex:
    """``int_0^T exp(-s t) dt``, stable for ``s -> 0`` and ``T = inf``."""
    if np.isinf(horizon):
        if s.real <= 0.0:
            raise NonIntegrableError(f"rate {s!r} has no decay")
        return 1.0 / s
    x = s * horizon
    if abs(x) < 1e-8:
        return horizon * (1.0 - x / 2.0 + x * x / 6.0)
    return -np.expm1(-x) / s


def wedge_integral(a: complex, b: complex, horizon: float = np.inf) -> complex:
    """``int_0^T dt2 exp(-b t2) int_0^t2 dt1 exp(-a t1)``.

    Uses ``(I(b) - I(a+b)) / a`` with ``I`` the one-dimensional decay
    integral, and the ``a -> 0`` limit ``int_0^T t exp(-b t) dt``.
    """
    if abs(a) * (1.0 if np.isinf(horizon) else max(horizon, 1.0)) < 1e-9:
        if np.isinf(horizon):
            if b.real <= 0.0:
                raise NonIntegrableError(f"rate {b!r} has no decay")
            return 1.0 / (b * b)
        if abs(b * horizon) < 1e-8:
            return horizon * horizon / 2.0
        e = np.exp(-b * horizon)
        return (1.0 - e - b * horizon * e) / (b * b)
    return (decay_integral(b, horizon) - decay_integral(a + b, horizon)) / a
