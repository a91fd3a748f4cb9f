"""Shimorin-type kernels in series and integral form, and coefficient matching."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bernstein import BernsteinFunction, kernel_coefficients
from .measure import MeasureOnUnitInterval, integrate_against
from .sequences import MomentSequence


class NeedMoreTerms(ValueError):
    """Raised when a series is too short to certify the requested tolerance."""

    def __init__(self, required: int, available: int):
        super().__init__(f"need more terms: {required + 1} coefficients required, {available} available")
        self.required = required
        self.available = available


@dataclass(frozen=True)
class DiskPoint:
    z: complex
    lam: complex

    def __post_init__(self) -> None:
        if abs(self.x) >= 1.0:
            raise ValueError(f"|z conj(lambda)| = {abs(self.x)} is not < 1")

    @property
    def x(self) -> complex:
        return complex(self.z) * complex(self.lam).conjugate()

    @classmethod
    def from_x(cls, x: complex) -> DiskPoint:
        """A point pair with ``z conj(lambda) = x`` and ``|z| = |lambda|``."""
        rho = math.sqrt(abs(x))
        return cls(z=rho * cmath.exp(1j * cmath.phase(x)) if rho else 0j, lam=complex(rho))


@dataclass(frozen=True, eq=False)
class KernelSeries:
    """Taylor coefficients ``c_0..c_N`` in ``x = z conj(lambda)``.

    ``mass_bound`` is ``nu_0``; with it ``c_n <= (n + 1) nu_0`` gives a certified
    tail.  Series built from weight moments carry no such bound.
    """

    coefficients: np.ndarray
    mass_bound: float | None = None

    def __post_init__(self) -> None:
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("kernel series needs at least one coefficient")
        if np.any(c <= 0.0):
            raise ValueError("kernel coefficients must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_measure(cls, nu: MeasureOnUnitInterval | BernsteinFunction, N: int) -> KernelSeries:
        f = nu if isinstance(nu, BernsteinFunction) else BernsteinFunction(nu, cache_size=max(N, 1))
        return cls(kernel_coefficients(f, N).values, mass_bound=f.mass)

    @property
    def N(self) -> int:
        return self.coefficients.size - 1


class SeriesValue(NamedTuple):
    value: complex
    tail_bound: float


def linear_tail(q: float, N: int) -> float:
    """``sum_{n > N} (n + 1) q^n`` in closed form, for ``0 <= q < 1``."""
    if q == 0.0:
        return 0.0
    return ((N + 2) * q ** (N + 1) - (N + 1) * q ** (N + 2)) / (1.0 - q) ** 2


def terms_needed(q: float, mass: float, tol: float) -> int:
    """Smallest ``N`` with ``mass * linear_tail(q, N) <= tol``."""
    if mass * linear_tail(q, 0) <= tol:
        return 0
    hi = 1
    while mass * linear_tail(q, hi) > tol:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mass * linear_tail(q, mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def eval_series(ks: KernelSeries, p: DiskPoint, tol: float = 1e-12) -> SeriesValue:
    if ks.mass_bound is None:
        raise ValueError("series has no mass bound, tail cannot be certified")
    x = p.x
    q = abs(x)
    if q >= 1.0:
        raise ValueError("|x| must be < 1")
    needed = terms_needed(q, ks.mass_bound, tol)
    if needed > ks.N:
        raise NeedMoreTerms(needed, ks.coefficients.size)
    c = ks.coefficients[: needed + 1]
    acc = 0j
    for cn in c[::-1]:
        acc = acc * x + cn
    return SeriesValue(complex(acc), ks.mass_bound * linear_tail(q, needed))


def eval_integral(nu: MeasureOnUnitInterval, p: DiskPoint) -> complex:
    """``(1 - x)^-1 int (1 - r x)^-1 dnu(r)``."""
    x = p.x
    if abs(x) >= 1.0:
        raise ValueError("|x| must be < 1")
    inner = integrate_against(nu, lambda r: 1.0 / (1.0 - r * x))
    return complex(inner) / (1.0 - x)


def weight_kernel_coefficients(omega_moments: MomentSequence) -> KernelSeries:
    """``1 / (2 omega_{2n+1})`` for every odd moment present."""
    odd = np.asarray(omega_moments.values[1::2], dtype=float)
    if odd.size == 0:
        raise ValueError("need at least omega_1")
    if np.any(odd <= 0.0):
        raise ValueError("weight not RKHS-admissible: nonpositive moment")
    return KernelSeries(1.0 / (2.0 * odd))


@dataclass(frozen=True)
class MatchResult:
    match: bool
    max_deviation: float
    argmax: int
    first_failure: int | None
    N: int
    tol: float

    def as_dict(self) -> dict:
        return {
            "match": self.match,
            "max_deviation": self.max_deviation,
            "argmax": self.argmax,
            "first_failure": self.first_failure,
            "N": self.N,
            "tol": self.tol,
        }


def kernel_match(
    nu: MeasureOnUnitInterval | BernsteinFunction,
    omega_moments: MomentSequence,
    N: int,
    tol: float,
) -> MatchResult:
    """Compare ``2 omega_{2n+1} c_n`` with 1 for ``n <= N``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if len(omega_moments) < 2 * N + 2:
        raise ValueError(f"need omega_0..omega_{2 * N + 1}, got {len(omega_moments)} moments")
    c = kernel_coefficients(nu, N).values
    odd = omega_moments.values[1 : 2 * N + 2 : 2]
    dev = np.abs(2.0 * odd * c - 1.0)
    bad = np.flatnonzero(dev > tol)
    return MatchResult(
        match=bool(bad.size == 0),
        max_deviation=float(dev.max()),
        argmax=int(dev.argmax()),
        first_failure=int(bad[0]) if bad.size else None,
        N=N,
        tol=tol,
    )
