"""The Bernstein function ``f(s) = int (1 - t^s)/(1 - t) dnu(t)`` and kernel coefficients.

For integer arguments ``f(n + 1) = nu_0 + ... + nu_n``; that partial-sum route is
exact for the closed-form measure family and is what :func:`kernel_coefficients`
uses.  :func:`bernstein_eval` handles arbitrary ``s > 0`` by quadrature of the
bounded integrand and serves both half-integer arguments and as a cross-check.
"""

from __future__ import annotations

import numpy as np

from .measure import DEFAULT_RULE, JacobiPart, MeasureOnUnitInterval, moments
from .quadrature import QuadratureRule
from .sequences import MomentSequence, Provenance


def compensated_cumsum(values: np.ndarray) -> np.ndarray:
    """Running sums with Neumaier compensation."""
    out = np.empty(len(values))
    total = 0.0
    comp = 0.0
    for i, v in enumerate(np.asarray(values, dtype=float).tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out


class BernsteinFunction:
    """``f`` attached to a measure, with the moment prefix computed up front."""

    def __init__(self, nu: MeasureOnUnitInterval, cache_size: int = 512):
        self.nu = nu
        self._moments = moments(nu, cache_size)
        self._moments.setflags(write=False)
        self._partial = compensated_cumsum(self._moments)
        self._partial.setflags(write=False)

    def moment_prefix(self, n: int) -> np.ndarray:
        if n < self._moments.size:
            return self._moments[: n + 1]
        return moments(self.nu, n)

    def partial_sums(self, n: int) -> np.ndarray:
        """``f(1), ..., f(n + 1)``."""
        if n < self._partial.size:
            return self._partial[: n + 1]
        return compensated_cumsum(moments(self.nu, n))

    @property
    def mass(self) -> float:
        return float(self._moments[0])

    def __call__(self, s: float) -> float:
        return bernstein_eval(self, s)


def _ratio(t: np.ndarray, s: float) -> np.ndarray:
    # (1 - t^s)/(1 - t) for t in (0, 1)
    return -np.expm1(s * np.log(t)) / (1.0 - t)


def _jacobi_part(part: JacobiPart, s: float, rule: QuadratureRule) -> float:
    g, b = part.gamma, part.beta
    # [0, 1/2]: t^g (1-t)^(b-1) - t^(g+s) (1-t)^(b-1), each with its own Jacobi weight
    t, w = rule.interval(0.0, 0.5, left=g)
    left = np.dot(w, (1.0 - t) ** (b - 1.0))
    t, w = rule.interval(0.0, 0.5, left=g + s)
    left -= np.dot(w, (1.0 - t) ** (b - 1.0))
    # [1/2, 1] in u = 1 - t, refined toward u = 0 on the scale 1/s
    u, w = rule.dyadic(0.0, 0.5, first=min(0.5, 1.0 / s), left=b)
    ratio = -np.expm1(s * np.log1p(-u)) / u
    right = np.dot(w, (1.0 - u) ** g * ratio)
    return part.c * float(left + right)


def bernstein_eval(f: BernsteinFunction | MeasureOnUnitInterval, s: float) -> float:
    if isinstance(f, MeasureOnUnitInterval):
        nu = f
    else:
        nu = f.nu
    if not s > 0.0:
        raise ValueError(f"Bernstein function argument must be positive, got {s}")
    total = 0.0
    for a in nu.atoms:
        if a.at == 0.0:
            total += a.mass
        elif a.at == 1.0:
            total += a.mass * s
        else:
            total += a.mass * float(_ratio(np.array(a.at), s))
    rule = nu.rule if nu.rule is not None else DEFAULT_RULE
    for part in nu.jacobi:
        total += _jacobi_part(part, s, rule)
    if nu.tabulated is not None:
        t, w = nu.tabulated_rule
        total += float(np.dot(w, _ratio(t, s)))
    return total


def kernel_coefficients(f: BernsteinFunction | MeasureOnUnitInterval, N: int) -> MomentSequence:
    """``c_n = f(n + 1) = nu_0 + ... + nu_n`` for ``n = 0..N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if isinstance(f, MeasureOnUnitInterval):
        f = BernsteinFunction(f, cache_size=max(N, 1))
    return MomentSequence(f.partial_sums(N), Provenance.KERNEL_COEFFICIENTS)
