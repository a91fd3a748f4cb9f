"""Gauss rules on subintervals of [0, 1] with optional algebraic endpoint weights."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg, special

DEFAULT_NODES = 256


def golub_welsch(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes/weights for the weight ``(1 - x)^a (1 + x)^b`` on [-1, 1].

    scipy's ``roots_jacobi`` drifts to ~1e-10 relative error for exponents
    near -1 at a few hundred nodes; the symmetric tridiagonal eigenproblem
    does not.
    """
    k = np.arange(n, dtype=float)
    ab = a + b
    diag = np.empty(n)
    diag[0] = (b - a) / (ab + 2.0)
    kk = k[1:]
    diag[1:] = (b * b - a * a) / ((2 * kk + ab) * (2 * kk + ab + 2.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = (
            4.0 * kk * (kk + a) * (kk + b) * (kk + ab)
            / ((2 * kk + ab) ** 2 * (2 * kk + ab + 1.0) * (2 * kk + ab - 1.0))
        )
    if n > 1:
        # k = 1: (k + ab) / (2k + ab - 1) == 1, which is 0/0 when a + b = -1
        sq[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) ** 2 * (3.0 + ab))
    off = np.sqrt(sq)
    x, vecs = linalg.eigh_tridiagonal(diag, off)
    mass = 2.0 ** (ab + 1.0) * special.beta(a + 1.0, b + 1.0)
    return x, mass * vecs[0] ** 2


@lru_cache(maxsize=256)
def _reference_rule(n: int, left: float, right: float) -> tuple[np.ndarray, np.ndarray]:
    # weight (1 - x)^right (1 + x)^left on [-1, 1]
    if left == 0.0 and right == 0.0:
        x, w = special.roots_legendre(n)
    else:
        x, w = golub_welsch(n, right, left)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre / Gauss-Jacobi rule factory.

    ``interval(a, b, left, right)`` returns nodes and weights for
    ``int_a^b (t - a)^left (b - t)^right F(t) dt``; the algebraic factor is
    absorbed into the weights so ``F`` only needs to be smooth.
    """

    nodes: int = DEFAULT_NODES
    scheme: str = "gauss-jacobi"

    def __post_init__(self) -> None:
        if self.nodes < 1:
            raise ValueError("node count must be positive")

    def interval(
        self, a: float, b: float, left: float = 0.0, right: float = 0.0
    ) -> tuple[np.ndarray, np.ndarray]:
        if not b > a:
            raise ValueError("empty interval")
        x, w = _reference_rule(self.nodes, float(left), float(right))
        half = 0.5 * (b - a)
        t = a + half * (1.0 + x)
        return t, w * half ** (left + right + 1.0)

    def dyadic(
        self, a: float, b: float, first: float, left: float = 0.0
    ) -> tuple[np.ndarray, np.ndarray]:
        """Rule on ``[a, b]`` refined geometrically toward ``a``.

        Pieces are ``[a, a+first], [a+first, a+2 first], [a+2 first, a+4 first], ...``;
        the first piece uses a Jacobi rule for ``(t - a)^left``, later pieces
        are Legendre with the (now smooth) factor folded into the weights.
        """
        first = min(first, b - a)
        ts, ws = [], []
        t, w = self.interval(a, a + first, left=left)
        ts.append(t)
        ws.append(w)
        lo, width = a + first, first
        while lo < b:
            hi = min(b, lo + width)
            t, w = self.interval(lo, hi)
            ts.append(t)
            ws.append(w * (t - a) ** left)
            lo, width = hi, 2.0 * width
        return np.concatenate(ts), np.concatenate(ws)
