"""Reciprocal partial sums, complete monotonicity and the induced weight moments.

If ``(a_n)`` are the moments of a nonzero measure ``nu`` then
``b_n = 1/(a_0 + ... + a_n) = 1/f(n+1)`` are again Hausdorff moments (of a
measure ``mu``), and the radial weight reproducing ``S_nu`` has moments
``omega_n = 1/(2 f((n+1)/2))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .bernstein import BernsteinFunction, bernstein_eval, compensated_cumsum
from .measure import MeasureOnUnitInterval, PRWVerdict, prw_classify
from .sequences import MomentSequence, Provenance


class NotBergmanKernel(ValueError):
    pass


def reciprocal_partial_sums(a: MomentSequence) -> MomentSequence:
    sums = compensated_cumsum(a.values)
    if np.any(sums <= 0.0):
        raise ValueError("not a positive sequence: nonpositive partial sum")
    return MomentSequence(1.0 / sums, Provenance.MU_MOMENTS)


@dataclass(frozen=True)
class CMReport:
    min_value: float
    passed: bool
    order: int
    index: int
    K: int
    tol: float

    def as_dict(self) -> dict:
        return {
            "min_value": self.min_value,
            "passed": self.passed,
            "argmin_order": self.order,
            "argmin_index": self.index,
            "K": self.K,
            "tol": self.tol,
        }


def complete_monotonicity_report(b: MomentSequence, K: int, tol: float = 1e-12) -> CMReport:
    """Minimum of ``(-1)^k Delta^k b_n`` over ``0 <= k <= K`` and all valid ``n``."""
    if K < 1:
        raise ValueError("K must be at least 1")
    diff = np.asarray(b.values, dtype=float)
    if diff.size < K + 1:
        raise ValueError(f"sequence too short for K={K}: length {diff.size}")
    best, where = np.inf, (0, 0)
    for k in range(K + 1):
        signed = diff if k % 2 == 0 else -diff
        i = int(np.argmin(signed))
        if signed[i] < best:
            best, where = float(signed[i]), (k, i)
        diff = diff[1:] - diff[:-1]
    return CMReport(best, best >= -tol, where[0], where[1], K, tol)


def omega_moments_from_nu(
    nu: MeasureOnUnitInterval | BernsteinFunction, N: int
) -> MomentSequence:
    """``omega_0..omega_N`` of the weight whose Bergman kernel is ``S_nu``."""
    f = nu if isinstance(nu, BernsteinFunction) else BernsteinFunction(nu)
    verdict = prw_classify(f.nu)
    if verdict is PRWVerdict.CONVERGES:
        raise NotBergmanKernel(
            "Shimorin kernel is not a Bergman kernel: int dnu/(1-r) converges"
        )
    notes = ()
    if verdict is PRWVerdict.UNKNOWN:
        notes = ("PRW divergence undecided for tabulated density near 1",)
    if N < 0:
        raise ValueError("N must be nonnegative")
    # odd n: (n+1)/2 is an integer, use the exact partial sums
    integer_values = f.partial_sums(N // 2 + 1)
    out = np.empty(N + 1)
    for n in range(N + 1):
        if n % 2 == 1:
            fs = integer_values[(n + 1) // 2 - 1]
        else:
            fs = bernstein_eval(f, (n + 1) / 2.0)
        out[n] = 1.0 / (2.0 * fs)
    return MomentSequence(out, Provenance.OMEGA_MOMENTS, warnings=notes)


@dataclass(frozen=True, eq=False)
class DiscreteFit:
    locations: np.ndarray
    masses: np.ndarray
    residual: float
    converged: bool

    def cumulative(self, r: np.ndarray) -> np.ndarray:
        """Reconstructed ``mu([0, r])``."""
        r = np.asarray(r, dtype=float)
        order = np.argsort(self.locations)
        loc, cum = self.locations[order], np.cumsum(self.masses[order])
        idx = np.searchsorted(loc, r, side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)


def fit_discrete_measure(
    target: MomentSequence,
    support_grid,
    tol: float = 1e-8,
    ridge: float = 1e-14,
) -> DiscreteFit:
    """Nonnegative masses on ``support_grid`` matching the target moments.

    Solves ``min ||V m - target||^2 + ridge ||m||^2`` over ``m >= 0`` with
    Lawson-Hanson NNLS.  The tiny ridge picks the spread-out solution among
    (near-)feasible ones instead of a sparse vertex; it costs roughly
    ``sqrt(ridge)`` in residual.  ``converged`` reports ``residual <= tol``.
    """
    grid = np.asarray(support_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("support grid must be a nonempty 1-d array")
    if np.any((grid < 0.0) | (grid > 1.0)):
        raise ValueError("support grid must lie in [0, 1]")
    m = np.asarray(target.values, dtype=float)
    k = np.arange(m.size, dtype=float)
    vander = np.power(grid[None, :], k[:, None])
    if ridge > 0.0:
        design = np.vstack([vander, np.sqrt(ridge) * np.eye(grid.size)])
        rhs = np.concatenate([m, np.zeros(grid.size)])
    else:
        design, rhs = vander, m
    masses, _ = optimize.nnls(design, rhs, maxiter=50 * grid.size)
    residual = float(np.linalg.norm(vander @ masses - m))
    return DiscreteFit(grid.copy(), masses, residual, residual <= tol)
