"""Log-convex h-profile fitting against the targets ``1 / f(n + 1)``.

Given ``nu`` the solver looks for ``h`` with ``log h`` convex, terminal slope
``<= -1`` (so ``e^t h(t)`` stays bounded) and Laplace moments
``int e^{-nt} h(t) dt = 1 / f(n + 1)`` for ``n = 0..N-1``.  Verdicts only ever
speak about the finite truncation that was actually solved.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .bernstein import BernsteinFunction
from .measure import MeasureOnUnitInterval, PRWVerdict, prw_classify
from .weights import (
    ConvexityReport,
    GrowthReport,
    HProfile,
    growth_check,
    laplace_moment,
    laplace_table,
    log_convexity_check,
)


def default_grid(points: int = 48, t_max: float = 12.0, t_first: float = 1e-3) -> np.ndarray:
    """``0`` followed by ``points - 1`` geometrically spaced nodes up to ``t_max``."""
    if points < 3:
        raise ValueError("need at least 3 grid points")
    return np.concatenate([[0.0], np.geomspace(t_first, t_max, points - 1)])


class FitVerdict(str, enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible-at-N"
    REJECTED = "PrecheckRejected"


@dataclass(frozen=True)
class PrecheckResult:
    passed: bool
    prw: PRWVerdict
    warning: str | None = None


def precheck(nu: MeasureOnUnitInterval) -> PrecheckResult:
    verdict = prw_classify(nu)
    if verdict is PRWVerdict.UNKNOWN:
        return PrecheckResult(True, verdict, "PRW divergence undecided; continuing")
    return PrecheckResult(verdict is PRWVerdict.DIVERGES, verdict)


@dataclass(frozen=True, eq=False)
class FitProblem:
    nu: MeasureOnUnitInterval
    N: int = 24
    grid: np.ndarray = field(default_factory=default_grid)
    eps_feas: float = 1e-8
    max_iter: int = 500
    convexity_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError("need at least 2 moment targets")
        grid = np.array(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 3 or grid[0] < 0 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be nonnegative, strictly increasing, >= 3 points")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True, eq=False)
class FitResult:
    verdict: FitVerdict
    profile: HProfile | None = None
    targets: np.ndarray | None = None
    achieved: np.ndarray | None = None
    residuals: np.ndarray | None = None
    convexity: ConvexityReport | None = None
    growth: GrowthReport | None = None
    iterations: int = 0
    warnings: tuple[str, ...] = ()

    @property
    def max_residual(self) -> float:
        if self.residuals is None:
            return math.inf
        return float(np.max(self.residuals))

    def residual_rows(self) -> list[tuple[int, float, float, float]]:
        if self.residuals is None:
            return []
        return [
            (n, float(m), float(a), float(r))
            for n, (m, a, r) in enumerate(zip(self.targets, self.achieved, self.residuals))
        ]

    def as_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "max_residual": self.max_residual if self.residuals is not None else None,
            "iterations": self.iterations,
            "warnings": list(self.warnings),
        }
        if self.profile is not None:
            out["profile"] = self.profile.to_dict()
            out["convexity_margin"] = self.convexity.margin
            out["growth"] = self.growth.as_dict()
        return out


# -- projection -----------------------------------------------------------------


def pool_adjacent_violators(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted least-squares nondecreasing fit."""
    means: list[float] = []
    wsum: list[float] = []
    sizes: list[int] = []
    for v, w in zip(values.tolist(), weights.tolist()):
        means.append(v)
        wsum.append(w)
        sizes.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            w_new = wsum[-2] + wsum[-1]
            m_new = (means[-2] * wsum[-2] + means[-1] * wsum[-1]) / w_new
            size = sizes[-2] + sizes[-1]
            del means[-1], wsum[-1], sizes[-1]
            means[-1], wsum[-1], sizes[-1] = m_new, w_new, size
    return np.repeat(means, sizes)


def project_log_convex(t: np.ndarray, g: np.ndarray, max_slope: float = -1.0) -> np.ndarray:
    """Make the slopes of ``g`` nondecreasing and ``<= max_slope``, keeping ``g_0``."""
    dt = np.diff(t)
    slopes = pool_adjacent_violators(np.diff(g) / dt, dt)
    slopes = np.minimum(slopes, max_slope)
    out = np.empty_like(g)
    out[0] = g[0]
    out[1:] = g[0] + np.cumsum(slopes * dt)
    return out


# -- solver ---------------------------------------------------------------------


def _residuals(t, g, scale, exponents, jacobian=False):
    vals, _, jac = laplace_table(t, g, exponents, jacobian=jacobian)
    r = scale * vals - 1.0
    if jacobian:
        jac = scale[:, None] * jac
    return r, vals, jac


def _objective(r: np.ndarray) -> float:
    if not np.all(np.isfinite(r)):
        return math.inf
    return math.fsum((r * r).tolist())


class _ConvexCoordinates:
    """``g = g_0 + cumsum(slopes * dt)`` with the last slope ``-1 - e`` and
    earlier slopes decreasing by ``d_i`` going backwards.

    In ``x = (g_0, e, d_1, ..., d_{M-1})`` the cone {nondecreasing slopes,
    terminal slope <= -1} is just ``x[1:] >= 0``.
    """

    def __init__(self, t: np.ndarray):
        dt = np.diff(t)
        m = dt.size
        # slope_i = -1 - e - sum_{j >= i} d_j ; d_j joins segments j and j+1
        S = np.zeros((m, m))  # d slopes / d (e, d_1..d_{m-1})
        S[:, 0] = -1.0
        for i in range(m):
            S[i, 1 + i : m] = -1.0
        G = np.zeros((m + 1, m + 1))  # d g / d x
        G[:, 0] = 1.0
        G[1:, 1:] = np.cumsum(dt[:, None] * S, axis=0)
        self.dt = dt
        self.G = G
        self.offset = np.concatenate([[0.0], np.cumsum(-dt)])

    def to_g(self, x: np.ndarray) -> np.ndarray:
        return self.offset + self.G @ x

    def from_g(self, g: np.ndarray) -> np.ndarray:
        slopes = np.diff(g) / self.dt
        x = np.empty(g.size)
        x[0] = g[0]
        x[1] = -1.0 - slopes[-1]
        x[2:] = np.diff(slopes)
        return np.maximum(x, np.r_[-np.inf, np.zeros(g.size - 1)])


def _polish(t, coeffs, exponents, coords, x, max_iter):
    """Projected Levenberg-Marquardt in convex coordinates from ``x``."""

    def evaluate(x):
        g = coords.to_g(x)
        r, _, Jg = _residuals(t, g, coeffs, exponents, jacobian=True)
        return g, r, Jg @ coords.G

    g, r, J = evaluate(x)
    obj = _objective(r)
    damping = 1e-3
    bounded = np.r_[False, np.ones(x.size - 1, dtype=bool)]
    it = 0
    while it < max_iter and obj > 0.0:
        it += 1
        grad = J.T @ r
        free = ~(bounded & (x <= 0.0) & (grad > 0.0))
        Jf = J[:, free]
        # column scaling a la Marquardt; floor keeps dead columns regular
        scale = np.sqrt(np.maximum(np.sum(Jf * Jf, axis=0), 1e-30))
        rhs = np.concatenate([-r, np.zeros(scale.size)])
        accepted = False
        while damping < 1e20:
            # augmented least squares, never the normal equations: J is
            # numerically rank deficient and J^T J would square that
            aug = np.vstack([Jf, np.diag(math.sqrt(damping) * scale)])
            step = np.zeros_like(x)
            step[free] = np.linalg.lstsq(aug, rhs, rcond=None)[0]
            trial = np.where(bounded, np.maximum(x + step, 0.0), x + step)
            g_new, r_new, J_new = evaluate(trial)
            obj_new = _objective(r_new)
            if obj_new < obj:
                accepted = True
                break
            damping *= 4.0
        if not accepted:
            break
        improvement = math.sqrt(obj) - math.sqrt(obj_new)
        x, g, r, J, obj = trial, g_new, r_new, J_new, obj_new
        damping = max(damping / 3.0, 1e-15)
        if improvement < 1e-14:
            break
    return g, r, it


MIXTURE_RATES = np.geomspace(1.0, 1e3, 300)


def mixture_start(t: np.ndarray, targets: np.ndarray, rates: np.ndarray = MIXTURE_RATES) -> np.ndarray:
    """``log`` of the best nonnegative mix of ``e^{-lambda t}`` sampled on ``t``.

    Every such mix with ``lambda >= 1`` is log-convex with terminal slope
    ``<= -1``, so it is a natural starting point inside the cone.
    """
    from scipy import optimize

    n = np.arange(targets.size, dtype=float)
    # relative residuals: row n of the design divided by its target
    design = 1.0 / (n[:, None] + rates[None, :]) / targets[:, None]
    rho, _ = optimize.nnls(design, np.ones(targets.size), maxiter=50 * rates.size)
    if not np.any(rho > 0):
        raise ValueError("empty mixture")
    return np.log(np.exp(-np.outer(t, rates)) @ rho)


def fit_h(problem: FitProblem) -> FitResult:
    """Damped Gauss-Newton on ``log h`` with the convexity cone enforced.

    Start from the single exponential ``alpha e^{-beta t}`` that matches the
    first two targets, projected onto the cone (slope pooling, terminal slope
    clamped to ``-1``).  Then iterate Levenberg-Marquardt steps in
    :class:`_ConvexCoordinates`: coordinates sitting on their bound with the
    gradient pushing outward are frozen, the rest take the damped step, and the
    trial is projected back by clipping at zero.  A trial is accepted only if it
    lowers the sum of squared relative residuals.

    If that run stalls above ``eps_feas`` a second run starts from
    :func:`mixture_start`, and the better of the two is kept.
    """
    check = precheck(problem.nu)
    if not check.passed:
        return FitResult(FitVerdict.REJECTED, warnings=(f"PRW: {check.prw.value}",))
    notes = (check.warning,) if check.warning else ()

    f = BernsteinFunction(problem.nu, cache_size=problem.N)
    coeffs = np.asarray(f.partial_sums(problem.N - 1), dtype=float)  # f(1..N)
    targets = 1.0 / coeffs
    exponents = np.arange(problem.N, dtype=float)
    t = problem.grid
    coords = _ConvexCoordinates(t)

    m0, m1 = targets[0], targets[1]
    beta = m1 / (m0 - m1)
    alpha = beta * m0
    x = coords.from_g(project_log_convex(t, math.log(alpha) - beta * t))
    g, r, it = _polish(t, coeffs, exponents, coords, x, problem.max_iter)

    if not np.max(np.abs(r)) <= problem.eps_feas:
        x = coords.from_g(project_log_convex(t, mixture_start(t, targets)))
        g2, r2, it2 = _polish(t, coeffs, exponents, coords, x, problem.max_iter)
        it += it2
        if _objective(r2) < _objective(r):
            g, r = g2, r2

    profile = HProfile(t, g)
    achieved = (r + 1.0) / coeffs
    residuals = np.abs(r)
    convexity = log_convexity_check(profile, problem.convexity_tol)
    growth = growth_check(profile, T=max(1.0, float(t[0])))
    feasible = (
        float(np.max(residuals)) <= problem.eps_feas and convexity.passed and growth.bounded
    )
    return FitResult(
        FitVerdict.FEASIBLE if feasible else FitVerdict.INFEASIBLE,
        profile=profile,
        targets=targets,
        achieved=achieved,
        residuals=residuals,
        convexity=convexity,
        growth=growth,
        iterations=it,
        warnings=notes,
    )


# -- certificate ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Certificate:
    residuals: np.ndarray
    convexity: ConvexityReport
    growth: GrowthReport
    mass_identity: float
    certified: bool
    failures: tuple[str, ...]

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    def as_dict(self) -> dict:
        return {
            "certified": self.certified,
            "failures": list(self.failures),
            "max_residual": self.max_residual,
            "convexity_margin": self.convexity.margin,
            "growth": self.growth.as_dict(),
            "mass_identity": self.mass_identity,
        }


def certify(
    nu: MeasureOnUnitInterval,
    hp: HProfile,
    N: int,
    tol: float = 1e-8,
    convexity_tol: float = 1e-10,
    T: float | None = None,
) -> Certificate:
    """Re-check every condition on ``hp`` from scratch, one moment at a time."""
    f = BernsteinFunction(nu, cache_size=max(N, 1))
    coeffs = f.partial_sums(N - 1)
    res = np.empty(N)
    for n in range(N):
        try:
            L = laplace_moment(hp, float(n)).value
        except ValueError:
            L = math.inf
        res[n] = abs(coeffs[n] * L - 1.0)
    convexity = log_convexity_check(hp, convexity_tol)
    growth = growth_check(hp, T=max(1.0, float(hp.t[0])) if T is None else T)
    try:
        mass = f.mass * laplace_moment(hp, 0.0).value
    except ValueError:
        mass = math.inf
    failures = []
    if not float(np.max(res)) <= tol:
        failures.append("moments")
    if not convexity.passed:
        failures.append("convexity")
    if not growth.bounded:
        failures.append("growth")
    if not abs(mass - 1.0) <= tol:
        failures.append("mass-identity")
    return Certificate(res, convexity, growth, mass, not failures, tuple(failures))
