"""Radial weights, h-profiles and the checks that classify them.

A radial weight ``omega(r)`` and its h-profile are related by
``h(t) = e^{-t} omega(e^{-t/2})``, equivalently ``omega(r) = h(-2 log r) / r^2``.
Under this change of variables ``int_0^inf e^{-nt} h(t) dt = 2 int_0^1 r^{2n+1} omega(r) dr``,
radial log-subharmonicity of ``omega`` becomes convexity of ``log omega(e^{-t/2})``
and boundedness of ``omega`` near 0 becomes ``sup_{t >= T} e^t h(t) < inf``.

``HProfile`` stores ``log h`` on a grid and is piecewise linear in between with
affine continuation outside, so every one of these conditions reduces to a
finite computation on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, NamedTuple

import numpy as np

from .quadrature import QuadratureRule
from .sequences import MomentSequence

TAIL_RULE = QuadratureRule(nodes=48)


# -- h-profiles -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HProfile:
    t: np.ndarray
    log_h: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.t, dtype=float)
        g = np.array(self.log_h, dtype=float)
        if t.ndim != 1 or t.shape != g.shape:
            raise ValueError("t and log_h must be 1-d arrays of equal length")
        if t.size < 3:
            raise ValueError("an h-profile needs at least 3 grid points")
        if t[0] < 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValueError("t-grid must be nonnegative and strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(g))):
            raise ValueError("h-profile values must be finite")
        t.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "log_h", g)

    @classmethod
    def from_function(cls, log_h: Callable[[np.ndarray], np.ndarray], t) -> HProfile:
        t = np.asarray(t, dtype=float)
        return cls(t, np.asarray(log_h(t), dtype=float))

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> HProfile:
        return cls(np.asarray(doc["t"], dtype=float), np.asarray(doc["log_h"], dtype=float))

    def to_dict(self) -> dict[str, list[float]]:
        return {"t": self.t.tolist(), "log_h": self.log_h.tolist()}

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.log_h) / np.diff(self.t)

    @property
    def terminal_slope(self) -> float:
        return float((self.log_h[-1] - self.log_h[-2]) / (self.t[-1] - self.t[-2]))

    def __call__(self, t) -> np.ndarray:
        """``log h(t)`` with affine extrapolation beyond both ends."""
        t = np.asarray(t, dtype=float)
        s = self.slopes
        g = np.interp(t, self.t, self.log_h)
        g = np.where(t > self.t[-1], self.log_h[-1] + s[-1] * (t - self.t[-1]), g)
        return np.where(t < self.t[0], self.log_h[0] + s[0] * (t - self.t[0]), g)

    def h(self, t) -> np.ndarray:
        return np.exp(self(t))


# -- radial weights -------------------------------------------------------------


class RadialWeight:
    """Base for radial weight profiles ``omega(r)`` on (0, 1)."""

    kind = "abstract"
    knots: tuple[float, ...] = ()

    def log_value(self, r) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.value(r))

    def value(self, r) -> np.ndarray:
        return np.exp(self.log_value(r))

    def __call__(self, r) -> np.ndarray:
        return self.value(r)

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantWeight(RadialWeight):
    c: float = 1.0
    kind = "constant"

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError("constant weight must be positive")

    def value(self, r) -> np.ndarray:
        return np.full(np.shape(r), self.c, dtype=float)

    def log_value(self, r) -> np.ndarray:
        return np.full(np.shape(r), math.log(self.c))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class PowerWeight(RadialWeight):
    """``c r^{2p}``."""

    c: float = 1.0
    p: float = 0.0
    kind = "power"

    def __post_init__(self) -> None:
        if not self.c > 0 or not self.p >= 0:
            raise ValueError("power weight needs c > 0 and p >= 0")

    def value(self, r) -> np.ndarray:
        return self.c * np.power(np.asarray(r, dtype=float), 2.0 * self.p)

    def log_value(self, r) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return math.log(self.c) + 2.0 * self.p * np.log(np.asarray(r, dtype=float))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "c": self.c, "p": self.p}


@dataclass(frozen=True, eq=False)
class HWeight(RadialWeight):
    """The weight ``h(-2 log r) / r^2`` induced by an h-profile."""

    profile: HProfile
    kind = "from_h"

    def log_value(self, r) -> np.ndarray:
        t = -2.0 * np.log(np.asarray(r, dtype=float))
        return self.profile(t) + t

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.profile.to_dict()}


@dataclass(frozen=True, eq=False)
class TabulatedWeight(RadialWeight):
    """Samples on a grid in (0, 1); log-linear between positive neighbours,
    linear across zeros, constant beyond the grid ends."""

    r: np.ndarray
    values: np.ndarray
    kind = "tabulated"

    def __post_init__(self) -> None:
        r = np.array(self.r, dtype=float)
        v = np.array(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise ValueError("tabulated weight needs matching r/values of length >= 2")
        if not (r[0] > 0 and r[-1] < 1) or np.any(np.diff(r) <= 0):
            raise ValueError("tabulated weight grid must be strictly increasing in (0, 1)")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("tabulated weight values must be finite and nonnegative")
        r.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)

    @property
    def knots(self) -> tuple[float, ...]:
        return tuple(self.r.tolist())

    def value(self, r) -> np.ndarray:
        x = np.clip(np.asarray(r, dtype=float), self.r[0], self.r[-1])
        i = np.clip(np.searchsorted(self.r, x, side="right") - 1, 0, self.r.size - 2)
        r0, r1 = self.r[i], self.r[i + 1]
        v0, v1 = self.values[i], self.values[i + 1]
        lam = (x - r0) / (r1 - r0)
        lin = v0 + lam * (v1 - v0)
        pos = (v0 > 0) & (v1 > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            geo = np.exp(np.log(np.where(pos, v0, 1.0)) * (1 - lam) + np.log(np.where(pos, v1, 1.0)) * lam)
        return np.where(pos, geo, lin)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "r": self.r.tolist(), "values": self.values.tolist()}


@dataclass(frozen=True, eq=False)
class CallableWeight(RadialWeight):
    """Any vectorised positive function of ``r``; checks fall back to sampling."""

    func: Callable[[np.ndarray], np.ndarray]
    name: str = "callable"
    kind = "callable"

    def value(self, r) -> np.ndarray:
        return np.asarray(self.func(np.asarray(r, dtype=float)), dtype=float)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "name": self.name}


def weight_from_dict(doc: Mapping[str, Any]) -> RadialWeight:
    kind = doc.get("kind")
    if kind == "constant":
        return ConstantWeight(float(doc.get("c", 1.0)))
    if kind == "power":
        return PowerWeight(float(doc.get("c", 1.0)), float(doc.get("p", 0.0)))
    if kind == "from_h":
        return HWeight(HProfile.from_dict(doc))
    if kind == "tabulated":
        return TabulatedWeight(np.asarray(doc["r"], float), np.asarray(doc["values"], float))
    raise ValueError(f"unknown weight kind {kind!r}")


# -- transforms -----------------------------------------------------------------


def _radii(grid) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(grid, dtype=float)
    r = np.exp(-0.5 * t)
    if np.any(t <= 0.0) or not np.all(np.isfinite(t)) or np.any(r <= 0.0):
        raise ValueError("grid points must map into (0, 1): need 0 < t < inf")
    return t, r


def weight_to_h(w: RadialWeight, grid) -> HProfile:
    """``log h(t_i) = -t_i + log omega(e^{-t_i/2})``."""
    t, r = _radii(grid)
    logw = w.log_value(r)
    if not np.all(np.isfinite(logw)):
        raise ValueError("weight must be positive on the image of the grid")
    return HProfile(t, logw - t)


def h_to_weight(hp: HProfile, r: float) -> float:
    if not 0.0 < r < 1.0:
        raise ValueError(f"r = {r} outside (0, 1)")
    t = -2.0 * math.log(r)
    return float(np.exp(hp(t) + t))


# -- convexity / growth ---------------------------------------------------------


class ConvexityReport(NamedTuple):
    margin: float
    passed: bool
    index: int


def _convexity_margin(t: np.ndarray, g: np.ndarray, tol: float) -> ConvexityReport:
    slopes = np.diff(g) / np.diff(t)
    inc = np.diff(slopes)
    i = int(np.argmin(inc))
    return ConvexityReport(float(inc[i]), bool(inc[i] >= -tol), i + 1)


def log_convexity_check(hp: HProfile, tol: float = 1e-10) -> ConvexityReport:
    """Smallest increase between consecutive divided differences of ``log h``."""
    return _convexity_margin(hp.t, hp.log_h, tol)


def log_subharmonic_check(w: RadialWeight, grid, tol: float = 1e-10) -> ConvexityReport:
    """Radial log-subharmonicity as convexity of ``t -> log omega(e^{-t/2})``."""
    t, r = _radii(grid)
    vals = w.value(r)
    if np.any(vals <= 0.0):
        raise ValueError("weight has a nonpositive sample on the grid")
    return _convexity_margin(t, w.log_value(r), tol)


@dataclass(frozen=True)
class GrowthReport:
    T: float
    sup: float
    bounded: bool
    terminal_slope: float

    def as_dict(self) -> dict:
        return {"T": self.T, "sup": self.sup, "bounded": self.bounded, "terminal_slope": self.terminal_slope}


def growth_check(hp: HProfile, T: float, slope_tol: float = 1e-12) -> GrowthReport:
    """Is ``sup_{t >= T} e^t h(t)`` finite for the affinely extended profile?"""
    if T < hp.t[0]:
        raise ValueError("T must not precede the first grid point")
    slope = hp.terminal_slope
    if slope > -1.0 + slope_tol:
        return GrowthReport(T, math.inf, False, slope)
    at_t = float(hp(T)) + T
    later = hp.log_h[hp.t >= T] + hp.t[hp.t >= T]
    best = max([at_t, *later.tolist()])
    return GrowthReport(T, math.exp(best), True, slope)


# -- Laplace moments ------------------------------------------------------------


def _seg_basis(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``A(y) = int_0^1 e^{yu} du`` and ``B(y) = int_0^1 u e^{yu} du`` for ``y <= 0``."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 0.5
    ys = np.where(small, y, 0.0)
    a_ser = np.zeros_like(ys)
    b_ser = np.zeros_like(ys)
    term = np.ones_like(ys)  # y^k / k!
    for k in range(30):
        a_ser += term / (k + 1)
        b_ser += term / (k + 2)
        term = term * ys / (k + 1)
    yl = np.where(small, -1.0, y)
    ey = np.exp(yl)
    a_cf = -np.expm1(yl) / -yl
    b_cf = (1.0 - ey * (1.0 - yl)) / (yl * yl)
    return np.where(small, a_ser, a_cf), np.where(small, b_ser, b_cf)


def segment_integrals(t: np.ndarray, phi: np.ndarray):
    """``int e^{phi}`` over each grid segment with ``phi`` linear, plus the
    derivatives with respect to the left and right endpoint values.

    ``phi`` may carry leading batch dimensions; segments run along the last axis.
    """
    dt = np.diff(t)
    pa, pb = phi[..., :-1], phi[..., 1:]
    left_high = pa >= pb
    top = np.where(left_high, pa, pb)
    A, B = _seg_basis(-np.abs(pb - pa))
    scale = dt * np.exp(top)
    val = scale * A
    d_far = scale * B  # derivative w.r.t. the lower endpoint
    d_near = scale * (A - B)  # derivative w.r.t. the higher endpoint
    d_left = np.where(left_high, d_near, d_far)
    d_right = np.where(left_high, d_far, d_near)
    return val, d_left, d_right


def laplace_table(hp_t: np.ndarray, g: np.ndarray, exponents, jacobian: bool = False):
    """``L_s = int_0^inf e^{-s t + g(t)} dt`` for every ``s`` in ``exponents``.

    Returns values, the closed-form tail contributions past the last node
    (both ``inf`` where the affine tail diverges) and, on request, the Jacobian
    ``dL_s / dg_i``.  Summation order is fixed.
    """
    t = np.asarray(hp_t, dtype=float)
    g = np.asarray(g, dtype=float)
    ss = np.atleast_1d(np.asarray(exponents, dtype=float))
    last = (g[-1] - g[-2]) / (t[-1] - t[-2])
    k = last - ss
    ok = k < 0.0
    kk = np.where(ok, k, -1.0)
    phi = g[None, :] - ss[:, None] * t[None, :]
    seg, d_l, d_r = segment_integrals(t, phi)
    tail = np.exp(phi[:, -1]) / -kk
    parts = [seg, tail[:, None]]
    if t[0] > 0.0:
        # (0, t_0) continues the first segment; treat it as a segment from t_0 down to 0
        ratio = t[0] / (t[1] - t[0])
        far = g[0] - (g[1] - g[0]) * ratio
        ends = np.stack([phi[:, 0], np.full(ss.size, far)], axis=1)
        head, h_near, h_far = segment_integrals(np.array([0.0, t[0]]), ends)
        parts.append(head)
    vals = np.sum(np.concatenate(parts, axis=1), axis=1)
    vals = np.where(ok, vals, np.inf)
    tails = np.where(ok, tail, np.inf)
    jac = None
    if jacobian:
        jac = np.zeros((ss.size, t.size))
        jac[:, :-1] += d_l
        jac[:, 1:] += d_r
        dk = 1.0 / (t[-1] - t[-2])
        jac[:, -1] += tail + tail / -kk * dk
        jac[:, -2] -= tail / -kk * dk
        if t[0] > 0.0:
            jac[:, 0] += h_near[:, 0] + h_far[:, 0] * (1.0 + ratio)
            jac[:, 1] -= h_far[:, 0] * ratio
        jac[~ok] = np.nan
    return vals, tails, jac


class LaplaceValue(NamedTuple):
    value: float
    tail: float


def laplace_moment(hp: HProfile, n: float) -> LaplaceValue:
    """``int_0^inf e^{-n t} h(t) dt`` for piecewise-linear ``log h``.

    ``tail`` is the closed-form contribution of the affine continuation past the
    last grid point.
    """
    if hp.terminal_slope >= n:
        raise ValueError(f"integral diverges: terminal slope {hp.terminal_slope} >= {n}")
    vals, tails, _ = laplace_table(hp.t, hp.log_h, [n])
    return LaplaceValue(float(vals[0]), float(tails[0]))


# -- moments, tails, D-hat ------------------------------------------------------


def _integrate(w: RadialWeight, a: float, b: float, power: float = 0.0, rule: QuadratureRule = TAIL_RULE) -> float:
    """``int_a^b r^power omega(r) dr`` with breakpoints at the weight's knots and
    geometric refinement toward the endpoints 0 and 1."""
    cuts = [a] + [k for k in w.knots if a < k < b] + [b]
    parts = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi == 1.0:
            u, wts = rule.dyadic(0.0, 1.0 - lo, first=(1.0 - lo) * 2.0**-30)
            r = 1.0 - u
        elif lo == 0.0:
            r, wts = rule.dyadic(0.0, hi, first=hi * 2.0**-30)
        else:
            r, wts = rule.interval(lo, hi)
        parts.append(float(np.dot(wts, r**power * w.value(r))))
    return math.fsum(parts)


def weight_moment(w: RadialWeight, n: int) -> float:
    """``omega_n = int_0^1 r^n omega(r) dr``."""
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    if isinstance(w, ConstantWeight):
        return w.c / (n + 1.0)
    if isinstance(w, PowerWeight):
        return w.c / (n + 2.0 * w.p + 1.0)
    if isinstance(w, HWeight):
        hp = w.profile
        if hp.terminal_slope >= 0.0:
            raise ValueError("int r omega(r) dr = inf")
        # omega_n = (1/2) int e^{-(n-1) t / 2} h(t) dt
        return 0.5 * laplace_moment(hp, (n - 1) / 2.0).value
    value = _integrate(w, 0.0, 1.0, power=float(n))
    if not math.isfinite(value):
        raise ValueError("int r omega(r) dr = inf")
    return value


def weight_moments(w: RadialWeight, N: int) -> MomentSequence:
    return MomentSequence(
        np.array([weight_moment(w, n) for n in range(N + 1)]), "omega_moments"
    )


def weight_tail(w: RadialWeight, r: float) -> float:
    """``hat omega(r) = int_r^1 omega(s) ds``."""
    if isinstance(w, ConstantWeight):
        return w.c * (1.0 - r)
    if isinstance(w, PowerWeight):
        q = 2.0 * w.p + 1.0
        if r == 0.0:
            return w.c / q
        return -w.c * math.expm1(q * math.log(r)) / q
    return _integrate(w, r, 1.0)


@dataclass(frozen=True)
class DhatReport:
    constant: float
    form: str
    argmax: float
    passed: bool
    ceiling: float

    def as_dict(self) -> dict:
        return {
            "constant": self.constant,
            "form": self.form,
            "argmax": self.argmax,
            "passed": self.passed,
            "ceiling": self.ceiling,
        }


def dhat_moment_check(
    omega_moments: MomentSequence, ceiling: float = 2.0, n_check: int | None = None
) -> DhatReport:
    """``C = max_{1 <= n <= n_check} omega_n / omega_{2n}``."""
    m = np.asarray(omega_moments.values, dtype=float)
    if np.any(m <= 0.0):
        raise ValueError("moments must be positive")
    top = (m.size - 1) // 2 if n_check is None else n_check
    if top < 1 or 2 * top > m.size - 1:
        raise ValueError(f"need omega_0..omega_{2 * max(top, 1)}")
    n = np.arange(1, top + 1)
    ratio = m[n] / m[2 * n]
    i = int(np.argmax(ratio))
    C = float(ratio[i])
    return DhatReport(C, "moment-ratio", float(n[i]), C <= ceiling, ceiling)


def dhat_tail_check(w: RadialWeight, r_grid, ceiling: float = 2.0) -> DhatReport:
    """``C = max hat omega(r) / hat omega((1 + r)/2)`` over the grid."""
    r = np.asarray(r_grid, dtype=float)
    if np.any((r < 0.0) | (r >= 1.0)):
        raise ValueError("radii must lie in [0, 1)")
    best, arg = -math.inf, math.nan
    for ri in r.tolist():
        num = weight_tail(w, ri)
        den = weight_tail(w, 0.5 * (1.0 + ri))
        if not (num > 0.0 and den > 0.0):
            raise ValueError(f"not RKHS-admissible: vanishing tail at r = {ri}")
        ratio = num / den
        if ratio > best:
            best, arg = ratio, ri
    return DhatReport(best, "tail", arg, best <= ceiling, ceiling)


def rkhs_check(w: RadialWeight) -> bool:
    """``omega([r, 1)) > 0`` for every ``r < 1``."""
    if isinstance(w, (ConstantWeight, PowerWeight, HWeight)):
        return True
    if isinstance(w, TabulatedWeight):
        return bool(w.values[-1] > 0.0)
    r = 1.0 - 2.0 ** -np.arange(1, 41, dtype=float)
    return bool(np.all(w.value(r) > 0.0))
