"""Finite positive measures on [0, 1]: moments, quadrature and the PRW verdict.

A measure is a sum of point masses, Jacobi-type densities
``c r^gamma (1 - r)^beta`` and at most one tabulated density (piecewise linear
on its grid, zero outside it).  Moments of atoms and Jacobi parts are closed
form; everything else goes through :class:`~shimorin.quadrature.QuadratureRule`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Mapping

import numpy as np
from scipy import special

from .quadrature import QuadratureRule

DEFAULT_RULE = QuadratureRule()


class PRWVerdict(str, enum.Enum):
    DIVERGES = "Diverges"
    CONVERGES = "Converges"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Atom:
    at: float
    mass: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.at <= 1.0:
            raise ValueError(f"atom location {self.at} outside [0, 1]")
        if not self.mass > 0.0 or not math.isfinite(self.mass):
            raise ValueError(f"atom mass must be positive and finite, got {self.mass}")


@dataclass(frozen=True)
class JacobiPart:
    """Density ``c r^gamma (1 - r)^beta`` on (0, 1)."""

    c: float
    gamma: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not self.c > 0.0 or not math.isfinite(self.c):
            raise ValueError(f"Jacobi coefficient must be positive, got {self.c}")
        if not self.gamma > -1.0 or not self.beta > -1.0:
            raise ValueError("Jacobi exponents must exceed -1")


@dataclass(frozen=True)
class TabulatedPart:
    r: tuple[float, ...]
    density: tuple[float, ...]

    def __post_init__(self) -> None:
        r = np.asarray(self.r, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if r.ndim != 1 or r.size < 2 or r.shape != d.shape:
            raise ValueError("tabulated part needs matching r/density arrays of length >= 2")
        if not (r[0] > 0.0 and r[-1] < 1.0) or np.any(np.diff(r) <= 0.0):
            raise ValueError("tabulated grid must be strictly increasing inside (0, 1)")
        if np.any(d < 0.0) or not np.all(np.isfinite(d)):
            raise ValueError("tabulated density must be finite and nonnegative")

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.r, self.density, left=0.0, right=0.0)


@dataclass(frozen=True)
class MeasureOnUnitInterval:
    atoms: tuple[Atom, ...] = ()
    jacobi: tuple[JacobiPart, ...] = ()
    tabulated: TabulatedPart | None = None
    rule: QuadratureRule = field(default=DEFAULT_RULE, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "jacobi", tuple(self.jacobi))
        if not self.atoms and not self.jacobi and self.tabulated is None:
            raise ValueError("measure needs at least one part")
        locations = [a.at for a in self.atoms]
        if len(set(locations)) != len(locations):
            raise ValueError("atom locations must be pairwise distinct")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def dirac(cls, at: float, mass: float = 1.0) -> MeasureOnUnitInterval:
        return cls(atoms=(Atom(at, mass),))

    @classmethod
    def lebesgue(cls, c: float = 1.0) -> MeasureOnUnitInterval:
        return cls(jacobi=(JacobiPart(c, 0.0, 0.0),))

    @classmethod
    def jacobi_density(cls, c: float, gamma: float, beta: float) -> MeasureOnUnitInterval:
        return cls(jacobi=(JacobiPart(c, gamma, beta),))

    @classmethod
    def two_point(cls, a: float, b: float) -> MeasureOnUnitInterval:
        """``a delta_0 + b delta_1`` (either coefficient may be zero, not both)."""
        atoms = []
        if a > 0:
            atoms.append(Atom(0.0, a))
        if b > 0:
            atoms.append(Atom(1.0, b))
        return cls(atoms=tuple(atoms))

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> MeasureOnUnitInterval:
        unknown = set(doc) - {"atoms", "jacobi", "tabulated"}
        if unknown:
            raise ValueError(f"unknown measure keys: {sorted(unknown)}")
        atoms = tuple(Atom(float(a["at"]), float(a["mass"])) for a in doc.get("atoms", ()))
        jac = tuple(
            JacobiPart(float(j["c"]), float(j.get("gamma", 0.0)), float(j.get("beta", 0.0)))
            for j in doc.get("jacobi", ())
        )
        tab = doc.get("tabulated")
        tabulated = None
        if tab is not None:
            tabulated = TabulatedPart(
                tuple(float(x) for x in tab["r"]), tuple(float(x) for x in tab["density"])
            )
        return cls(atoms=atoms, jacobi=jac, tabulated=tabulated)

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {}
        if self.atoms:
            doc["atoms"] = [{"at": a.at, "mass": a.mass} for a in self.atoms]
        if self.jacobi:
            doc["jacobi"] = [{"c": j.c, "gamma": j.gamma, "beta": j.beta} for j in self.jacobi]
        if self.tabulated is not None:
            doc["tabulated"] = {"r": list(self.tabulated.r), "density": list(self.tabulated.density)}
        return doc

    def scaled(self, factor: float) -> MeasureOnUnitInterval:
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        tab = self.tabulated
        if tab is not None:
            tab = TabulatedPart(tab.r, tuple(factor * d for d in tab.density))
        return MeasureOnUnitInterval(
            atoms=tuple(Atom(a.at, factor * a.mass) for a in self.atoms),
            jacobi=tuple(JacobiPart(factor * j.c, j.gamma, j.beta) for j in self.jacobi),
            tabulated=tab,
            rule=self.rule,
        )

    def __add__(self, other: MeasureOnUnitInterval) -> MeasureOnUnitInterval:
        masses: dict[float, float] = {}
        for a in self.atoms + other.atoms:
            masses[a.at] = masses.get(a.at, 0.0) + a.mass
        if self.tabulated is not None and other.tabulated is not None:
            raise ValueError("cannot add two tabulated parts")
        return MeasureOnUnitInterval(
            atoms=tuple(Atom(at, m) for at, m in sorted(masses.items())),
            jacobi=self.jacobi + other.jacobi,
            tabulated=self.tabulated if self.tabulated is not None else other.tabulated,
            rule=self.rule,
        )

    # -- derived data -----------------------------------------------------------

    @property
    def mass_at_zero(self) -> float:
        return sum(a.mass for a in self.atoms if a.at == 0.0)

    @property
    def mass_at_one(self) -> float:
        return sum(a.mass for a in self.atoms if a.at == 1.0)

    @cached_property
    def tabulated_rule(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and density-weighted weights covering the tabulated part."""
        tab = self.tabulated
        if tab is None:
            return np.empty(0), np.empty(0)
        ts, ws = [], []
        for lo, hi in zip(tab.r[:-1], tab.r[1:]):
            t, w = self.rule.interval(lo, hi)
            ts.append(t)
            ws.append(w * tab(t))
        return np.concatenate(ts), np.concatenate(ws)

    @property
    def total_mass(self) -> float:
        return moment(self, 0)


# -- operations -----------------------------------------------------------------


def moments(nu: MeasureOnUnitInterval, kmax: int) -> np.ndarray:
    """``nu_0, ..., nu_kmax`` with ``nu_k = int r^k dnu`` (``0^0 = 1``)."""
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    k = np.arange(kmax + 1, dtype=float)
    out = np.zeros(kmax + 1)
    for a in nu.atoms:
        out += a.mass * np.power(a.at, k)
    for j in nu.jacobi:
        out += j.c * special.beta(k + j.gamma + 1.0, j.beta + 1.0)
    if nu.tabulated is not None:
        t, w = nu.tabulated_rule
        logt = np.log(t)
        for start in range(0, kmax + 1, 512):
            kk = k[start : start + 512]
            out[start : start + 512] += np.exp(np.outer(kk, logt)) @ w
    return out


def moment(nu: MeasureOnUnitInterval, k: int) -> float:
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    total = 0.0
    for a in nu.atoms:
        total += a.mass * a.at**k
    for j in nu.jacobi:
        total += j.c * float(special.beta(k + j.gamma + 1.0, j.beta + 1.0))
    if nu.tabulated is not None:
        t, w = nu.tabulated_rule
        total += float(np.dot(w, t**k))
    return total


def jacobi_rule(
    part: JacobiPart, rule: QuadratureRule = DEFAULT_RULE
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for ``int F(t) c t^gamma (1-t)^beta dt``, split at 1/2.

    Each half carries the singular endpoint factor in its Jacobi weight and the
    other (smooth on that half) factor explicitly.
    """
    t0, w0 = rule.interval(0.0, 0.5, left=part.gamma)
    w0 = w0 * (1.0 - t0) ** part.beta
    t1, w1 = rule.interval(0.5, 1.0, right=part.beta)
    w1 = w1 * t1**part.gamma
    return np.concatenate([t0, t1]), part.c * np.concatenate([w0, w1])


def integrate_against(
    nu: MeasureOnUnitInterval, integrand: Callable[[np.ndarray], np.ndarray]
) -> Any:
    """``int integrand dnu``: atoms exactly, densities by Gauss quadrature.

    ``integrand`` must accept numpy arrays; complex-valued integrands are fine.
    """
    total: Any = 0.0
    if nu.atoms:
        locs = np.array([a.at for a in nu.atoms])
        vals = np.asarray(integrand(locs))
        if not np.all(np.isfinite(vals)):
            bad = locs[~np.isfinite(vals)]
            raise ValueError(f"integrand is not finite at atom(s) {bad.tolist()}")
        total = total + np.dot(np.array([a.mass for a in nu.atoms]), vals)
    for part in nu.jacobi:
        t, w = jacobi_rule(part, nu.rule)
        total = total + np.dot(w, integrand(t))
    if nu.tabulated is not None:
        t, w = nu.tabulated_rule
        total = total + np.dot(w, integrand(t))
    return total.item() if isinstance(total, np.generic) else total


def prw_classify(nu: MeasureOnUnitInterval) -> PRWVerdict:
    """Decide whether ``int dnu(r) / (1 - r)`` diverges.

    A tabulated density whose last sample is positive is treated as
    "positive arbitrarily close to 1" and gives ``UNKNOWN`` unless another part
    already forces divergence.
    """
    if nu.total_mass <= 0.0:
        raise ValueError("empty measure")
    if nu.mass_at_one > 0.0 or any(j.beta <= 0.0 for j in nu.jacobi):
        return PRWVerdict.DIVERGES
    if nu.tabulated is not None and nu.tabulated.density[-1] > 0.0:
        return PRWVerdict.UNKNOWN
    return PRWVerdict.CONVERGES
