from __future__ import annotations

import mpmath as mp
import numpy as np
import pytest

from shimorin.measure import Atom, JacobiPart, MeasureOnUnitInterval, PRWVerdict, TabulatedPart

M = MeasureOnUnitInterval

# name -> (measure, expected PRW verdict)
CATALOGUE = {
    "delta0": (M.dirac(0.0), PRWVerdict.CONVERGES),
    "delta1": (M.dirac(1.0), PRWVerdict.DIVERGES),
    "lebesgue": (M.lebesgue(), PRWVerdict.DIVERGES),
    "jacobi_g05_b0": (M.jacobi_density(1.5, 0.5, 0.0), PRWVerdict.DIVERGES),
    "jacobi_gm05_bm05": (M.jacobi_density(0.7, -0.5, -0.5), PRWVerdict.DIVERGES),
    "jacobi_b05": (M.jacobi_density(1.0, 0.0, 0.5), PRWVerdict.CONVERGES),
    "delta0+delta1": (M.two_point(1.0, 1.0), PRWVerdict.DIVERGES),
    "2delta0+delta1": (M.two_point(2.0, 1.0), PRWVerdict.DIVERGES),
    "atoms_mixed": (
        M(atoms=(Atom(0.0, 0.3), Atom(0.5, 0.4), Atom(0.9, 0.2))),
        PRWVerdict.CONVERGES,
    ),
    "half_atom+lebesgue": (M.dirac(0.5, 0.5) + M.lebesgue(), PRWVerdict.DIVERGES),
    "tab_hat": (M(tabulated=TabulatedPart((0.2, 0.5, 0.8), (0.0, 2.0, 0.0))), PRWVerdict.CONVERGES),
    "tab_near_one+delta1": (
        M(atoms=(Atom(1.0, 0.5),), tabulated=TabulatedPart((0.1, 0.6, 0.95), (1.0, 0.5, 0.25))),
        PRWVerdict.DIVERGES,
    ),
    "tab_near_one": (
        M(tabulated=TabulatedPart((0.1, 0.6, 0.95), (1.0, 0.5, 0.25))),
        PRWVerdict.UNKNOWN,
    ),
    "jacobi+atom1": (
        M(atoms=(Atom(1.0, 0.25),), jacobi=(JacobiPart(2.0, 1.0, 0.5),)),
        PRWVerdict.DIVERGES,
    ),
}

NAMES = sorted(CATALOGUE)
DIVERGENT = [n for n in NAMES if CATALOGUE[n][1] is PRWVerdict.DIVERGES]
# divergent and free of tabulated parts: every route has a closed-form oracle
CLOSED_FORM = [n for n in NAMES if CATALOGUE[n][0].tabulated is None]


@pytest.fixture(params=NAMES)
def any_measure(request):
    return request.param, CATALOGUE[request.param][0]


@pytest.fixture(params=DIVERGENT)
def divergent_measure(request):
    return request.param, CATALOGUE[request.param][0]


# -- independent oracles --------------------------------------------------------

mp.mp.dps = 40


def jacobi_f_oracle(c: float, gamma: float, beta: float, s: float) -> float:
    """``c int (1 - t^s)/(1 - t) t^gamma (1 - t)^beta dt`` via Gamma functions.

    For beta != 0 this is ``c Gamma(beta) [Gamma(g+1)/Gamma(g+1+beta) -
    Gamma(g+s+1)/Gamma(g+s+1+beta)]`` (analytic continuation covers
    -1 < beta < 0); at beta = 0 it is ``c (psi(g+s+1) - psi(g+1))``.
    """
    g, b, s_ = mp.mpf(gamma), mp.mpf(beta), mp.mpf(s)
    if beta == 0.0:
        val = mp.digamma(g + s_ + 1) - mp.digamma(g + 1)
    else:
        val = mp.gamma(b) * (
            mp.gamma(g + 1) * mp.rgamma(g + 1 + b) - mp.gamma(g + s_ + 1) * mp.rgamma(g + s_ + 1 + b)
        )
    return float(c * val)


def f_oracle(nu: MeasureOnUnitInterval, s: float) -> float:
    """Bernstein function of an atoms + Jacobi measure, independently of the package."""
    if nu.tabulated is not None:
        raise ValueError("no closed form for tabulated parts")
    total = mp.mpf(0)
    for a in nu.atoms:
        if a.at == 1.0:
            total += a.mass * s
        else:
            total += a.mass * (1 - mp.mpf(a.at) ** s) / (1 - mp.mpf(a.at))
    for j in nu.jacobi:
        total += jacobi_f_oracle(j.c, j.gamma, j.beta, s)
    return float(total)


def moment_oracle(nu: MeasureOnUnitInterval, k: int) -> float:
    """Moments by mpmath adaptive quadrature (densities) and direct sums (atoms)."""
    total = mp.mpf(0)
    for a in nu.atoms:
        total += a.mass * (mp.mpf(a.at) ** k if k else 1)
    for j in nu.jacobi:
        total += j.c * mp.quad(lambda t: t ** (k + j.gamma) * (1 - t) ** j.beta, [0, 0.5, 1])
    if nu.tabulated is not None:
        r, d = nu.tabulated.r, nu.tabulated.density
        for (r0, r1), (d0, d1) in zip(zip(r[:-1], r[1:]), zip(d[:-1], d[1:])):
            total += mp.quad(lambda t: t**k * (d0 + (d1 - d0) * (t - r0) / (r1 - r0)), [r0, r1])
    return float(total)


def harmonic(n: int) -> float:
    return float(mp.harmonic(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
