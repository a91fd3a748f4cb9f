from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from shimorin.weights import (
    CallableWeight,
    ConstantWeight,
    HProfile,
    HWeight,
    PowerWeight,
    TabulatedWeight,
    dhat_moment_check,
    dhat_tail_check,
    growth_check,
    h_to_weight,
    laplace_moment,
    log_convexity_check,
    log_subharmonic_check,
    rkhs_check,
    weight_from_dict,
    weight_moment,
    weight_moments,
    weight_tail,
    weight_to_h,
)
from shimorin.sequences import MomentSequence

GRID = np.geomspace(0.01, 12.0, 40)
R = np.exp(-0.5 * GRID)


def profile(log_h, t=GRID):
    return HProfile.from_function(log_h, t)


ALL_WEIGHTS = {
    "constant": ConstantWeight(2.0),
    "power": PowerWeight(0.5, 1.5),
    "from_h": HWeight(profile(lambda t: -2.0 * t + 0.3 * np.maximum(t - 3.0, 0.0))),
    "tabulated": TabulatedWeight(np.array([0.1, 0.4, 0.7, 0.95]), np.array([1.0, 2.0, 0.5, 3.0])),
    "callable": CallableWeight(lambda r: np.exp(-r), "exp(-r)"),
}


def test_weight_to_h_examples():
    np.testing.assert_allclose(weight_to_h(ConstantWeight(), GRID).log_h, -GRID, rtol=1e-15)
    np.testing.assert_allclose(weight_to_h(PowerWeight(1.0, 1.0), GRID).log_h, -2 * GRID, rtol=1e-14)
    for a in (0.0, 1.0, 2.0):
        for b in (1.0, 2.0):
            hp = weight_to_h(PowerWeight(1.0 / b, a / b), GRID)
            np.testing.assert_allclose(hp.log_h, -(1 + a / b) * GRID - math.log(b), rtol=1e-14, atol=1e-15)


def test_weight_to_h_rejects_grid_outside_disk():
    with pytest.raises(ValueError):
        weight_to_h(ConstantWeight(), [0.0, 1.0, 2.0])


def test_h_to_weight_examples():
    assert h_to_weight(profile(lambda t: -t), 0.3) == pytest.approx(1.0, rel=1e-14)
    assert h_to_weight(profile(lambda t: -2 * t), 0.5) == pytest.approx(0.25, rel=1e-14)
    for r in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            h_to_weight(profile(lambda t: -t), r)


@pytest.mark.parametrize("name", sorted(ALL_WEIGHTS))
def test_transform_inversion(name):
    w = ALL_WEIGHTS[name]
    hp = weight_to_h(w, GRID)
    back = np.array([h_to_weight(hp, r) for r in R])
    np.testing.assert_allclose(back, w.value(R), rtol=1e-12)


def test_log_convexity_examples():
    rep = log_convexity_check(profile(lambda t: -t))
    assert rep.passed and abs(rep.margin) <= 1e-15
    t = np.linspace(0.0, 4.0, 30)
    assert log_convexity_check(HProfile(t, t**2)).passed
    rep = log_convexity_check(HProfile(t, -(t**2)))
    assert not rep.passed and rep.margin < 0


def test_log_subharmonic_examples():
    assert log_subharmonic_check(ConstantWeight(), GRID).passed
    for a in (0.0, 0.5, 3.0):
        assert log_subharmonic_check(PowerWeight(1.0, a), GRID).passed
    rep = log_subharmonic_check(CallableWeight(lambda r: np.exp(-r)), GRID)
    assert not rep.passed and rep.margin < 0
    with pytest.raises(ValueError):
        log_subharmonic_check(CallableWeight(lambda r: r - 0.5), GRID)


@pytest.mark.parametrize("name", sorted(ALL_WEIGHTS))
def test_convexity_equivalence(name):
    # log omega(e^{-t/2}) and log h(t) differ by the affine term -t
    w = ALL_WEIGHTS[name]
    a = log_subharmonic_check(w, GRID)
    b = log_convexity_check(weight_to_h(w, GRID))
    assert a.margin == pytest.approx(b.margin, abs=1e-12)
    assert a.passed == b.passed


def test_growth_examples():
    rep = growth_check(profile(lambda t: -t), T=1.0)
    assert rep.bounded and rep.sup == pytest.approx(1.0, rel=1e-14)
    assert not growth_check(profile(lambda t: -t / 2), T=1.0).bounded
    rep = growth_check(profile(lambda t: -2 * t), T=1.0)
    assert rep.bounded and rep.sup == pytest.approx(math.exp(-1.0), rel=1e-14)
    with pytest.raises(ValueError):
        growth_check(profile(lambda t: -t), T=0.0)


def test_dhat_moment_examples():
    om = MomentSequence.of(1.0 / np.arange(1, 202))
    rep = dhat_moment_check(om, ceiling=2.0)
    assert rep.passed and rep.constant < 2.0
    assert rep.constant == pytest.approx(201 / 101, rel=1e-14)
    rep = dhat_moment_check(MomentSequence.of([0.5] * 41), ceiling=2.0)
    assert rep.passed and rep.constant == 1.0
    rep = dhat_moment_check(MomentSequence.of(4.0 ** -np.arange(41.0)), ceiling=2.0)
    assert not rep.passed and rep.constant == 4.0**20
    with pytest.raises(ValueError):
        dhat_moment_check(MomentSequence.of([1.0, 0.0, 1.0]))


def test_dhat_tail_examples():
    r = np.linspace(0.0, 0.99, 100)
    rep = dhat_tail_check(ConstantWeight(), r)
    assert rep.constant == pytest.approx(2.0, abs=1e-9)
    rep = dhat_tail_check(PowerWeight(1.0, 1.0), r)
    assert rep.passed and rep.constant <= 2.0
    steep = CallableWeight(lambda x: np.exp(-1.0 / (1.0 - x)), "exp(-1/(1-r))")
    rep = dhat_tail_check(steep, np.linspace(0.0, 0.9, 91))
    assert rep.constant > 10 and not rep.passed
    vanishing = TabulatedWeight(np.array([0.1, 0.5, 0.9]), np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError, match="RKHS"):
        dhat_tail_check(vanishing, [0.95])


def test_tails_against_quadrature():
    steep = CallableWeight(lambda x: np.exp(-1.0 / (1.0 - x)))
    tab = ALL_WEIGHTS["tabulated"]
    for w in (steep, tab, PowerWeight(1.0, 1.0)):
        for r in (0.0, 0.3, 0.9):
            exact, _ = integrate.quad(lambda s: float(w.value(s)), r, 1.0, epsabs=0, epsrel=1e-13, limit=200,
                                      points=[k for k in w.knots if k > r] or None)
            assert weight_tail(w, r) == pytest.approx(exact, rel=1e-11)
    assert weight_tail(PowerWeight(1.0, 1.0), 0.5) == pytest.approx((1 - 0.5**3) / 3, rel=1e-15)


@pytest.mark.parametrize("name", ["constant", "power", "tabulated", "callable"])
def test_dhat_invariant_under_scaling(name):
    w = ALL_WEIGHTS[name]
    doubled = {
        "constant": lambda: ConstantWeight(2 * w.c),
        "power": lambda: PowerWeight(2 * w.c, w.p),
        "tabulated": lambda: TabulatedWeight(w.r, 2 * w.values),
        "callable": lambda: CallableWeight(lambda r: 2.0 * w.value(r)),
    }[name]()
    r = np.linspace(0.0, 0.9, 31)
    assert dhat_tail_check(doubled, r).constant == pytest.approx(dhat_tail_check(w, r).constant, rel=1e-12)


def test_laplace_moment_examples():
    for n in range(10):
        assert laplace_moment(profile(lambda t: -t), n).value == pytest.approx(1 / (n + 1), rel=1e-14)
    assert laplace_moment(profile(lambda t: -2 * t), 0).value == pytest.approx(0.5, rel=1e-14)
    t = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
    hp = HProfile(t, np.where(t <= 1.0, -t, -1.0 - 2.0 * (t - 1.0)))
    exact = sum(
        integrate.quad(lambda s: math.exp(-s + float(hp(s))), a, b, epsabs=0, epsrel=1e-13)[0]
        for a, b in [(0, 1), (1, 3), (3, np.inf)]
    )
    assert laplace_moment(hp, 1).value == pytest.approx(exact, abs=1e-12)
    with pytest.raises(ValueError, match="diverges"):
        laplace_moment(profile(lambda t: -t), -1)


def test_weight_moment_examples():
    np.testing.assert_allclose(weight_moments(ConstantWeight(), 20).values, 1 / np.arange(1, 22), rtol=1e-15)
    np.testing.assert_allclose(weight_moments(PowerWeight(1.0, 1.0), 20).values, 1 / np.arange(3, 24), rtol=1e-15)
    h = HWeight(profile(lambda t: -t))
    assert weight_moment(h, 1) == pytest.approx(0.5 * laplace_moment(h.profile, 0).value, rel=1e-15)
    assert weight_moment(h, 1) == pytest.approx(0.5, rel=1e-13)
    with pytest.raises(ValueError, match="inf"):
        weight_moment(HWeight(profile(lambda t: 0.5 * t)), 0)


def test_weight_moment_quadrature_routes():
    tab = ALL_WEIGHTS["tabulated"]
    for n in (0, 3, 11):
        exact, _ = integrate.quad(lambda s: s**n * float(tab.value(s)), 0, 1, points=tab.knots,
                                  epsabs=0, epsrel=1e-13)
        assert weight_moment(tab, n) == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("w", [ConstantWeight(1.0), ConstantWeight(3.0), PowerWeight(1.0, 1.0),
                               PowerWeight(0.5, 0.5), PowerWeight(2.0, 2.5)])
def test_laplace_weight_identity(w):
    hp = weight_to_h(w, GRID)
    for n in range(31):
        assert abs(2 * weight_moment(w, 2 * n + 1) - laplace_moment(hp, n).value) <= 1e-10


def test_rkhs_examples():
    assert rkhs_check(ConstantWeight())
    vanishing = TabulatedWeight(np.array([0.1, 0.5, 0.9]), np.array([1.0, 1.0, 0.0]))
    assert not rkhs_check(vanishing)
    assert rkhs_check(HWeight(profile(lambda t: 5 * t)))
    assert not rkhs_check(CallableWeight(lambda r: np.where(r < 0.9, 1.0, 0.0)))


def test_weight_from_dict():
    assert weight_from_dict({"kind": "constant", "c": 2.0}) == ConstantWeight(2.0)
    assert weight_from_dict({"kind": "power", "c": 1.0, "p": 1.0}) == PowerWeight(1.0, 1.0)
    h = weight_from_dict({"kind": "from_h", "t": [0, 1, 2], "log_h": [0, -1, -2]})
    assert isinstance(h, HWeight) and h.value(0.5) == pytest.approx(1.0)
    tab = weight_from_dict(ALL_WEIGHTS["tabulated"].to_dict())
    np.testing.assert_array_equal(tab.values, ALL_WEIGHTS["tabulated"].values)
    with pytest.raises(ValueError, match="unknown"):
        weight_from_dict({"kind": "gaussian"})


def test_profile_validation_and_extrapolation():
    with pytest.raises(ValueError):
        HProfile([0.0, 1.0], [0.0, -1.0])
    with pytest.raises(ValueError):
        HProfile([0.0, 2.0, 1.0], [0.0, -1.0, -2.0])
    with pytest.raises(ValueError):
        HProfile([-1.0, 0.0, 1.0], [0.0, -1.0, -2.0])
    hp = HProfile([1.0, 2.0, 4.0], [0.0, -1.0, -5.0])
    np.testing.assert_allclose(hp([0.0, 1.5, 6.0]), [1.0, -0.5, -9.0])
    assert HProfile.from_dict(hp.to_dict()).log_h.tolist() == hp.log_h.tolist()


@settings(max_examples=30, deadline=None)
@given(c=st.floats(0.01, 100.0), p=st.floats(0.0, 5.0))
def test_power_family_properties(c, p):
    w = PowerWeight(c, p)
    hp = weight_to_h(w, GRID)
    assert log_convexity_check(hp).passed
    back = np.array([h_to_weight(hp, r) for r in R])
    np.testing.assert_allclose(back, w.value(R), rtol=1e-12)
    # omega_n / omega_2n = (2n + 2p + 1) / (n + 2p + 1) < 2
    om = weight_moments(w, 40)
    assert dhat_moment_check(om, n_check=20).constant < 2.0
