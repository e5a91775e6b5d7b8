import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifsdim.moran import moran_exponent, moran_residual

# 50-digit roots from mpmath.findroot
S_HALF_THIRD = 0.78788491102586978
LOG2_LOG3 = 0.63092975357145744
LOG3_LOG2 = 1.5849625007211562
LOG2_LOG15 = 1.7095112913514548


def mp_root(ratios):
    mpmath.mp.dps = 50
    f = lambda s: mpmath.fsum(mpmath.mpf(c) ** s for c in ratios) - 1
    guess = -math.log(len(ratios)) / math.log(max(ratios))
    return float(mpmath.findroot(f, (mpmath.mpf(0), mpmath.mpf(guess)), solver="anderson"))


@pytest.mark.parametrize("ratios, expected, method", [
    ([1 / 3, 1 / 3], LOG2_LOG3, "closed-form"),
    ([0.5] * 3, LOG3_LOG2, "closed-form"),
    ([2 / 3, 2 / 3], LOG2_LOG15, "closed-form"),
    ([1 / 2, 1 / 3], S_HALF_THIRD, "bisection"),
])
def test_known_roots(ratios, expected, method):
    sol = moran_exponent(ratios)
    assert sol.method == method
    assert abs(sol.s - expected) <= 1e-12


def test_single_map():
    sol = moran_exponent([0.4])
    assert sol.s == 0.0 and sol.residual == 0.0


def test_rejects_bad_ratios():
    for bad in ([0.0, 0.5], [1.0], [1.2, 0.3], []):
        with pytest.raises(ValueError):
            moran_exponent(bad)
    with pytest.raises(ValueError):
        moran_exponent([0.5, 0.3], tol=1e-3)


def test_oracle_agreement_random():
    rng = np.random.default_rng(0)
    for _ in range(30):
        ratios = rng.uniform(0.01, 0.95, size=int(rng.integers(2, 7))).tolist()
        assert abs(moran_exponent(ratios).s - mp_root(ratios)) <= 1e-10


def test_bracketing_certificate_random():
    rng = np.random.default_rng(1)
    tol = 1e-10
    for _ in range(1000):
        k = int(rng.integers(2, 7))
        ratios = rng.uniform(0.02, 0.95, size=k).tolist()
        sol = moran_exponent(ratios, tol)
        assert sol.residual <= 1e-12
        assert moran_residual(ratios, sol.s - tol) > 0 > moran_residual(ratios, sol.s + tol)


def test_closed_form_agrees_with_bisection():
    from ifsdim import moran

    rng = np.random.default_rng(2)
    for _ in range(50):
        k = int(rng.integers(2, 9))
        c = float(rng.uniform(0.05, 0.95))
        closed = moran_exponent([c] * k).s
        # perturb by one ulp to force the bisection path
        bis = moran_exponent([c] * (k - 1) + [math.nextafter(c, 0)]).s
        assert moran.equal_ratios([c] * k)
        assert abs(closed - bis) <= 1e-12


ratio_lists = st.lists(st.floats(0.01, 0.95), min_size=1, max_size=6)


def assert_increases(new, old):
    # strict only when the perturbation of g at the old root exceeds the solver's residual band
    s_old, s_new = moran_exponent(old).s, moran_exponent(new).s
    lift = moran_residual(new, s_old) - moran_residual(old, s_old)
    if lift > 1e-10:
        assert s_new > s_old
    else:
        assert s_new >= s_old - 1e-12


@settings(max_examples=200, deadline=None)
@given(ratio_lists, st.floats(0.01, 0.95))
def test_adding_a_map_increases_exponent(ratios, extra):
    assert_increases(ratios + [extra], ratios)


@settings(max_examples=200, deadline=None)
@given(ratio_lists, st.data())
def test_increasing_a_ratio_increases_exponent(ratios, data):
    i = data.draw(st.integers(0, len(ratios) - 1))
    bigger = list(ratios)
    bigger[i] = min(0.97, ratios[i] + data.draw(st.floats(0.01, 0.2)))
    assert_increases(bigger, ratios)
